// Acceptance suite: one self-contained check per criterion, each printing a
// single PASS/FAIL line. Exit code 0 only if every criterion passes.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "gmvq/bias_experiment.hpp"
#include "gmvq/checkpoint.hpp"
#include "gmvq/losses.hpp"
#include "gmvq/stats.hpp"
#include "gmvq/train.hpp"
#include "support/op_checks.hpp"
#include "support/oracles.hpp"

using namespace gmvq;
namespace fs = std::filesystem;

namespace {

struct Criterion {
  int id;
  std::string name;
  double budget_seconds;
  std::function<bool(std::string&)> run;
};

// --------------------------------------------------------------------------
// 1. Gradient correctness: every diffcore op and the full GM-VQ loss (fixed
//    noise, soft path), max relative error < 1e-5 at 100 random points.

bool criterion_gradients(std::string& detail) {
  Rng rng(1001);
  double worst_op = 0;
  for (auto& check : gmvq::testing::diffcore_op_checks()) {
    for (int rep = 0; rep < 100; ++rep) {
      GradCheckResult r = check.run(rng);
      if (r.kink_suspected) {
        --rep;  // resample away from the kink
        continue;
      }
      worst_op = std::max(worst_op, r.max_rel_error);
      if (r.max_rel_error >= 1e-5) {
        detail = "op " + check.name + " rel error " + std::to_string(r.max_rel_error);
        return false;
      }
    }
  }

  // Full GM-VQ loss, soft path, gradients w.r.t. every parameter.
  ModelConfig cfg;
  cfg.input_dim = 4;
  cfg.latent_dim = 2;
  cfg.codebook_size = 3;
  cfg.encoder_hidden = {5};
  cfg.decoder_hidden = {5};
  GmvqLossOptions opt;
  opt.beta = 1.3;
  opt.gamma = 0.4;
  opt.tau = 0.9;
  opt.hard = false;

  Rng lrng(2002);
  double worst_loss = 0;
  int done = 0, attempts = 0;
  while (done < 100 && attempts < 200) {
    ++attempts;
    cfg.seed = 3000 + static_cast<std::uint64_t>(attempts);
    Model m = build_model(cfg);
    Mat x = draw_normal(2, 4, lrng);
    LatentNoise noise = draw_latent_noise(2, 3, 2, lrng);
    std::vector<Mat> point;
    for (Mat* p : model_parameters(m)) point.push_back(*p);
    auto f = [&](const std::vector<Var>& leaves) {
      ModelVars mv;
      size_t k = 0;
      for (size_t i = 0; i < m.encoder.layers.size(); ++i, k += 2)
        mv.encoder.layers.emplace_back(leaves[k], leaves[k + 1]);
      for (size_t i = 0; i < m.decoder.layers.size(); ++i, k += 2)
        mv.decoder.layers.emplace_back(leaves[k], leaves[k + 1]);
      mv.M = leaves[k];
      return gmvq_loss(x, mv, opt, noise).total;
    };
    GradCheckResult r = grad_check(f, point);
    if (r.kink_suspected) continue;  // relu preactivation on a kink
    worst_loss = std::max(worst_loss, r.max_rel_error);
    if (r.max_rel_error >= 1e-5) {
      detail = "GM-VQ loss rel error " + std::to_string(r.max_rel_error);
      return false;
    }
    ++done;
  }
  if (done < 100) {
    detail = "only " + std::to_string(done) + " kink-free loss points in 200 attempts";
    return false;
  }
  char buf[160];
  std::snprintf(buf, sizeof buf, "worst op error %.2e, worst loss error %.2e over 100 points each",
                worst_op, worst_loss);
  detail = buf;
  return true;
}

// --------------------------------------------------------------------------
// 2. Aggregated-posterior bound: quadrature log p(x) dominates the 1e5-sample
//    MC estimate within 3 standard errors, for 20 random parameter settings.

bool criterion_albo_bound(std::string& detail) {
  Rng rng(20202);
  std::uniform_real_distribution<double> u(0, 1);
  const double min_var = 1.05 / (2.0 * M_PI * std::exp(1.0));  // keeps H(q(z|x)) >= 0
  int settings = 0;
  double worst_margin = 1e300;
  while (settings < 20) {
    gmvq::testing::Gmvq1d inst;
    inst.mu[0] = -2.0 + 1.5 * u(rng);
    inst.mu[1] = 0.5 + 1.5 * u(rng);
    inst.sigma_z2 = 0.4 + 1.4 * u(rng);
    inst.sigma_x2 = 0.4 + 1.4 * u(rng);
    inst.dec_a = 0.4 + 1.2 * u(rng);
    inst.dec_b = -0.5 + u(rng);
    inst.zhat = -1.2 + 2.4 * u(rng);
    inst.what = 0.3 + 1.7 * u(rng);
    if (inst.sigma2_c(0) < min_var || inst.sigma2_c(1) < min_var) continue;

    // A small batch shares the aggregated posterior; the bound must hold for
    // each conditioning point.
    gmvq::testing::Gmvq1d other = inst;
    other.zhat = -1.2 + 2.4 * u(rng);
    other.what = 0.3 + 1.7 * u(rng);
    if (other.sigma2_c(0) < min_var || other.sigma2_c(1) < min_var) continue;

    double pa[2], pb[2];
    inst.posterior(pa);
    other.posterior(pb);
    const double q_agg[2] = {0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])};

    for (const auto& member : {inst, other}) {
      const double x = -1.5 + 3.0 * u(rng);
      const double logp = member.log_marginal_quadrature(x);
      if (std::abs(logp - member.log_marginal_closed(x)) > 1e-6) {
        detail = "quadrature disagrees with the closed form";
        return false;
      }
      gmvq::testing::McEstimate est = gmvq::testing::albo_mc_estimate(member, x, q_agg, 100000, rng);
      const double margin = logp + 3.0 * est.std_error - est.mean;
      worst_margin = std::min(worst_margin, margin);
      if (est.mean > logp + 3.0 * est.std_error) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "bound violated: estimate %.6f > log p %.6f + 3se %.6f",
                      est.mean, logp, 3.0 * est.std_error);
        detail = buf;
        return false;
      }
    }
    ++settings;
  }
  char buf[120];
  std::snprintf(buf, sizeof buf, "20 settings x 2 points, slack at worst %.4f nats", worst_margin);
  detail = buf;
  return true;
}

// --------------------------------------------------------------------------
// 3. Loss-derivation equivalence: the beta/gamma-weighted loss plus the
//    rescaled normalized-constant bound estimate is the same constant for
//    every parameter setting under common random numbers.

bool criterion_equivalence(std::string& detail) {
  const double sigma_x2 = 0.7, sigma_z2 = 1.3;
  ModelConfig cfg;
  cfg.input_dim = 5;
  cfg.latent_dim = 3;
  cfg.codebook_size = 4;
  cfg.encoder_hidden = {8};
  cfg.decoder_hidden = {8};
  cfg.beta = 2.0 * sigma_z2;
  cfg.gamma = sigma_x2 / sigma_z2;
  cfg.sigma_z2 = sigma_z2;

  Rng rng(30303);
  Mat x = draw_normal(6, 5, rng);
  LatentNoise noise = draw_latent_noise(6, 4, 3, rng);
  const double D = 5, L = 3, C = 4;
  const double expected =
      -sigma_x2 * (D * std::log(2 * M_PI * sigma_x2) + L * std::log(2 * M_PI * sigma_z2));

  std::vector<double> values;
  for (int setting = 0; setting < 5; ++setting) {
    cfg.seed = 600 + static_cast<std::uint64_t>(setting);
    Model m = build_model(cfg);
    ModelVars mv = bind_model(m);
    GmvqLossOptions opt{cfg.beta, cfg.gamma, sigma_z2, 0.8, true};
    LossBreakdown lb = gmvq_loss(x, mv, opt, noise);

    Var head = mlp_forward(bind_mlp_const(m.encoder), Var::constant(x));
    PosteriorBundle pb = gm_posterior(head, Var::constant(m.codebook.M), sigma_z2);
    Mat log_pi = pb.log_pi.value();
    Mat qB = pb.pi.value().colwise().mean();
    double acc = 0;
    for (Index b = 0; b < x.rows(); ++b) {
      Index c = 0;
      for (Index k = 1; k < C; ++k)
        if (log_pi(b, k) + noise.gumbel(b, k) > log_pi(b, c) + noise.gumbel(b, c)) c = k;
      const double s2 = pb.sigma2_c.value()(b, c);
      Mat z = m.codebook.M.row(c) + std::sqrt(s2) * noise.eps.row(b);
      Mat xt = mlp_forward(bind_mlp_const(m.decoder), Var::constant(z)).value();
      for (Index d = 0; d < x.cols(); ++d)
        acc += gmvq::testing::gauss_logpdf(x(b, d), xt(0, d), sigma_x2);
      for (Index l = 0; l < L; ++l)
        acc += gmvq::testing::gauss_logpdf(z(0, l), m.codebook.M(c, l), sigma_z2);
    }
    double kl = 0;
    for (Index c = 0; c < C; ++c)
      if (qB(0, c) > 0) kl += qB(0, c) * std::log(C * qB(0, c));
    const double albo_mean = acc / x.rows() - kl;
    values.push_back(lb.total_value() + 2.0 * sigma_x2 * albo_mean);
  }

  double max_spread = 0;
  for (size_t i = 0; i < values.size(); ++i) {
    for (size_t j = i + 1; j < values.size(); ++j)
      max_spread = std::max(max_spread,
                            std::abs(values[i] - values[j]) / std::max(1.0, std::abs(values[i])));
    if (std::abs(values[i] - expected) > 1e-9 * std::max(1.0, std::abs(expected))) {
      detail = "constant deviates from its analytic value";
      return false;
    }
  }
  if (max_spread > 1e-6) {
    detail = "relative spread " + std::to_string(max_spread);
    return false;
  }
  char buf[120];
  std::snprintf(buf, sizeof buf, "5 settings, relative spread %.2e, constant %.6f", max_spread,
                expected);
  detail = buf;
  return true;
}

// --------------------------------------------------------------------------
// 4. Gumbel sampling fidelity at C = 4 and C = 32.

bool criterion_sampling(std::string& detail) {
  Rng rng(40404);
  double worst_tv = 0;
  for (Index C : {Index(4), Index(32)}) {
    Mat logits = draw_uniform(1, C, -1.5, 1.5, rng);
    Var log_pi = log_softmax_lastdim(Var::constant(logits));
    Mat pi = log_pi.value().array().exp();

    const long n = 100000;
    const Index rows = 500;
    std::vector<double> freqs(static_cast<size_t>(C), 0.0);
    Mat log_pi_batch = log_pi.value().replicate(rows, 1);
    for (long i = 0; i < n / rows; ++i) {
      GumbelSample s = gumbel_softmax_sample(Var::constant(log_pi_batch), 0.8, rng);
      for (Index b = 0; b < rows; ++b) freqs[static_cast<size_t>(s.index[static_cast<size_t>(b)])] += 1;
    }
    std::vector<double> probs(static_cast<size_t>(C));
    for (Index c = 0; c < C; ++c) {
      probs[static_cast<size_t>(c)] = pi(0, c);
      freqs[static_cast<size_t>(c)] /= static_cast<double>(n);
    }
    const double tv = gmvq::testing::total_variation(probs, freqs);
    worst_tv = std::max(worst_tv, tv);
    if (tv > 0.01) {
      detail = "C=" + std::to_string(C) + " total variation " + std::to_string(tv);
      return false;
    }

    // Low-temperature limit: whenever the perturbed logits have a clear
    // winner at the tau scale (gap > tau ln((C-1)/1e-3)), the soft sample
    // must be within 1e-3 of the exact one-hot. Near-ties are excluded; the
    // tempering cannot separate what the draw left tied.
    const double tau = 0.01;
    const double gap_needed = tau * std::log((static_cast<double>(C) - 1) * 1e3);
    int clear = 0;
    for (int rep = 0; rep < 200; ++rep) {
      Mat g = draw_gumbel(1, C, rng);
      Mat perturbed = log_pi.value() + g;
      double top = -1e300, second = -1e300;
      for (Index c = 0; c < C; ++c) {
        if (perturbed(0, c) > top) {
          second = top;
          top = perturbed(0, c);
        } else if (perturbed(0, c) > second) {
          second = perturbed(0, c);
        }
      }
      if (top - second < gap_needed) continue;
      ++clear;
      GumbelSample s = gumbel_softmax_sample(log_pi, tau, g);
      const double dev = (s.soft.value() - s.hard.value()).cwiseAbs().maxCoeff();
      if (dev >= 1e-3) {
        detail = "soft sample " + std::to_string(dev) + " from one-hot at tau=0.01";
        return false;
      }
    }
    if (clear < 100) {
      detail = "too few clear-winner draws (" + std::to_string(clear) + "/200)";
      return false;
    }
  }
  char buf[96];
  std::snprintf(buf, sizeof buf, "worst TV %.4f at 1e5 draws; soft one-hot at tau=0.01", worst_tv);
  detail = buf;
  return true;
}

// --------------------------------------------------------------------------
// 5. Bias-entropy reproduction: full sweep, Pearson rho > 0.5, p < 0.01.

bool criterion_bias(std::string& detail) {
  BiasSweepConfig cfg;  // C=10, hidden {50,5}, 12 grid points, 50 repeats, 20 seeds
  cfg.master_seed = 0;
  BiasSweepResult res = run_bias_sweep(cfg);

  // Samples are laid out seed-major; the first and last grid points of each
  // seed give the low/high-entropy endpoints.
  int endpoint_ok = 0;
  const size_t g = static_cast<size_t>(cfg.grid_points);
  for (int s = 0; s < cfg.scorer_seeds; ++s) {
    const BiasSample& lo = res.samples[static_cast<size_t>(s) * g];
    const BiasSample& hi = res.samples[static_cast<size_t>(s) * g + g - 1];
    if (lo.bias < hi.bias) ++endpoint_ok;
  }
  char buf[160];
  std::snprintf(buf, sizeof buf, "rho %.3f (p %.2e) over %ld samples; low < high bias for %d/%d seeds",
                res.corr.rho, res.corr.p_value, res.corr.n, endpoint_ok, cfg.scorer_seeds);
  detail = buf;
  return res.corr.rho > 0.5 && res.corr.p_value < 0.01 &&
         endpoint_ok * 10 >= cfg.scorer_seeds * 9;  // >= 90% of seeds
}

// --------------------------------------------------------------------------
// 6. Utilization trend on 16-cluster data: GM-VQ perplexity at least 2x the
//    STE baseline with MSE no worse than 1.2x, for each of 3 seeds.

bool criterion_utilization(std::string& detail) {
  std::string summary;
  for (int s = 0; s < 3; ++s) {
    Dataset ds = make_synthetic_dataset(16, 64, 4096, 0.05, 7000 + static_cast<std::uint64_t>(s));
    ModelConfig cfg;
    cfg.input_dim = 64;
    cfg.latent_dim = 8;
    cfg.codebook_size = 32;
    cfg.encoder_hidden = {128, 64};
    cfg.decoder_hidden = {64, 128};
    cfg.batch_size = 256;
    cfg.epochs = 50;
    cfg.seed = 100 + static_cast<std::uint64_t>(s);

    cfg.quantizer = QuantizerKind::kGmvq;
    TrainResult gm = train(cfg, ds);
    EvalResult gm_eval = evaluate(gm.model, ds);

    cfg.quantizer = QuantizerKind::kVqvaeSte;
    TrainResult vq = train(cfg, ds);
    EvalResult vq_eval = evaluate(vq.model, ds);

    char buf[160];
    std::snprintf(buf, sizeof buf, " seed %d: ppl %.1f vs %.1f, mse %.3e vs %.3e;", s,
                  gm_eval.perplexity, vq_eval.perplexity, gm_eval.mse, vq_eval.mse);
    summary += buf;
    if (gm.diverged || vq.diverged) {
      detail = "a run diverged;" + summary;
      return false;
    }
    if (gm_eval.perplexity < 2.0 * vq_eval.perplexity) {
      detail = "perplexity factor below 2;" + summary;
      return false;
    }
    if (gm_eval.mse > 1.2 * vq_eval.mse) {
      detail = "MSE above 1.2x baseline;" + summary;
      return false;
    }
  }
  detail = summary;
  return true;
}

// --------------------------------------------------------------------------
// 7. Entropy-regularization trend: Spearman(beta, final perplexity) > 0 for
//    each seed; the MSE trend is reported but not gated.

bool criterion_beta_trend(std::string& detail) {
  const std::vector<double> betas = {0.5, 1.0, 2.0, 4.0};
  std::string summary;
  for (int s = 0; s < 3; ++s) {
    Dataset ds = make_synthetic_dataset(16, 64, 4096, 0.05, 7100 + static_cast<std::uint64_t>(s));
    std::vector<double> ppls, mses;
    for (double beta : betas) {
      ModelConfig cfg;
      cfg.input_dim = 64;
      cfg.latent_dim = 8;
      cfg.codebook_size = 32;
      cfg.encoder_hidden = {128, 64};
      cfg.decoder_hidden = {64, 128};
      cfg.batch_size = 256;
      cfg.epochs = 30;
      cfg.beta = beta;
      cfg.gamma = 0.1;
      cfg.seed = 200 + static_cast<std::uint64_t>(s);
      TrainResult res = train(cfg, ds);
      if (res.diverged) {
        detail = "a sweep cell diverged";
        return false;
      }
      EvalResult ev = evaluate(res.model, ds);
      ppls.push_back(ev.perplexity);
      mses.push_back(ev.mse);
    }
    const double rho_ppl = spearman(betas, ppls);
    const double rho_mse = spearman(betas, mses);
    char buf[200];
    std::snprintf(buf, sizeof buf, " seed %d: spearman(beta,ppl) %.2f [ppl %.1f..%.1f], "
                  "spearman(beta,mse) %.2f (reported, ungated);",
                  s, rho_ppl, ppls.front(), ppls.back(), rho_mse);
    summary += buf;
    if (rho_ppl <= 0.0) {
      detail = "non-positive perplexity trend;" + summary;
      return false;
    }
  }
  detail = summary;
  return true;
}

// --------------------------------------------------------------------------
// 8. Metric identities.

bool criterion_metric_identities(std::string& detail) {
  for (Index C : {Index(4), Index(32), Index(1024)}) {
    Mat uniform = Mat::Constant(1, C, 1.0 / static_cast<double>(C));
    if (perplexity(uniform) != static_cast<double>(C)) {
      detail = "perplexity(uniform over " + std::to_string(C) + ") != C";
      return false;
    }
    if (kl_to_uniform_value(uniform) != 0.0) {
      detail = "kl_to_uniform(uniform over " + std::to_string(C) + ") != 0";
      return false;
    }
  }
  Rng rng(80808);
  for (int rep = 0; rep < 1000; ++rep) {
    Mat rows = detail::softmax_rows(draw_uniform(6, 9, -5, 5, rng));
    if (mutual_info_entropy_loss(Var::constant(rows)).value()(0, 0) > 1e-10) {
      detail = "positive mutual-information entropy loss";
      return false;
    }
  }
  detail = "perplexity and KL identities exact; entropy loss <= 0 on 1000 batches";
  return true;
}

// --------------------------------------------------------------------------
// 9. Explicit non-reproducibility of the full-scale absolute numbers.

bool criterion_scope(std::string& detail) {
  detail =
      "absolute metrics from full-scale image-dataset training (1024-code models on real "
      "images) are out of desk scope by design; criteria 6-7 gate directional substitutes "
      "on synthetic data";
  return true;
}

// --------------------------------------------------------------------------
// 10. Determinism: byte-identical metrics.csv across two runs.

bool criterion_determinism(std::string& detail) {
  ModelConfig cfg;
  cfg.input_dim = 16;
  cfg.latent_dim = 4;
  cfg.codebook_size = 8;
  cfg.encoder_hidden = {32};
  cfg.decoder_hidden = {32};
  cfg.batch_size = 64;
  cfg.epochs = 5;
  cfg.seed = 4242;
  Dataset ds = make_synthetic_dataset(8, 16, 512, 0.05, 99);

  const fs::path dir = fs::temp_directory_path();
  const fs::path a = dir / "gmvq_acceptance_metrics_a.csv";
  const fs::path b = dir / "gmvq_acceptance_metrics_b.csv";
  write_metrics_csv(a.string(), train(cfg, ds).history);
  write_metrics_csv(b.string(), train(cfg, ds).history);

  std::ifstream fa(a, std::ios::binary), fb(b, std::ios::binary);
  std::stringstream sa, sb;
  sa << fa.rdbuf();
  sb << fb.rdbuf();
  fs::remove(a);
  fs::remove(b);
  if (sa.str() != sb.str() || sa.str().empty()) {
    detail = "metrics.csv differs between identical runs";
    return false;
  }
  detail = "two runs, " + std::to_string(sa.str().size()) + " bytes each, byte-identical";
  return true;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<Criterion> criteria = {
      {1, "gradient correctness (diffcore ops + GM-VQ loss)", 60, criterion_gradients},
      {2, "aggregated-posterior bound vs quadrature", 120, criterion_albo_bound},
      {3, "loss-derivation equivalence", 60, criterion_equivalence},
      {4, "Gumbel sampling fidelity", 60, criterion_sampling},
      {5, "bias-entropy correlation", 300, criterion_bias},
      {6, "codebook utilization trend vs STE baseline", 1800, criterion_utilization},
      {7, "entropy-regularization trend over beta", 1800, criterion_beta_trend},
      {8, "metric identities", 60, criterion_metric_identities},
      {9, "full-scale absolute numbers out of scope", 10, criterion_scope},
      {10, "determinism of metrics.csv", 300, criterion_determinism},
  };

  int only = 0;
  if (argc > 1) only = std::atoi(argv[1]);

  bool all_ok = true;
  for (auto& c : criteria) {
    if (only != 0 && c.id != only) continue;
    std::string detail;
    const auto t0 = std::chrono::steady_clock::now();
    bool ok = false;
    try {
      ok = c.run(detail);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (secs > c.budget_seconds) {
      ok = false;
      detail += " [exceeded " + std::to_string(static_cast<long>(c.budget_seconds)) + "s budget]";
    }
    std::printf("[%s] criterion %2d: %s (%.1fs) %s\n", ok ? "PASS" : "FAIL", c.id, c.name.c_str(),
                secs, detail.c_str());
    std::fflush(stdout);
    all_ok = all_ok && ok;
  }
  std::printf("%s\n", all_ok ? "ACCEPTANCE: all criteria passed" : "ACCEPTANCE: FAILURES PRESENT");
  return all_ok ? 0 : 1;
}
