#include "gmvq/bias_experiment.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

#include "gmvq/losses.hpp"
#include "gmvq/posterior.hpp"
#include "gmvq/sampling.hpp"

namespace gmvq {

namespace {

Mat softmax_row(const Mat& logits) {
  return detail::softmax_rows(logits);
}

double scorer_value(const MlpVars& scorer, const Mat& input) {
  return mlp_forward(scorer, Var::constant(input)).value()(0, 0);
}

/// Temperature such that H(softmax(logits / tau)) hits the target entropy,
/// by bisection on log tau. H is monotone increasing in tau for a fixed
/// non-constant logit vector.
double solve_temperature(const Mat& logits, double target_entropy) {
  double lo = -14, hi = 14;  // log tau
  auto h_at = [&](double log_tau) {
    return entropy_nats(softmax_row(logits / std::exp(log_tau)));
  };
  detail::require(h_at(lo) < target_entropy && h_at(hi) > target_entropy,
                  "bias sweep: entropy target out of reachable range");
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (h_at(mid) < target_entropy ? lo : hi) = mid;
  }
  return std::exp(0.5 * (lo + hi));
}

}  // namespace

Mlp make_scorer(Index n_actions, const std::vector<Index>& hidden, std::uint64_t seed) {
  std::vector<Index> dims = {n_actions};
  dims.insert(dims.end(), hidden.begin(), hidden.end());
  dims.push_back(1);
  return make_mlp(dims, seed);
}

Mat exact_gradient(const Mat& logits, const Mlp& scorer) {
  detail::require(logits.rows() == 1, "exact_gradient: logits must be a single row");
  const Index C = logits.cols();
  detail::require(scorer.input_dim() == C, "exact_gradient: scorer input width mismatch");
  MlpVars sv = bind_mlp_const(scorer);

  Mat p = softmax_row(logits);
  Mat f(1, C);
  for (Index c = 0; c < C; ++c) {
    Mat onehot = Mat::Zero(1, C);
    onehot(0, c) = 1.0;
    f(0, c) = scorer_value(sv, onehot);
  }
  const double expectation = (p.array() * f.array()).sum();
  return (p.array() * (f.array() - expectation)).matrix();
}

Mat gumbel_estimate(const Mat& logits, const Mlp& scorer, double tau, int repeats, Rng& rng) {
  detail::require(logits.rows() == 1, "gumbel_estimate: logits must be a single row");
  detail::require(repeats >= 1, "gumbel_estimate: repeats must be >= 1");
  MlpVars sv = bind_mlp_const(scorer);

  Mat acc = Mat::Zero(1, logits.cols());
  for (int r = 0; r < repeats; ++r) {
    Var l = Var::leaf(logits);
    Var log_pi = log_softmax_lastdim(l);
    GumbelSample gs = gumbel_softmax_sample(log_pi, tau, rng);
    Var score = mlp_forward(sv, gs.hard);
    backward(score);
    acc += l.grad();
  }
  return acc / static_cast<double>(repeats);
}

double gumbel_estimate_error(const Mat& logits, const Mlp& scorer, const Mat& exact, double tau,
                             int repeats, Rng& rng) {
  detail::require(logits.rows() == 1, "gumbel_estimate_error: logits must be a single row");
  detail::require(repeats >= 1, "gumbel_estimate_error: repeats must be >= 1");
  MlpVars sv = bind_mlp_const(scorer);

  double acc = 0;
  for (int r = 0; r < repeats; ++r) {
    Var l = Var::leaf(logits);
    Var log_pi = log_softmax_lastdim(l);
    GumbelSample gs = gumbel_softmax_sample(log_pi, tau, rng);
    Var score = mlp_forward(sv, gs.hard);
    backward(score);
    acc += (l.grad() - exact).norm();
  }
  return acc / static_cast<double>(repeats);
}

BiasSweepResult run_bias_sweep(const BiasSweepConfig& cfg) {
  detail::require(cfg.grid_points >= 10, "bias sweep: need at least 10 grid points");
  detail::require(cfg.scorer_seeds >= 1 && cfg.repeats >= 1, "bias sweep: seeds and repeats must be >= 1");
  detail::require(cfg.estimator_tau > 0, "bias sweep: estimator tau must be positive");
  detail::require(cfg.entropy_lo_frac > 0 && cfg.entropy_hi_frac < 1 &&
                      cfg.entropy_lo_frac < cfg.entropy_hi_frac,
                  "bias sweep: entropy fractions must satisfy 0 < lo < hi < 1");

  BiasSweepResult res;
  res.config = cfg;
  Rng master(cfg.master_seed);
  res.base_logits = draw_normal(1, cfg.n_actions, master);

  // Solve the temperature grid once; every scorer sees the same tempered
  // distributions.
  const double log_c = std::log(static_cast<double>(cfg.n_actions));
  std::vector<double> taus(static_cast<size_t>(cfg.grid_points));
  std::vector<Mat> tempered(static_cast<size_t>(cfg.grid_points));
  std::vector<double> entropies(static_cast<size_t>(cfg.grid_points));
  for (int g = 0; g < cfg.grid_points; ++g) {
    const double frac = cfg.entropy_lo_frac + (cfg.entropy_hi_frac - cfg.entropy_lo_frac) * g /
                                                  static_cast<double>(cfg.grid_points - 1);
    taus[g] = solve_temperature(res.base_logits, frac * log_c);
    tempered[g] = res.base_logits / taus[g];
    entropies[g] = entropy_nats(softmax_row(tempered[g]));
  }
  bool degenerate = true;
  for (const double h : entropies) degenerate = degenerate && (h == entropies.front());
  if (degenerate) throw std::invalid_argument("gmvq: bias sweep grid is degenerate (all entropies equal)");

  std::vector<double> pooled_h, pooled_z;
  for (int s = 0; s < cfg.scorer_seeds; ++s) {
    const std::uint64_t seed = cfg.master_seed * 1000003ULL + static_cast<std::uint64_t>(s) + 1;
    Mlp scorer = make_scorer(cfg.n_actions, cfg.hidden, seed);

    // Exact gradients over the grid; their RMS norm sets the scorer's scale.
    std::vector<Mat> exact(static_cast<size_t>(cfg.grid_points));
    double rms = 0;
    for (int g = 0; g < cfg.grid_points; ++g) {
      exact[g] = exact_gradient(tempered[g], scorer);
      rms += exact[g].squaredNorm();
    }
    rms = std::sqrt(rms / cfg.grid_points);
    detail::require(rms > 0, "bias sweep: exact gradients vanished for a scorer");

    std::vector<double> bias_row(static_cast<size_t>(cfg.grid_points));
    for (int g = 0; g < cfg.grid_points; ++g) {
      Rng rng(seed * 6364136223846793005ULL + static_cast<std::uint64_t>(g));
      const double err =
          gumbel_estimate_error(tempered[g], scorer, exact[g], cfg.estimator_tau, cfg.repeats, rng);
      bias_row[g] = err / rms;

      BiasSample sample;
      sample.tau_softmax = taus[g];
      sample.entropy_nats = entropies[g];
      sample.bias = bias_row[g];
      sample.seed = seed;
      res.samples.push_back(sample);
    }

    // Standardize within the scorer before pooling, so the reported
    // correlation captures the shared entropy trend, not per-scorer error
    // levels.
    double mean = 0, sd = 0;
    for (double b : bias_row) mean += b;
    mean /= cfg.grid_points;
    for (double b : bias_row) sd += (b - mean) * (b - mean);
    sd = std::sqrt(sd / cfg.grid_points);
    for (int g = 0; g < cfg.grid_points; ++g) {
      pooled_h.push_back(entropies[g]);
      pooled_z.push_back(sd > 0 ? (bias_row[g] - mean) / sd : 0.0);
    }
  }

  res.corr = pearson_with_p(pooled_h, pooled_z);
  return res;
}

void write_bias_csv(std::ostream& os, const BiasSweepResult& res) {
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "# estimator_tau=%.6g bias=mean_single_estimate_error_l2/rms_exact_norm repeats=%d "
                "n_actions=%ld rho=within_scorer_standardized\n",
                res.config.estimator_tau, res.config.repeats, static_cast<long>(res.config.n_actions));
  os << buf;
  os << "entropy,bias,tau,seed\n";
  for (const auto& s : res.samples) {
    std::snprintf(buf, sizeof buf, "%.12g,%.12g,%.12g,%llu\n", s.entropy_nats, s.bias, s.tau_softmax,
                  static_cast<unsigned long long>(s.seed));
    os << buf;
  }
  os << "pearson_rho,p_value\n";
  std::snprintf(buf, sizeof buf, "%.12g,%.12g\n", res.corr.rho, res.corr.p_value);
  os << buf;
}

}  // namespace gmvq
