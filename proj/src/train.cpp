#include "gmvq/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "gmvq/log.hpp"
#include "gmvq/optimizer.hpp"
#include "gmvq/rng.hpp"

namespace gmvq {

namespace {

Mat gather_rows(const Mat& X, const std::vector<Index>& order, Index begin, Index end) {
  Mat out(end - begin, X.cols());
  for (Index i = begin; i < end; ++i) out.row(i - begin) = X.row(order[static_cast<size_t>(i)]);
  return out;
}

/// Value-only encoder pass returning the zhat half of the head.
Mat encode_zhat(const Model& m, const Mat& x) {
  MlpVars enc = bind_mlp_const(m.encoder);
  Var head = mlp_forward(enc, Var::constant(x));
  auto [zhat, what] = encoder_heads(head);
  (void)what;
  return zhat.value();
}

struct StepStats {
  double recon_sq = 0;  // mean_b ||x - xt||^2
  double perplexity = 0;
  double kl = 0;
  double latent_reg = 0;
};

}  // namespace

TrainResult train(const ModelConfig& cfg, const Dataset& data) {
  cfg.validate();
  detail::require(data.size() >= 1, "train: empty dataset");
  detail::require(data.dim() == cfg.input_dim,
                  "train: dataset dimension " + std::to_string(data.dim()) + " != input_dim " +
                      std::to_string(cfg.input_dim));

  TrainResult res;
  res.model = build_model(cfg);
  if (cfg.epochs == 0) return res;

  const Index N = data.size();
  const Index B = std::min<Index>(cfg.batch_size, N);
  const long steps_per_epoch = static_cast<long>((N + B - 1) / B);
  const long total_steps = cfg.epochs * steps_per_epoch;
  const double D = static_cast<double>(cfg.input_dim);

  LrSchedule lr{cfg.learning_rate, total_steps, cfg.warmup_frac, cfg.warmup_start_factor};
  TemperatureSchedule tau{cfg.tau_start, cfg.tau_end, total_steps, cfg.tau_end_frac};
  AdamW opt(0.9, 0.999, 1e-8, cfg.weight_decay);

  Rng noise_rng(cfg.seed ^ 0x9E3779B97F4A7C15ULL);
  Rng shuffle_rng(cfg.seed ^ 0xD1B54A32D192ED03ULL);

  std::vector<Index> order(static_cast<size_t>(N));
  std::iota(order.begin(), order.end(), Index(0));
  std::shuffle(order.begin(), order.end(), shuffle_rng);

  // Codebook init: k-means over the encoder outputs of the first batch.
  detail::require(B >= cfg.codebook_size,
                  "train: first batch must hold at least codebook_size points for k-means init (batch " +
                      std::to_string(B) + " < C " + std::to_string(cfg.codebook_size) + ")");
  {
    Mat x0 = gather_rows(data.X, order, 0, B);
    Mat z0 = encode_zhat(res.model, x0);
    res.model.codebook = kmeans_init(z0, cfg.codebook_size, cfg.kmeans_iters, cfg.seed).codebook;

    // Calibrate the precision head to the k-means geometry. An untrained
    // encoder squashes its outputs into a scale where the weighted distances
    // produce logit gaps of ~1e-4; every posterior row then starts uniform
    // and the quantizer has no assignment signal to escape that state. Set
    // the raw-weight bias so that softplus(bias) times the typical
    // near-vs-average distance gap lands at an O(1) logit gap, the same
    // first-batch statistic k-means itself uses.
    if (cfg.quantizer == QuantizerKind::kGmvq) {
      double gap_sum = 0;
      for (Index i = 0; i < z0.rows(); ++i) {
        double near = std::numeric_limits<double>::infinity();
        double avg = 0;
        for (Index c = 0; c < cfg.codebook_size; ++c) {
          const double d2 = (z0.row(i) - res.model.codebook.M.row(c)).squaredNorm();
          near = std::min(near, d2);
          avg += d2;
        }
        gap_sum += avg / static_cast<double>(cfg.codebook_size) - near;
      }
      const double mean_gap = gap_sum / static_cast<double>(z0.rows());
      if (mean_gap > 0) {
        constexpr double kTargetLogitGap = 4.0;
        const double w0 = std::clamp(2.0 * kTargetLogitGap / mean_gap, 1e-3, 1e8);
        // softplus(b) = w0  =>  b = log(exp(w0) - 1), with the linear tail
        // for large w0.
        const double bias = w0 > 30 ? w0 : std::log(std::expm1(w0));
        Mat& head_bias = res.model.encoder.layers.back().b;
        for (Index j = cfg.latent_dim; j < 2 * cfg.latent_dim; ++j) head_bias(0, j) = bias;
      }
    }
  }

  Model snapshot = res.model;
  long gstep = 0;
  try {
    for (long epoch = 0; epoch < cfg.epochs; ++epoch) {
      if (epoch > 0) std::shuffle(order.begin(), order.end(), shuffle_rng);
      StepStats acc;
      double tau_last = tau(gstep), lr_last = lr(gstep);
      long nsteps = 0;

      for (Index start = 0; start < N; start += B) {
        const Index end = std::min<Index>(start + B, N);
        Mat x = gather_rows(data.X, order, start, end);
        const double tau_now = tau(gstep);
        const double lr_now = lr(gstep);

        ModelVars mv = bind_model(res.model);
        StepStats step;
        Var total;
        switch (cfg.quantizer) {
          case QuantizerKind::kGmvq: {
            GmvqLossOptions opt_l{cfg.beta, cfg.gamma, cfg.sigma_z2, tau_now, /*hard=*/true};
            LossBreakdown lb = gmvq_loss(x, mv, opt_l, noise_rng);
            total = lb.total;
            step.recon_sq = lb.recon_value();
            step.latent_reg = lb.latent_reg_value();
            step.kl = lb.kl_value();
            step.perplexity = perplexity(lb.q_batch.value());
            break;
          }
          case QuantizerKind::kVqvaeSte: {
            VqvaeLossBreakdown lb = vqvae_loss(x, mv, res.model.codebook, cfg.alpha);
            total = lb.total;
            step.recon_sq = lb.recon.value()(0, 0);
            step.latent_reg = lb.commit.value()(0, 0) + cfg.alpha * lb.codebook_term.value()(0, 0);
            Mat qB = lb.pi_hard.colwise().mean();
            step.kl = kl_to_uniform_value(qB);
            step.perplexity = perplexity(qB);
            break;
          }
          case QuantizerKind::kStochasticVq: {
            StochasticVqOptions opt_l{cfg.sigma_z2, cfg.sigma_x2, tau_now};
            Mat g = draw_gumbel(x.rows(), cfg.codebook_size, noise_rng);
            StochasticVqBound lb = stochastic_vq_bound(x, mv, opt_l, g);
            total = lb.total;
            step.recon_sq = (x - lb.xtilde.value()).squaredNorm() / static_cast<double>(x.rows());
            step.latent_reg = lb.neg_entropy.value()(0, 0) + lb.log_c;
            Mat qB = lb.pi.value().colwise().mean();
            step.kl = kl_to_uniform_value(qB);
            step.perplexity = perplexity(qB);
            break;
          }
        }

        backward(total);
        std::vector<Mat> grads;
        grads.reserve(mv.params.size());
        for (const Var& p : mv.params) grads.push_back(p.grad());
        opt.step(model_parameters(res.model), grads, lr_now);

        acc.recon_sq += step.recon_sq;
        acc.perplexity += step.perplexity;
        acc.kl += step.kl;
        acc.latent_reg += step.latent_reg;
        tau_last = tau_now;
        lr_last = lr_now;
        ++gstep;
        ++nsteps;
      }

      MetricsRecord rec;
      rec.epoch = epoch;
      rec.step = gstep;
      rec.mse = acc.recon_sq / (static_cast<double>(nsteps) * D);
      rec.perplexity = acc.perplexity / static_cast<double>(nsteps);
      rec.kl = acc.kl / static_cast<double>(nsteps);
      rec.latent_reg = acc.latent_reg / static_cast<double>(nsteps);
      rec.tau = tau_last;
      rec.lr = lr_last;
      res.history.push_back(rec);
      log_debug("epoch %ld: mse=%.6g perplexity=%.4g kl=%.4g", epoch, rec.mse, rec.perplexity, rec.kl);

      snapshot = res.model;
    }
  } catch (const std::domain_error& e) {
    // Divergence: roll back to the last epoch boundary.
    res.model = snapshot;
    res.diverged = true;
    res.divergence_message = e.what();
    log_info("training diverged (%s); rolled back to last epoch checkpoint", e.what());
  }
  return res;
}

EvalResult evaluate(const Model& m, const Dataset& data) {
  m.config.validate();
  detail::require(data.size() >= 1, "evaluate: empty dataset");
  detail::require(data.dim() == m.config.input_dim, "evaluate: dataset dimension mismatch");

  const Index N = data.size();
  const Index B = std::min<Index>(m.config.batch_size, N);
  const Index C = m.codebook.num_codes();

  double sse = 0;
  double ppl_sum = 0;
  long batches = 0;
  MlpVars dec = bind_mlp_const(m.decoder);
  Var Mconst = Var::constant(m.codebook.M);

  for (Index start = 0; start < N; start += B) {
    const Index end = std::min<Index>(start + B, N);
    Mat x = data.X.middleRows(start, end - start);
    Mat zhat = encode_zhat(m, x);

    Mat pi;
    std::vector<Index> idx;
    switch (m.config.quantizer) {
      case QuantizerKind::kGmvq: {
        MlpVars enc = bind_mlp_const(m.encoder);
        Var head = mlp_forward(enc, Var::constant(x));
        PosteriorBundle pb = gm_posterior(head, Mconst, m.config.sigma_z2);
        pi = pb.pi.value();
        onehot_rows(pi, &idx);
        break;
      }
      case QuantizerKind::kStochasticVq: {
        Var p = stochastic_vq_posterior(Var::constant(zhat), Mconst, m.config.sigma_z2);
        pi = p.value();
        onehot_rows(pi, &idx);
        break;
      }
      case QuantizerKind::kVqvaeSte: {
        pi = Mat::Zero(x.rows(), C);
        for (Index b = 0; b < x.rows(); ++b) {
          const Index j = nearest(Mat(zhat.row(b)), m.codebook);
          idx.push_back(j);
          pi(b, j) = 1.0;
        }
        break;
      }
    }

    Mat z(x.rows(), m.codebook.latent_dim());
    for (Index b = 0; b < x.rows(); ++b) z.row(b) = m.codebook.M.row(idx[static_cast<size_t>(b)]);
    Mat xt = mlp_forward(dec, Var::constant(z)).value();
    sse += (x - xt).squaredNorm();

    Mat qB = pi.colwise().mean();
    ppl_sum += perplexity(qB);
    ++batches;
  }

  EvalResult r;
  r.mse = sse / (static_cast<double>(N) * static_cast<double>(data.dim()));
  r.perplexity = ppl_sum / static_cast<double>(batches);
  return r;
}

void write_metrics_csv(std::ostream& os, const std::vector<MetricsRecord>& history) {
  os << "epoch,step,mse,perplexity,kl,latent_reg,tau,lr\n";
  char buf[256];
  for (const auto& r : history) {
    std::snprintf(buf, sizeof buf, "%ld,%ld,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g\n", r.epoch, r.step,
                  r.mse, r.perplexity, r.kl, r.latent_reg, r.tau, r.lr);
    os << buf;
  }
}

void write_metrics_csv(const std::string& path, const std::vector<MetricsRecord>& history) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw std::runtime_error("gmvq: cannot open '" + path + "' for writing");
  write_metrics_csv(os, history);
  if (!os) throw std::runtime_error("gmvq: failed writing '" + path + "'");
}

}  // namespace gmvq
