#include "gmvq/losses.hpp"

#include <cmath>

namespace gmvq {

namespace {

constexpr double kProbFloor = 1e-12;

/// sum_c q_c log(max(q_c, floor)) as a graph node; rows of q are summed
/// jointly, so pass a single row for per-distribution entropy.
Var sum_q_log_q(const Var& q) {
  return sum(mul(q, log(clamp_min(q, kProbFloor))));
}

}  // namespace

Var aggregate_posterior(const Var& pi) {
  detail::require(pi.rows() >= 1, "aggregate_posterior: empty batch");
  return scale(colwise_sum(pi), 1.0 / static_cast<double>(pi.rows()));
}

Var kl_to_uniform(const Var& q) {
  detail::require(q.rows() == 1, "kl_to_uniform: q must be a single 1xC row");
  // sum_c q_c log(C q_c); the C*q form makes the uniform case an exact zero.
  Var cq = scale(q, static_cast<double>(q.cols()));
  return sum(mul(q, log(clamp_min(cq, kProbFloor))));
}

double kl_to_uniform_value(const Mat& q) {
  return kl_to_uniform(Var::constant(q)).value()(0, 0);
}

double entropy_nats(const Mat& q) {
  double h = 0;
  for (Index i = 0; i < q.size(); ++i) {
    const double p = q.data()[i];
    if (p > 0) h -= p * std::log(std::max(p, kProbFloor));
  }
  return h;
}

double perplexity(const Mat& q) {
  // Base-2 throughout, so uniform distributions over power-of-two supports
  // come out exact.
  double h2 = 0;
  for (Index i = 0; i < q.size(); ++i) {
    const double p = q.data()[i];
    if (p > 0) h2 -= p * std::log2(std::max(p, kProbFloor));
  }
  return std::exp2(h2);
}

Var mutual_info_entropy_loss(const Var& pi) {
  detail::require(pi.rows() >= 1, "mutual_info_entropy_loss: empty batch");
  const double B = static_cast<double>(pi.rows());
  // mean_x H(q(c|x)): -1/B sum over all entries of pi log pi.
  Var mean_cond_entropy = scale(sum_q_log_q(pi), -1.0 / B);
  Var agg = aggregate_posterior(pi);
  Var agg_entropy = scale(sum_q_log_q(agg), -1.0);
  return sub(mean_cond_entropy, agg_entropy);
}

LatentNoise draw_latent_noise(Index B, Index C, Index L, Rng& rng) {
  LatentNoise n;
  n.gumbel = draw_gumbel(B, C, rng);
  n.eps = draw_normal(B, L, rng);
  return n;
}

LossBreakdown gmvq_loss(const Mat& x, const ModelVars& mv, const GmvqLossOptions& opt,
                        const LatentNoise& noise) {
  detail::require(opt.beta >= 0 && opt.gamma >= 0, "gmvq_loss: beta and gamma must be >= 0");
  detail::require(x.rows() >= 1, "gmvq_loss: empty batch");
  const double B = static_cast<double>(x.rows());

  LossBreakdown out;
  Var head = mlp_forward(mv.encoder, Var::constant(x));
  out.posterior = gm_posterior(head, mv.M, opt.sigma_z2);

  GumbelSample gs = gumbel_softmax_sample(out.posterior.log_pi, opt.tau, noise.gumbel);
  out.component = gs.index;
  Var c_q = opt.hard ? gs.hard : gs.soft;

  Var mu_sel = matmul(c_q, mv.M);
  Var sigma_sel = sqrt(rowwise_sum(mul(c_q, out.posterior.sigma2_c)));
  out.z = add(mu_sel, mul(sigma_sel, Var::constant(noise.eps)));

  out.xtilde = mlp_forward(mv.decoder, out.z);
  out.recon = scale(sum(square(sub(Var::constant(x), out.xtilde))), 1.0 / B);
  out.latent_reg = scale(sum(square(sub(out.z, mu_sel))), 1.0 / B);
  out.q_batch = aggregate_posterior(out.posterior.pi);
  out.kl = kl_to_uniform(out.q_batch);
  out.total = add(out.recon, scale(add(out.latent_reg, scale(out.kl, opt.beta)), opt.gamma));

  if (!std::isfinite(out.total_value()))
    throw std::domain_error("gmvq: non-finite GM-VQ loss; aborting step");
  return out;
}

LossBreakdown gmvq_loss(const Mat& x, const ModelVars& mv, const GmvqLossOptions& opt, Rng& rng) {
  return gmvq_loss(x, mv, opt, draw_latent_noise(x.rows(), mv.M.rows(), mv.M.cols(), rng));
}

VqvaeLossBreakdown vqvae_loss(const Mat& x, const ModelVars& mv, const Codebook& cb, double alpha) {
  detail::require(alpha >= 0, "vqvae_loss: alpha must be >= 0");
  detail::require(x.rows() >= 1, "vqvae_loss: empty batch");
  const double B = static_cast<double>(x.rows());

  VqvaeLossBreakdown out;
  Var head = mlp_forward(mv.encoder, Var::constant(x));
  auto [zhat, what] = encoder_heads(head);
  (void)what;  // the deterministic baseline ignores the weight head

  SteResult ste = ste_quantize(zhat, cb);
  out.component = ste.index;
  out.pi_hard = Mat::Zero(x.rows(), cb.num_codes());
  for (Index b = 0; b < x.rows(); ++b) out.pi_hard(b, ste.index[static_cast<size_t>(b)]) = 1.0;

  Var xt = mlp_forward(mv.decoder, ste.z_c);
  out.recon = scale(sum(square(sub(Var::constant(x), xt))), 1.0 / B);

  // ||zhat - sg[z_c]||^2: codeword values enter as constants.
  out.commit = scale(sum(square(sub(zhat, Var::constant(ste.z_c.value())))), 1.0 / B);
  // alpha ||sg[zhat] - z_c||^2: encoder output enters as a constant, the
  // codeword selection stays differentiable in M.
  Var zc_of_m = select_rows(mv.M, std::vector<Index>(ste.index));
  out.codebook_term = scale(sum(square(sub(Var::constant(zhat.value()), zc_of_m))), 1.0 / B);

  out.total = add(out.recon, add(out.commit, scale(out.codebook_term, alpha)));
  if (!std::isfinite(out.total_value()))
    throw std::domain_error("gmvq: non-finite VQ-VAE loss; aborting step");
  return out;
}

StochasticVqBound stochastic_vq_bound(const Mat& x, const ModelVars& mv, const StochasticVqOptions& opt,
                                      const Mat& gumbel_noise) {
  detail::require(x.rows() >= 1, "stochastic_vq_bound: empty batch");
  detail::require(opt.sigma_x2 > 0, "stochastic_vq_bound: sigma_x2 must be positive");
  const double B = static_cast<double>(x.rows());
  const double D = static_cast<double>(x.cols());

  StochasticVqBound out;
  Var head = mlp_forward(mv.encoder, Var::constant(x));
  auto [zhat, what] = encoder_heads(head);
  (void)what;
  out.pi = stochastic_vq_posterior(zhat, mv.M, opt.sigma_z2);
  Var log_pi = log_softmax_lastdim(scale(pairwise_sqdist(zhat, mv.M), -1.0 / (2.0 * opt.sigma_z2)));

  GumbelSample gs = gumbel_softmax_sample(log_pi, opt.tau, gumbel_noise);
  out.component = gs.index;
  Var z = matmul(gs.hard, mv.M);  // codeword straight to the decoder
  out.xtilde = mlp_forward(mv.decoder, z);

  const double log_norm = 0.5 * D * std::log(2.0 * M_PI * opt.sigma_x2);
  out.nll_recon = add_const(
      scale(sum(square(sub(Var::constant(x), out.xtilde))), 1.0 / (2.0 * opt.sigma_x2 * B)), log_norm);
  // mean_b -H(q(c|x_b)) = 1/B sum over entries of pi log pi.
  out.neg_entropy = scale(sum(mul(out.pi, log(clamp_min(out.pi, 1e-12)))), 1.0 / B);
  out.log_c = std::log(static_cast<double>(mv.M.rows()));
  out.total = add_const(add(out.nll_recon, out.neg_entropy), out.log_c);

  if (!std::isfinite(out.total_value()))
    throw std::domain_error("gmvq: non-finite stochastic-VQ bound; aborting step");
  return out;
}

}  // namespace gmvq
