#pragma once

#include <vector>

#include "gmvq/array.hpp"
#include "gmvq/autodiff.hpp"
#include "gmvq/model.hpp"
#include "gmvq/posterior.hpp"
#include "gmvq/rng.hpp"
#include "gmvq/sampling.hpp"

namespace gmvq {

// Entropies and KL divergences are in nats throughout; perplexity alone is
// base 2 (2^H). Probabilities are clamped at 1e-12 before taking logs, with
// 0*log(0) = 0.

/// Mini-batch aggregated posterior: columnwise mean of the BxC posterior
/// rows, as a 1xC node.
Var aggregate_posterior(const Var& pi);

/// KL(q || uniform over C) = sum_c q_c log(C q_c) = log C - H(q), in nats.
Var kl_to_uniform(const Var& q);
double kl_to_uniform_value(const Mat& q);

/// mean_x H(q(c|x)) - H(mean_x q(c|x)), in nats; non-positive by concavity.
Var mutual_info_entropy_loss(const Var& pi);

/// 2 raised to the base-2 entropy of q: effective number of codes in use.
double perplexity(const Mat& q);

double entropy_nats(const Mat& q);

/// The sampled randomness of one training step, kept explicit so tests can
/// pin it (common random numbers) and so the step is a deterministic
/// function of (parameters, batch, noise).
struct LatentNoise {
  Mat gumbel;  // BxC
  Mat eps;     // BxL
};
LatentNoise draw_latent_noise(Index B, Index C, Index L, Rng& rng);

struct GmvqLossOptions {
  double beta = 1.0;
  double gamma = 0.1;
  double sigma_z2 = 1.0;  // scalar variance of the generative latent
  double tau = 1.0;       // Gumbel-Softmax temperature
  bool hard = true;       // straight-through one-hot vs soft relaxation
};

/// total = recon + gamma * (latent_reg + beta * kl), all batch means:
///   recon      = mean_b ||x_b - decoder(z_b)||^2
///   latent_reg = mean_b ||z_b - mu_{c_b}||^2, c_b the sampled component
///   kl         = KL(aggregated posterior || uniform)
struct LossBreakdown {
  Var recon;
  Var latent_reg;
  Var kl;
  Var total;
  PosteriorBundle posterior;
  Var q_batch;               // 1xC aggregated posterior
  Var z;                     // BxL latents fed to the decoder
  Var xtilde;                // BxD reconstruction
  std::vector<Index> component;

  double recon_value() const { return recon.value()(0, 0); }
  double latent_reg_value() const { return latent_reg.value()(0, 0); }
  double kl_value() const { return kl.value()(0, 0); }
  double total_value() const { return total.value()(0, 0); }
};

LossBreakdown gmvq_loss(const Mat& x, const ModelVars& mv, const GmvqLossOptions& opt,
                        const LatentNoise& noise);
LossBreakdown gmvq_loss(const Mat& x, const ModelVars& mv, const GmvqLossOptions& opt, Rng& rng);

/// Deterministic VQ-VAE objective:
///   recon(via STE) + ||zhat - sg[z_c]||^2 + alpha ||sg[zhat] - z_c||^2
/// (sg = stop-gradient), all batch means.
struct VqvaeLossBreakdown {
  Var recon;
  Var commit;         // gradient reaches the encoder only
  Var codebook_term;  // gradient reaches the codebook only
  Var total;
  std::vector<Index> component;
  Mat pi_hard;        // one-hot posterior rows (diagnostics)

  double total_value() const { return total.value()(0, 0); }
};

VqvaeLossBreakdown vqvae_loss(const Mat& x, const ModelVars& mv, const Codebook& cb, double alpha);

/// Uniform-prior variational bound of the stochastic-VQ baseline:
///   mean_b [ -log p(x_b | c_b) ] - mean_b H(q(c|x_b)) + log C
/// with the reconstruction term estimated from one Gumbel sample and
/// -log p(x|c) the full Gaussian negative log-density at variance sigma_x2.
struct StochasticVqOptions {
  double sigma_z2 = 1.0;  // posterior sharpness
  double sigma_x2 = 1.0;  // observation variance
  double tau = 1.0;       // Gumbel-Softmax temperature
};

struct StochasticVqBound {
  Var nll_recon;     // mean_b -log p(x_b | c_b)
  Var neg_entropy;   // mean_b -H(q(c|x_b)), nats
  double log_c;
  Var total;         // nll_recon + neg_entropy + log C
  Var pi;
  Var xtilde;        // BxD reconstruction
  std::vector<Index> component;

  double total_value() const { return total.value()(0, 0); }
};

StochasticVqBound stochastic_vq_bound(const Mat& x, const ModelVars& mv, const StochasticVqOptions& opt,
                                      const Mat& gumbel_noise);

}  // namespace gmvq
