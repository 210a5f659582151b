#pragma once

#include <utility>

#include "gmvq/array.hpp"
#include "gmvq/autodiff.hpp"

namespace gmvq {

/// Everything the encoder and codebook jointly say about a batch: proxy
/// latents, positive per-dimension weights, component logits, posterior
/// probabilities and per-component variances. All members are graph nodes
/// over the same forward pass.
struct PosteriorBundle {
  Var zhat;      // BxL
  Var what;      // BxL, strictly positive
  Var logits;    // BxC
  Var log_pi;    // BxC, logits - logsumexp(logits)
  Var pi;        // BxC, rows sum to 1
  Var sigma2_c;  // BxC, non-negative; zero exactly where zhat equals a codeword
};

/// Splits the raw 2L-wide encoder head into the proxy latent zhat and the
/// softplus-activated positive weights what.
std::pair<Var, Var> encoder_heads(const Var& head);

/// Component logits l_c = -1/2 sum_i what_i (zhat_i - mu_{c,i})^2, the
/// per-dimension weighted distance between the proxy latent and each
/// codeword. Differentiable in zhat, what and M.
Var gm_logits(const Var& zhat, const Var& what, const Var& M);

/// Softmax over the component logits.
Var categorical_posterior(const Var& logits);

/// Log-probabilities as logits - logsumexp, which is what the Gumbel
/// sampler consumes (avoids log(softmax) underflow).
Var log_categorical_posterior(const Var& logits);

/// Assignment-uncertainty variance per component:
///   sigma2_c(x) = (||zhat - mu_c||^2 / L) / (2 sigma2)
/// with sigma2 the scalar variance of the generative model.
Var component_variance(const Var& zhat, const Var& M, double sigma2);

/// Baseline posterior: softmax of -||zhat - mu_c||^2 / (2 sigma2).
Var stochastic_vq_posterior(const Var& zhat, const Var& M, double sigma2);

/// Convenience bundle for the full pipeline given the raw encoder head.
PosteriorBundle gm_posterior(const Var& head, const Var& M, double sigma2);

}  // namespace gmvq
