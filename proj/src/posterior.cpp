#include "gmvq/posterior.hpp"

namespace gmvq {

std::pair<Var, Var> encoder_heads(const Var& head) {
  detail::require(head.cols() % 2 == 0,
                  "encoder_heads: head width must be 2L, got " + shape_str(head.value()));
  const Index L = head.cols() / 2;
  Var zhat = slice_cols(head, 0, L);
  Var what = softplus(slice_cols(head, L, L));
  return {zhat, what};
}

Var gm_logits(const Var& zhat, const Var& what, const Var& M) {
  return scale(pairwise_weighted_sqdist(zhat, what, M), -0.5);
}

Var categorical_posterior(const Var& logits) { return softmax_lastdim(logits); }

Var log_categorical_posterior(const Var& logits) { return log_softmax_lastdim(logits); }

Var component_variance(const Var& zhat, const Var& M, double sigma2) {
  detail::require(sigma2 > 0, "component_variance: sigma2 must be positive");
  const double L = static_cast<double>(zhat.cols());
  return scale(pairwise_sqdist(zhat, M), 1.0 / (L * 2.0 * sigma2));
}

Var stochastic_vq_posterior(const Var& zhat, const Var& M, double sigma2) {
  detail::require(sigma2 > 0, "stochastic_vq_posterior: sigma2 must be positive");
  return softmax_lastdim(scale(pairwise_sqdist(zhat, M), -1.0 / (2.0 * sigma2)));
}

PosteriorBundle gm_posterior(const Var& head, const Var& M, double sigma2) {
  PosteriorBundle b;
  auto [zhat, what] = encoder_heads(head);
  b.zhat = zhat;
  b.what = what;
  b.logits = gm_logits(b.zhat, b.what, M);
  b.pi = categorical_posterior(b.logits);
  b.log_pi = log_categorical_posterior(b.logits);
  b.sigma2_c = component_variance(b.zhat, M, sigma2);
  return b;
}

}  // namespace gmvq
