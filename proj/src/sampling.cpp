#include "gmvq/sampling.hpp"

#include <cmath>

namespace gmvq {

double TemperatureSchedule::operator()(long step) const {
  detail::require(step >= 0, "temperature: step must be >= 0");
  const double knee = end_frac * static_cast<double>(total_steps);
  if (knee <= 0 || static_cast<double>(step) >= knee) return tau_end;
  const double rate = std::log(tau_start / tau_end) / knee;
  return std::max(tau_end, tau_start * std::exp(-rate * static_cast<double>(step)));
}

Mat onehot_rows(const Mat& values, std::vector<Index>* index_out) {
  Mat hard = Mat::Zero(values.rows(), values.cols());
  if (index_out) index_out->clear();
  for (Index b = 0; b < values.rows(); ++b) {
    Index arg = 0;
    for (Index c = 1; c < values.cols(); ++c)
      if (values(b, c) > values(b, arg)) arg = c;
    hard(b, arg) = 1.0;
    if (index_out) index_out->push_back(arg);
  }
  return hard;
}

Var straight_through(const Var& soft, const Mat& hard_value) {
  detail::require(hard_value.rows() == soft.rows() && hard_value.cols() == soft.cols(),
                  "straight_through: shape mismatch");
  return Var::make("straight_through", hard_value, {soft},
                   [soft](const Mat& g) { soft.accumulate(g); });
}

GumbelSample gumbel_softmax_sample(const Var& log_pi, double tau, const Mat& gumbel_noise) {
  detail::require(tau > 0, "gumbel_softmax_sample: tau must be positive");
  detail::require(gumbel_noise.rows() == log_pi.rows() && gumbel_noise.cols() == log_pi.cols(),
                  "gumbel_softmax_sample: noise shape mismatch");
  check_finite("gumbel_softmax_sample log_pi", log_pi.value());

  GumbelSample s;
  Var perturbed = scale(add(log_pi, Var::constant(gumbel_noise)), 1.0 / tau);
  s.soft = softmax_lastdim(perturbed);
  Mat hard = onehot_rows(s.soft.value(), &s.index);
  s.hard = straight_through(s.soft, hard);
  return s;
}

GumbelSample gumbel_softmax_sample(const Var& log_pi, double tau, Rng& rng) {
  return gumbel_softmax_sample(log_pi, tau, draw_gumbel(log_pi.rows(), log_pi.cols(), rng));
}

Var reparameterize_z(const Var& c_q, const Var& M, const Var& sigma_c, const Mat& eps) {
  detail::require(eps.rows() == c_q.rows() && eps.cols() == M.cols(),
                  "reparameterize_z: eps must be BxL, got " + shape_str(eps));
  detail::require(sigma_c.rows() == c_q.rows() && sigma_c.cols() == 1,
                  "reparameterize_z: sigma_c must be Bx1");
  detail::require((sigma_c.value().array() >= 0).all(), "reparameterize_z: negative sigma_c");
  return add(matmul(c_q, M), mul(sigma_c, Var::constant(eps)));
}

Var reparameterize_z(const Var& c_q, const Var& M, double sigma_c, const Mat& eps) {
  detail::require(sigma_c >= 0, "reparameterize_z: negative sigma_c");
  Mat s = Mat::Constant(c_q.rows(), 1, sigma_c);
  return add(matmul(c_q, M), mul(Var::constant(s), Var::constant(eps)));
}

SteResult ste_quantize(const Var& zhat, const Codebook& cb) {
  detail::require(zhat.cols() == cb.latent_dim(), "ste_quantize: latent dimensionality mismatch");
  SteResult r;
  Mat zc(zhat.rows(), cb.latent_dim());
  for (Index b = 0; b < zhat.rows(); ++b) {
    const Index j = nearest(Mat(zhat.value().row(b)), cb);
    r.index.push_back(j);
    zc.row(b) = cb.M.row(j);
  }
  r.z_c = Var::make("ste_quantize", std::move(zc), {zhat},
                    [zhat](const Mat& g) { zhat.accumulate(g); });
  return r;
}

}  // namespace gmvq
