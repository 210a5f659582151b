#include "gmvq/optimizer.hpp"

#include <cmath>
#include <stdexcept>

#include "gmvq/autodiff.hpp"

namespace gmvq {

double LrSchedule::operator()(long step) const {
  if (step >= total_steps) return 0.0;
  const long warmup = std::lround(warmup_frac * static_cast<double>(total_steps));
  if (warmup > 0 && step < warmup) {
    const double t = static_cast<double>(step) / static_cast<double>(warmup);
    return peak * (start_factor + (1.0 - start_factor) * t);
  }
  const double span = static_cast<double>(total_steps - warmup);
  if (span <= 0) return peak;
  const double progress = static_cast<double>(step - warmup) / span;
  return peak * 0.5 * (1.0 + std::cos(M_PI * progress));
}

void AdamW::step(const std::vector<Mat*>& params, const std::vector<Mat>& grads, double lr) {
  detail::require(params.size() == grads.size(), "AdamW: params/grads size mismatch");
  if (m_.empty()) {
    for (const Mat* p : params) {
      m_.push_back(Mat::Zero(p->rows(), p->cols()));
      v_.push_back(Mat::Zero(p->rows(), p->cols()));
    }
  }
  detail::require(m_.size() == params.size(), "AdamW: parameter count changed between steps");
  ++t_;
  const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (size_t i = 0; i < params.size(); ++i) {
    Mat& p = *params[i];
    const Mat& g = grads[i];
    detail::require(g.rows() == p.rows() && g.cols() == p.cols(), "AdamW: gradient shape mismatch");
    m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * g;
    v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * g.cwiseProduct(g);
    const Mat mhat = m_[i] / bc1;
    const Mat vhat = v_[i] / bc2;
    p -= lr * (mhat.array() / (vhat.array().sqrt() + eps_) + weight_decay_ * p.array()).matrix();
  }
}

}  // namespace gmvq
