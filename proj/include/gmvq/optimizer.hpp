#pragma once

#include <vector>

#include "gmvq/array.hpp"

namespace gmvq {

/// Cosine decay to zero with linear warmup from start_factor * peak.
struct LrSchedule {
  double peak = 1e-3;
  long total_steps = 1;
  double warmup_frac = 0.1;
  double start_factor = 0.2;

  double operator()(long step) const;
};

/// Adam with decoupled weight decay; the decay applies equally to every
/// parameter handed in (network weights and codebook alike).
class AdamW {
 public:
  AdamW(double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8, double weight_decay = 0.0)
      : beta1_(beta1), beta2_(beta2), eps_(eps), weight_decay_(weight_decay) {}

  /// Applies one update. `params` and `grads` must be index-aligned and keep
  /// the same shapes across calls; state is allocated lazily on first use.
  void step(const std::vector<Mat*>& params, const std::vector<Mat>& grads, double lr);

  long t() const { return t_; }

 private:
  double beta1_, beta2_, eps_, weight_decay_;
  long t_ = 0;
  std::vector<Mat> m_, v_;
};

}  // namespace gmvq
