#pragma once

#include <vector>

#include "gmvq/array.hpp"
#include "gmvq/autodiff.hpp"
#include "gmvq/codebook.hpp"
#include "gmvq/rng.hpp"

namespace gmvq {

/// Exponential annealing from tau_start down to tau_end, reaching tau_end
/// at end_frac of total_steps and staying there.
struct TemperatureSchedule {
  double tau_start = 2.0;
  double tau_end = 0.1;
  long total_steps = 1;
  double end_frac = 0.8;

  double operator()(long step) const;
};

/// One tempered-softmax categorical draw per row. `hard` carries the exact
/// one-hot at the argmax in its forward value while its backward treats
/// d(hard)/d(soft) as identity, so gradients flow through the relaxation.
struct GumbelSample {
  Var soft;                  // BxC, rows are valid probability vectors
  Var hard;                  // BxC one-hot rows, straight-through to soft
  std::vector<Index> index;  // argmax per row
};

/// Forward value `hard_value` (one-hot rows at argmax of soft), backward
/// identity into `soft`.
Var straight_through(const Var& soft, const Mat& hard_value);

GumbelSample gumbel_softmax_sample(const Var& log_pi, double tau, const Mat& gumbel_noise);
GumbelSample gumbel_softmax_sample(const Var& log_pi, double tau, Rng& rng);

/// z = c_q^T M + sigma_c * eps, with sigma_c a per-row Bx1 node (gradient
/// flows to M and sigma_c) or a fixed non-negative scalar.
Var reparameterize_z(const Var& c_q, const Var& M, const Var& sigma_c, const Mat& eps);
Var reparameterize_z(const Var& c_q, const Var& M, double sigma_c, const Mat& eps);

/// Deterministic-VQ baseline: forward value is the nearest codeword row per
/// input, backward passes the incoming gradient to zhat unchanged. The
/// codebook receives no gradient through this op.
struct SteResult {
  Var z_c;                   // BxL
  std::vector<Index> index;  // nearest codeword per row
};
SteResult ste_quantize(const Var& zhat, const Codebook& cb);

/// One-hot rows at the per-row argmax (ties to the lowest index).
Mat onehot_rows(const Mat& values, std::vector<Index>* index_out = nullptr);

}  // namespace gmvq
