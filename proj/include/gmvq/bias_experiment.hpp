#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "gmvq/array.hpp"
#include "gmvq/model.hpp"
#include "gmvq/rng.hpp"
#include "gmvq/stats.hpp"

namespace gmvq {

// Quantifies the gradient-estimation bias of straight-through
// Gumbel-Softmax as a function of the entropy of the categorical input
// distribution. A fixed random logit vector is tempered to sweep entropy;
// a small scorer MLP maps one-hot actions to a scalar; the exact gradient
// of E_{c~p}[f(e_c)] (full enumeration) is compared against the averaged
// straight-through estimate.

/// Scorer MLP mapping a one-hot in R^C to a scalar; relu hidden layers.
Mlp make_scorer(Index n_actions, const std::vector<Index>& hidden, std::uint64_t seed);

/// Gradient of E_{c ~ softmax(logits)}[f(e_c)] with respect to the logits,
/// exact by enumeration of all C actions:
///   d/dlogit_k = p_k (f(e_k) - E[f]).
Mat exact_gradient(const Mat& logits, const Mlp& scorer);

/// Mean over `repeats` draws of the straight-through Gumbel-Softmax
/// gradient of f with respect to the logits, at estimator temperature tau.
Mat gumbel_estimate(const Mat& logits, const Mlp& scorer, double tau, int repeats, Rng& rng);

/// Mean over `repeats` draws of ||single straight-through estimate - exact||,
/// the per-step gradient-estimation error (systematic deviation plus
/// sampling noise together).
double gumbel_estimate_error(const Mat& logits, const Mlp& scorer, const Mat& exact, double tau,
                             int repeats, Rng& rng);

struct BiasSample {
  double tau_softmax = 0;    // temperature applied to the fixed base logits
  double entropy_nats = 0;   // entropy of the resulting distribution
  /// Mean single-estimate error norm, normalized by the RMS of the exact
  /// gradient norms across the scorer's sweep (scale-free per scorer).
  double bias = 0;
  std::uint64_t seed = 0;    // scorer seed
};

struct BiasSweepConfig {
  Index n_actions = 10;
  std::vector<Index> hidden = {50, 5};
  int grid_points = 12;
  int repeats = 50;
  int scorer_seeds = 20;
  double estimator_tau = 0.5;
  double entropy_lo_frac = 0.1;   // grid spans (lo, hi) * log C
  double entropy_hi_frac = 0.95;
  std::uint64_t master_seed = 0;
};

struct BiasSweepResult {
  std::vector<BiasSample> samples;  // one per (grid point, scorer seed)
  /// Pearson over (entropy, bias) with the bias standardized within each
  /// scorer seed, so the common trend is measured rather than the
  /// scorer-to-scorer error level.
  Correlation corr;
  Mat base_logits;                  // the fixed unnormalized logits
  BiasSweepConfig config;
};

/// Entropy grid is built by solving the softmax temperature for evenly
/// spaced entropy targets; per grid point the bias is recorded for each
/// scorer seed. Errors if the requested grid is degenerate.
BiasSweepResult run_bias_sweep(const BiasSweepConfig& cfg);

/// CSV rows entropy,bias,tau,seed with '#' metadata lines up front, then a
/// pearson_rho,p_value summary section.
void write_bias_csv(std::ostream& os, const BiasSweepResult& res);

}  // namespace gmvq
