#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "gmvq/dataset.hpp"
#include "gmvq/losses.hpp"
#include "gmvq/model.hpp"

namespace gmvq {

struct MetricsRecord {
  long epoch = 0;
  long step = 0;       // global step count at the end of the epoch
  double mse = 0;      // pixel-wise (per element) mean squared error
  double perplexity = 0;
  double kl = 0;
  double latent_reg = 0;
  double tau = 0;
  double lr = 0;
};

struct TrainResult {
  Model model;
  std::vector<MetricsRecord> history;
  bool diverged = false;
  std::string divergence_message;
};

/// Full training loop: k-means codebook init from the encoder outputs of
/// the first batch, then AdamW over the configured loss with cosine-decayed
/// learning rate (linear warmup) and per-step temperature annealing. One
/// MetricsRecord per epoch. On divergence (non-finite loss) the model rolls
/// back to the last epoch boundary and `diverged` is set.
TrainResult train(const ModelConfig& cfg, const Dataset& data);

struct EvalResult {
  double mse = 0;
  double perplexity = 0;
};

/// Deterministic pass: component by argmax of the posterior, z = mu_c with
/// no noise; MSE is per element; perplexity of the batch-aggregated
/// posterior, computed per batch and then averaged. Mutates nothing.
EvalResult evaluate(const Model& m, const Dataset& data);

/// CSV with header epoch,step,mse,perplexity,kl,latent_reg,tau,lr.
void write_metrics_csv(std::ostream& os, const std::vector<MetricsRecord>& history);
void write_metrics_csv(const std::string& path, const std::vector<MetricsRecord>& history);

}  // namespace gmvq
