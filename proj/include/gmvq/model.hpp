#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gmvq/array.hpp"
#include "gmvq/autodiff.hpp"
#include "gmvq/codebook.hpp"

namespace gmvq {

enum class QuantizerKind { kGmvq, kVqvaeSte, kStochasticVq };

QuantizerKind parse_quantizer(const std::string& s);
std::string to_string(QuantizerKind k);

struct ModelConfig {
  Index input_dim = 64;      // D
  Index latent_dim = 8;      // L
  Index codebook_size = 32;  // C
  std::vector<Index> encoder_hidden = {128, 64};
  std::vector<Index> decoder_hidden = {64, 128};
  QuantizerKind quantizer = QuantizerKind::kGmvq;

  double beta = 1.0;    // KL weight inside the latent regularizer
  double gamma = 0.1;   // latent regularizer weight
  double alpha = 1.0;   // codebook-term weight of the discretization loss
  double sigma_z2 = 1.0;
  double sigma_x2 = 1.0;

  Index batch_size = 256;
  long epochs = 50;
  double learning_rate = 1e-3;
  double warmup_frac = 0.1;
  double warmup_start_factor = 0.2;
  double weight_decay = 1e-4;
  double tau_start = 2.0;
  double tau_end = 0.1;
  double tau_end_frac = 0.8;
  int kmeans_iters = 10;
  std::uint64_t seed = 1;

  void validate() const;
};

struct DenseLayer {
  Mat W;  // in x out
  Mat b;  // 1 x out
};

/// Plain MLP parameters; relu on every layer except the last.
struct Mlp {
  std::vector<DenseLayer> layers;

  Index input_dim() const { return layers.front().W.rows(); }
  Index output_dim() const { return layers.back().W.cols(); }
};

/// Seeded uniform fan-in initialization: U(-1/sqrt(fan_in), 1/sqrt(fan_in)).
Mlp make_mlp(const std::vector<Index>& dims, std::uint64_t seed);

struct Model {
  ModelConfig config;
  Mlp encoder;  // D -> hidden -> 2L
  Mlp decoder;  // L -> hidden -> D
  Codebook codebook;
};

/// Encoder head is 2L wide (zhat and the raw weights), decoder maps L back
/// to D. Parameters and codebook rows are fully determined by config.seed.
Model build_model(const ModelConfig& cfg);

/// Leaf graph bindings for one training step, in a fixed canonical order
/// (encoder layers W,b; decoder layers W,b; codebook) matching
/// model_parameters().
struct MlpVars {
  std::vector<std::pair<Var, Var>> layers;  // (W, b)
};

struct ModelVars {
  MlpVars encoder;
  MlpVars decoder;
  Var M;
  std::vector<Var> params;  // canonical order
};

ModelVars bind_model(const Model& m);

/// Mutable views over the model's parameter matrices, in the same canonical
/// order as ModelVars::params.
std::vector<Mat*> model_parameters(Model& m);

/// relu on hidden layers, linear output; bias broadcasts across the batch.
Var mlp_forward(const MlpVars& mlp, const Var& x);

/// Value-only forward for bound parameters (weights as constants).
MlpVars bind_mlp_const(const Mlp& mlp);

}  // namespace gmvq
