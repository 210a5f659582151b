#include "gmvq/model.hpp"

#include <cmath>
#include <stdexcept>

#include "gmvq/rng.hpp"

namespace gmvq {

QuantizerKind parse_quantizer(const std::string& s) {
  if (s == "gmvq") return QuantizerKind::kGmvq;
  if (s == "vqvae_ste") return QuantizerKind::kVqvaeSte;
  if (s == "stochastic_vq") return QuantizerKind::kStochasticVq;
  throw std::invalid_argument("gmvq: unknown quantizer kind '" + s +
                              "' (expected gmvq | vqvae_ste | stochastic_vq)");
}

std::string to_string(QuantizerKind k) {
  switch (k) {
    case QuantizerKind::kGmvq: return "gmvq";
    case QuantizerKind::kVqvaeSte: return "vqvae_ste";
    case QuantizerKind::kStochasticVq: return "stochastic_vq";
  }
  return "?";
}

void ModelConfig::validate() const {
  detail::require(input_dim > 0 && latent_dim > 0, "config: dimensions must be positive");
  detail::require(codebook_size >= 2, "config: codebook_size must be >= 2");
  for (Index h : encoder_hidden) detail::require(h > 0, "config: encoder_hidden entries must be positive");
  for (Index h : decoder_hidden) detail::require(h > 0, "config: decoder_hidden entries must be positive");
  detail::require(beta >= 0 && gamma >= 0 && alpha >= 0, "config: beta/gamma/alpha must be >= 0");
  detail::require(sigma_z2 > 0 && sigma_x2 > 0, "config: sigma_z2 and sigma_x2 must be positive");
  detail::require(batch_size > 0, "config: batch_size must be positive");
  detail::require(epochs >= 0, "config: epochs must be >= 0");
  detail::require(learning_rate > 0, "config: learning_rate must be positive");
  detail::require(warmup_frac >= 0 && warmup_frac < 1, "config: warmup_frac must be in [0, 1)");
  detail::require(warmup_start_factor > 0 && warmup_start_factor <= 1,
                  "config: warmup_start_factor must be in (0, 1]");
  detail::require(weight_decay >= 0, "config: weight_decay must be >= 0");
  detail::require(tau_start >= tau_end && tau_end > 0, "config: need tau_start >= tau_end > 0");
  detail::require(tau_end_frac > 0 && tau_end_frac <= 1, "config: tau_end_frac must be in (0, 1]");
  detail::require(kmeans_iters >= 1, "config: kmeans_iters must be >= 1");
}

Mlp make_mlp(const std::vector<Index>& dims, std::uint64_t seed) {
  detail::require(dims.size() >= 2, "make_mlp: need at least input and output dims");
  Rng rng(seed);
  Mlp mlp;
  for (size_t i = 0; i + 1 < dims.size(); ++i) {
    const Index in = dims[i], out = dims[i + 1];
    const double bound = 1.0 / std::sqrt(static_cast<double>(in));
    DenseLayer layer;
    layer.W = draw_uniform(in, out, -bound, bound, rng);
    layer.b = draw_uniform(1, out, -bound, bound, rng);
    mlp.layers.push_back(std::move(layer));
  }
  return mlp;
}

Model build_model(const ModelConfig& cfg) {
  cfg.validate();
  Model m;
  m.config = cfg;

  std::vector<Index> enc_dims = {cfg.input_dim};
  enc_dims.insert(enc_dims.end(), cfg.encoder_hidden.begin(), cfg.encoder_hidden.end());
  enc_dims.push_back(2 * cfg.latent_dim);
  m.encoder = make_mlp(enc_dims, cfg.seed);

  std::vector<Index> dec_dims = {cfg.latent_dim};
  dec_dims.insert(dec_dims.end(), cfg.decoder_hidden.begin(), cfg.decoder_hidden.end());
  dec_dims.push_back(cfg.input_dim);
  m.decoder = make_mlp(dec_dims, cfg.seed + 1);

  Rng rng(cfg.seed + 2);
  const double bound = 1.0 / std::sqrt(static_cast<double>(cfg.latent_dim));
  m.codebook = Codebook(draw_uniform(cfg.codebook_size, cfg.latent_dim, -bound, bound, rng));
  return m;
}

ModelVars bind_model(const Model& m) {
  ModelVars v;
  for (const auto& layer : m.encoder.layers) {
    v.encoder.layers.emplace_back(Var::leaf(layer.W), Var::leaf(layer.b));
    v.params.push_back(v.encoder.layers.back().first);
    v.params.push_back(v.encoder.layers.back().second);
  }
  for (const auto& layer : m.decoder.layers) {
    v.decoder.layers.emplace_back(Var::leaf(layer.W), Var::leaf(layer.b));
    v.params.push_back(v.decoder.layers.back().first);
    v.params.push_back(v.decoder.layers.back().second);
  }
  v.M = Var::leaf(m.codebook.M);
  v.params.push_back(v.M);
  return v;
}

std::vector<Mat*> model_parameters(Model& m) {
  std::vector<Mat*> ps;
  for (auto& layer : m.encoder.layers) {
    ps.push_back(&layer.W);
    ps.push_back(&layer.b);
  }
  for (auto& layer : m.decoder.layers) {
    ps.push_back(&layer.W);
    ps.push_back(&layer.b);
  }
  ps.push_back(&m.codebook.M);
  return ps;
}

Var mlp_forward(const MlpVars& mlp, const Var& x) {
  detail::require(!mlp.layers.empty(), "mlp_forward: empty MLP");
  Var h = x;
  for (size_t i = 0; i < mlp.layers.size(); ++i) {
    h = add(matmul(h, mlp.layers[i].first), mlp.layers[i].second);
    if (i + 1 < mlp.layers.size()) h = relu(h);
  }
  return h;
}

MlpVars bind_mlp_const(const Mlp& mlp) {
  MlpVars v;
  for (const auto& layer : mlp.layers)
    v.layers.emplace_back(Var::constant(layer.W), Var::constant(layer.b));
  return v;
}

}  // namespace gmvq
