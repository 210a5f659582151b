#include "gmvq/config.hpp"

#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

namespace gmvq {

namespace {

std::string trim(const std::string& s) {
  size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

long parse_long(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    const long x = std::stol(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("config: bad integer for '" + key + "': " + v);
  }
}

std::uint64_t parse_u64(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    const unsigned long long x = std::stoull(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("config: bad unsigned integer for '" + key + "': " + v);
  }
}

double parse_double(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    const double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("config: bad number for '" + key + "': " + v);
  }
}

std::vector<Index> parse_dims(const std::string& key, const std::string& v) {
  std::vector<Index> dims;
  if (v == "none") return dims;  // no hidden layers
  std::stringstream ss(v);
  std::string part;
  while (std::getline(ss, part, ',')) dims.push_back(parse_long(key, trim(part)));
  return dims;
}

std::string dims_to_string(const std::vector<Index>& dims) {
  if (dims.empty()) return "none";
  std::string s;
  for (size_t i = 0; i < dims.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(dims[i]);
  }
  return s;
}

std::string fmt_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

ModelConfig parse_config(const std::string& text) {
  ModelConfig cfg;
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config: line " + std::to_string(lineno) + " is not 'key = value': " + line);
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (val.empty()) throw ConfigError("config: empty value for '" + key + "'");

    if (key == "input_dim") cfg.input_dim = parse_long(key, val);
    else if (key == "latent_dim") cfg.latent_dim = parse_long(key, val);
    else if (key == "codebook_size") cfg.codebook_size = parse_long(key, val);
    else if (key == "encoder_hidden") cfg.encoder_hidden = parse_dims(key, val);
    else if (key == "decoder_hidden") cfg.decoder_hidden = parse_dims(key, val);
    else if (key == "quantizer") {
      try {
        cfg.quantizer = parse_quantizer(val);
      } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
      }
    }
    else if (key == "beta") cfg.beta = parse_double(key, val);
    else if (key == "gamma") cfg.gamma = parse_double(key, val);
    else if (key == "alpha") cfg.alpha = parse_double(key, val);
    else if (key == "sigma_z2") cfg.sigma_z2 = parse_double(key, val);
    else if (key == "sigma_x2") cfg.sigma_x2 = parse_double(key, val);
    else if (key == "batch_size") cfg.batch_size = parse_long(key, val);
    else if (key == "epochs") cfg.epochs = parse_long(key, val);
    else if (key == "learning_rate") cfg.learning_rate = parse_double(key, val);
    else if (key == "warmup_frac") cfg.warmup_frac = parse_double(key, val);
    else if (key == "warmup_start_factor") cfg.warmup_start_factor = parse_double(key, val);
    else if (key == "weight_decay") cfg.weight_decay = parse_double(key, val);
    else if (key == "tau_start") cfg.tau_start = parse_double(key, val);
    else if (key == "tau_end") cfg.tau_end = parse_double(key, val);
    else if (key == "tau_end_frac") cfg.tau_end_frac = parse_double(key, val);
    else if (key == "kmeans_iters") cfg.kmeans_iters = static_cast<int>(parse_long(key, val));
    else if (key == "seed") cfg.seed = parse_u64(key, val);
    else throw ConfigError("config: unknown key '" + key + "'");
  }
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return cfg;
}

ModelConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string serialize_config(const ModelConfig& cfg) {
  std::string s;
  s += "input_dim = " + std::to_string(cfg.input_dim) + "\n";
  s += "latent_dim = " + std::to_string(cfg.latent_dim) + "\n";
  s += "codebook_size = " + std::to_string(cfg.codebook_size) + "\n";
  s += "encoder_hidden = " + dims_to_string(cfg.encoder_hidden) + "\n";
  s += "decoder_hidden = " + dims_to_string(cfg.decoder_hidden) + "\n";
  s += "quantizer = " + to_string(cfg.quantizer) + "\n";
  s += "beta = " + fmt_double(cfg.beta) + "\n";
  s += "gamma = " + fmt_double(cfg.gamma) + "\n";
  s += "alpha = " + fmt_double(cfg.alpha) + "\n";
  s += "sigma_z2 = " + fmt_double(cfg.sigma_z2) + "\n";
  s += "sigma_x2 = " + fmt_double(cfg.sigma_x2) + "\n";
  s += "batch_size = " + std::to_string(cfg.batch_size) + "\n";
  s += "epochs = " + std::to_string(cfg.epochs) + "\n";
  s += "learning_rate = " + fmt_double(cfg.learning_rate) + "\n";
  s += "warmup_frac = " + fmt_double(cfg.warmup_frac) + "\n";
  s += "warmup_start_factor = " + fmt_double(cfg.warmup_start_factor) + "\n";
  s += "weight_decay = " + fmt_double(cfg.weight_decay) + "\n";
  s += "tau_start = " + fmt_double(cfg.tau_start) + "\n";
  s += "tau_end = " + fmt_double(cfg.tau_end) + "\n";
  s += "tau_end_frac = " + fmt_double(cfg.tau_end_frac) + "\n";
  s += "kmeans_iters = " + std::to_string(cfg.kmeans_iters) + "\n";
  s += "seed = " + std::to_string(cfg.seed) + "\n";
  return s;
}

}  // namespace gmvq
