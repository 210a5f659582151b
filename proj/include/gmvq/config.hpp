#pragma once

#include <stdexcept>
#include <string>

#include "gmvq/model.hpp"

namespace gmvq {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Parses the flat key=value config format ('#' comments, blank lines
/// ignored). Unknown keys are errors. Keys not present keep their defaults.
ModelConfig parse_config(const std::string& text);
ModelConfig load_config(const std::string& path);

/// Canonical text form, parseable by parse_config; used for the config echo
/// inside checkpoints.
std::string serialize_config(const ModelConfig& cfg);

}  // namespace gmvq
