#pragma once

#include <string>

#include "gmvq/model.hpp"

namespace gmvq {

/// Layout: "GMVQ" magic, format version u32, config echo (u32 byte length +
/// key=value text), codebook section, then encoder and decoder parameter
/// blocks (layer count u32; per tensor: rows u32, cols u32, row-major f32).
/// Written atomically (temp file + rename).
void save_checkpoint(const std::string& path, const Model& m);
Model load_checkpoint(const std::string& path);

}  // namespace gmvq
