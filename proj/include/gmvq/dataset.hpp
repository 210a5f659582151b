#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gmvq/array.hpp"

namespace gmvq {

struct Dataset {
  Mat X;  // NxD
  std::vector<std::uint32_t> labels;  // optional ground-truth components; empty when absent

  Index size() const { return X.rows(); }
  Index dim() const { return X.cols(); }
};

/// N samples from a K-component isotropic Gaussian mixture in R^D. Means
/// are drawn uniformly on the unit sphere (seeded); assignments are exactly
/// balanced across the K components and shuffled; ground-truth labels are
/// retained.
Dataset make_synthetic_dataset(Index K, Index D, Index N, double spread, std::uint64_t seed);

/// File format: N u32, D u32, N*D little-endian f32 row-major, then an
/// optional label block of N u32 values.
void write_dataset(const std::string& path, const Dataset& ds);
Dataset read_dataset(const std::string& path);

}  // namespace gmvq
