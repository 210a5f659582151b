#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "gmvq/array.hpp"
#include "gmvq/autodiff.hpp"

namespace gmvq {

/// The shared mean matrix M (CxL). Rows are the component means; the same
/// matrix parameterizes both the categorical posterior and the latent
/// sampling path, so it is bound as a trainable leaf of the diff graph.
struct Codebook {
  Mat M;

  Codebook() = default;
  explicit Codebook(Mat m);

  Index num_codes() const { return M.rows(); }
  Index latent_dim() const { return M.cols(); }
};

struct KmeansResult {
  Codebook codebook;
  /// Summed squared distance to the assigned centroid, recorded after each
  /// assignment step; non-increasing across Lloyd iterations as long as no
  /// empty-cluster reseed happened.
  std::vector<double> inertia;
  int reseeds = 0;
};

/// k-means++ seeding followed by `iters` Lloyd iterations, fully determined
/// by `seed`. Empty clusters are re-seeded at the point farthest from its
/// assigned centroid. Degenerate data (all points identical, or fewer
/// distinct points than C) gets 1e-4 jitter on the surplus centroids.
KmeansResult kmeans_init(const Mat& latents, Index C, int iters, std::uint64_t seed);

/// Index of the codeword nearest to zhat (1xL); ties resolve to the lowest
/// index.
Index nearest(const Mat& zhat, const Codebook& cb);

/// Row selection by an exact one-hot query, as a graph node: gradient flows
/// into the selected row of M.
Var lookup(const Var& M, const Mat& onehot);

/// Checkpoint section: "GMVQ" magic, format version, C, L, then C*L
/// little-endian 32-bit floats row-major.
void write_codebook_section(std::ostream& os, const Codebook& cb);
Codebook read_codebook_section(std::istream& is);

}  // namespace gmvq
