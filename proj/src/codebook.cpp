#include "gmvq/codebook.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "gmvq/binio.hpp"
#include "gmvq/rng.hpp"

namespace gmvq {

namespace {

constexpr std::uint32_t kCodebookFormatVersion = 1;

Index nearest_row(const Mat& rows, const Eigen::RowVectorXd& p) {
  Index best = 0;
  double bestd = std::numeric_limits<double>::infinity();
  for (Index c = 0; c < rows.rows(); ++c) {
    const double d = (rows.row(c) - p).squaredNorm();
    if (d < bestd) {
      bestd = d;
      best = c;
    }
  }
  return best;
}

}  // namespace

Codebook::Codebook(Mat m) : M(std::move(m)) {
  detail::require(M.rows() >= 2, "Codebook needs at least 2 codes, got " + std::to_string(M.rows()));
  check_finite("Codebook", M);
}

KmeansResult kmeans_init(const Mat& latents, Index C, int iters, std::uint64_t seed) {
  const Index N = latents.rows();
  const Index L = latents.cols();
  detail::require(C >= 2, "kmeans_init: C must be >= 2");
  detail::require(iters >= 1, "kmeans_init: iters must be >= 1");
  detail::require(N >= C, "kmeans_init: need at least C points, got " + std::to_string(N));
  check_finite("kmeans_init input", latents);

  Rng rng(seed);

  // Degenerate input: every point identical. Jitter around the common point.
  bool all_same = true;
  for (Index i = 1; i < N && all_same; ++i) all_same = (latents.row(i) == latents.row(0));
  if (all_same) {
    Mat M = latents.row(0).replicate(C, 1) + 1e-4 * draw_normal(C, L, rng);
    KmeansResult res;
    res.codebook = Codebook(std::move(M));
    res.inertia.assign(static_cast<size_t>(iters), N * (res.codebook.M.row(0) - latents.row(0)).squaredNorm());
    return res;
  }

  // k-means++ seeding: first centroid uniform, then squared-distance
  // weighted draws.
  Mat M(C, L);
  std::uniform_int_distribution<Index> uidx(0, N - 1);
  M.row(0) = latents.row(uidx(rng));
  Eigen::VectorXd d2(N);
  for (Index i = 0; i < N; ++i) d2(i) = (latents.row(i) - M.row(0)).squaredNorm();
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (Index k = 1; k < C; ++k) {
    const double total = d2.sum();
    Index pick;
    if (total > 0) {
      double target = unit(rng) * total;
      pick = N - 1;
      double acc = 0;
      for (Index i = 0; i < N; ++i) {
        acc += d2(i);
        if (acc >= target) {
          pick = i;
          break;
        }
      }
    } else {
      // Fewer distinct points than centroids left to place.
      pick = uidx(rng);
    }
    M.row(k) = latents.row(pick);
    for (Index i = 0; i < N; ++i) d2(i) = std::min(d2(i), (latents.row(i) - M.row(k)).squaredNorm());
  }

  KmeansResult res;
  std::vector<Index> assign(static_cast<size_t>(N));
  for (int it = 0; it < iters; ++it) {
    double inertia = 0;
    for (Index i = 0; i < N; ++i) {
      const Index a = nearest_row(M, latents.row(i));
      assign[static_cast<size_t>(i)] = a;
      inertia += (latents.row(i) - M.row(a)).squaredNorm();
    }
    res.inertia.push_back(inertia);

    Mat sums = Mat::Zero(C, L);
    Eigen::VectorXd counts = Eigen::VectorXd::Zero(C);
    for (Index i = 0; i < N; ++i) {
      sums.row(assign[static_cast<size_t>(i)]) += latents.row(i);
      counts(assign[static_cast<size_t>(i)]) += 1;
    }
    for (Index c = 0; c < C; ++c) {
      if (counts(c) > 0) {
        M.row(c) = sums.row(c) / counts(c);
      } else {
        // Re-seed at the point farthest from its assigned centroid.
        Index far = 0;
        double fard = -1;
        for (Index i = 0; i < N; ++i) {
          const double d = (latents.row(i) - M.row(assign[static_cast<size_t>(i)])).squaredNorm();
          if (d > fard) {
            fard = d;
            far = i;
          }
        }
        M.row(c) = latents.row(far);
        ++res.reseeds;
      }
    }
  }

  // Duplicate centroids can survive when the data had fewer distinct points
  // than C; nudge them apart so every row is usable.
  for (Index c = 1; c < C; ++c) {
    for (Index prev = 0; prev < c; ++prev) {
      if (M.row(c) == M.row(prev)) {
        M.row(c) += 1e-4 * draw_normal(1, L, rng).row(0);
        ++res.reseeds;
        break;
      }
    }
  }

  res.codebook = Codebook(std::move(M));
  return res;
}

Index nearest(const Mat& zhat, const Codebook& cb) {
  detail::require(zhat.rows() == 1 && zhat.cols() == cb.latent_dim(),
                  "nearest: query must be 1x" + std::to_string(cb.latent_dim()) + ", got " + shape_str(zhat));
  check_finite("nearest input", zhat);
  return nearest_row(cb.M, zhat.row(0));
}

Var lookup(const Var& M, const Mat& onehot) {
  detail::require(onehot.rows() == 1 && onehot.cols() == M.rows(),
                  "lookup: query must be 1x" + std::to_string(M.rows()) + ", got " + shape_str(onehot));
  int ones = 0;
  for (Index c = 0; c < onehot.cols(); ++c) {
    if (onehot(0, c) == 1.0)
      ++ones;
    else if (onehot(0, c) != 0.0)
      throw std::invalid_argument("gmvq: lookup requires an exact one-hot query");
  }
  if (ones != 1) throw std::invalid_argument("gmvq: lookup requires an exact one-hot query");
  return matmul(Var::constant(onehot), M);
}

void write_codebook_section(std::ostream& os, const Codebook& cb) {
  write_magic(os);
  write_u32(os, kCodebookFormatVersion);
  write_u32(os, static_cast<std::uint32_t>(cb.num_codes()));
  write_u32(os, static_cast<std::uint32_t>(cb.latent_dim()));
  write_f32_block(os, cb.M);
}

Codebook read_codebook_section(std::istream& is) {
  read_magic(is, "codebook section");
  const std::uint32_t version = read_u32(is, "codebook version");
  if (version != kCodebookFormatVersion)
    throw std::runtime_error("gmvq: unsupported codebook format version " + std::to_string(version));
  const Index C = read_u32(is, "codebook C");
  const Index L = read_u32(is, "codebook L");
  return Codebook(read_f32_block(is, C, L, "codebook values"));
}

}  // namespace gmvq
