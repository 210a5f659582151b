#include "gmvq/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>

#include "gmvq/autodiff.hpp"
#include "gmvq/binio.hpp"
#include "gmvq/rng.hpp"

namespace gmvq {

Dataset make_synthetic_dataset(Index K, Index D, Index N, double spread, std::uint64_t seed) {
  detail::require(K >= 2, "make_synthetic_dataset: K must be >= 2");
  detail::require(N >= K, "make_synthetic_dataset: N must be >= K");
  detail::require(D >= 1, "make_synthetic_dataset: D must be >= 1");
  detail::require(spread >= 0, "make_synthetic_dataset: spread must be >= 0");

  Rng rng(seed);
  Mat means(K, D);
  for (Index k = 0; k < K; ++k) {
    Mat v = draw_normal(1, D, rng);
    const double n = v.norm();
    if (n > 0) v /= n;
    means.row(k) = v.row(0);
  }

  // Exactly uniform mixture weights: balanced assignment, then shuffled.
  std::vector<std::uint32_t> labels(static_cast<size_t>(N));
  for (Index i = 0; i < N; ++i) labels[static_cast<size_t>(i)] = static_cast<std::uint32_t>(i % K);
  std::shuffle(labels.begin(), labels.end(), rng);

  Dataset ds;
  ds.X.resize(N, D);
  for (Index i = 0; i < N; ++i)
    ds.X.row(i) = means.row(labels[static_cast<size_t>(i)]) + spread * draw_normal(1, D, rng).row(0);
  ds.labels = std::move(labels);
  return ds;
}

void write_dataset(const std::string& path, const Dataset& ds) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("gmvq: cannot open '" + path + "' for writing");
  write_u32(os, static_cast<std::uint32_t>(ds.size()));
  write_u32(os, static_cast<std::uint32_t>(ds.dim()));
  write_f32_block(os, ds.X);
  if (!ds.labels.empty()) {
    detail::require(static_cast<Index>(ds.labels.size()) == ds.size(),
                    "write_dataset: label count does not match N");
    os.write(reinterpret_cast<const char*>(ds.labels.data()),
             static_cast<std::streamsize>(sizeof(std::uint32_t) * ds.labels.size()));
  }
  if (!os) throw std::runtime_error("gmvq: failed writing '" + path + "'");
}

Dataset read_dataset(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("gmvq: cannot open '" + path + "'");
  const Index N = read_u32(is, "dataset N");
  const Index D = read_u32(is, "dataset D");
  Dataset ds;
  ds.X = read_f32_block(is, N, D, "dataset values");
  // Optional trailing label block.
  is.peek();
  if (!is.eof()) {
    ds.labels.resize(static_cast<size_t>(N));
    is.read(reinterpret_cast<char*>(ds.labels.data()),
            static_cast<std::streamsize>(sizeof(std::uint32_t) * ds.labels.size()));
    if (!is) throw std::runtime_error("gmvq: truncated label block in '" + path + "'");
    is.peek();
    if (!is.eof()) throw std::runtime_error("gmvq: trailing bytes after label block in '" + path + "'");
  }
  return ds;
}

}  // namespace gmvq
