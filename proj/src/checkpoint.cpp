#include "gmvq/checkpoint.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "gmvq/binio.hpp"
#include "gmvq/config.hpp"

namespace gmvq {

namespace {

constexpr std::uint32_t kCheckpointFormatVersion = 1;

void write_tensor(std::ostream& os, const Mat& m) {
  write_u32(os, static_cast<std::uint32_t>(m.rows()));
  write_u32(os, static_cast<std::uint32_t>(m.cols()));
  write_f32_block(os, m);
}

Mat read_tensor(std::istream& is, const char* what) {
  const Index rows = read_u32(is, what);
  const Index cols = read_u32(is, what);
  return read_f32_block(is, rows, cols, what);
}

void write_mlp(std::ostream& os, const Mlp& mlp) {
  write_u32(os, static_cast<std::uint32_t>(mlp.layers.size()));
  for (const auto& layer : mlp.layers) {
    write_tensor(os, layer.W);
    write_tensor(os, layer.b);
  }
}

Mlp read_mlp(std::istream& is, const char* what) {
  const std::uint32_t n = read_u32(is, what);
  Mlp mlp;
  for (std::uint32_t i = 0; i < n; ++i) {
    DenseLayer layer;
    layer.W = read_tensor(is, what);
    layer.b = read_tensor(is, what);
    mlp.layers.push_back(std::move(layer));
  }
  return mlp;
}

}  // namespace

void save_checkpoint(const std::string& path, const Model& m) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("gmvq: cannot open '" + tmp + "' for writing");
    write_magic(os);
    write_u32(os, kCheckpointFormatVersion);
    const std::string cfg = serialize_config(m.config);
    write_u32(os, static_cast<std::uint32_t>(cfg.size()));
    os.write(cfg.data(), static_cast<std::streamsize>(cfg.size()));
    write_codebook_section(os, m.codebook);
    write_mlp(os, m.encoder);
    write_mlp(os, m.decoder);
    if (!os) throw std::runtime_error("gmvq: failed writing '" + tmp + "'");
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw std::runtime_error("gmvq: cannot rename '" + tmp + "' to '" + path + "'");
}

Model load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("gmvq: cannot open '" + path + "'");
  read_magic(is, "checkpoint");
  const std::uint32_t version = read_u32(is, "checkpoint version");
  if (version != kCheckpointFormatVersion)
    throw std::runtime_error("gmvq: unsupported checkpoint version " + std::to_string(version));
  const std::uint32_t cfg_len = read_u32(is, "config length");
  std::string cfg_text(cfg_len, '\0');
  is.read(cfg_text.data(), cfg_len);
  if (!is) throw std::runtime_error("gmvq: truncated config echo in '" + path + "'");

  Model m;
  m.config = parse_config(cfg_text);
  m.codebook = read_codebook_section(is);
  m.encoder = read_mlp(is, "encoder");
  m.decoder = read_mlp(is, "decoder");
  return m;
}

}  // namespace gmvq
