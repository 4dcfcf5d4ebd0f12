#include "gendervec/embedding.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "gendervec/errors.hpp"

namespace gendervec {
namespace {

constexpr std::array<char, 8> kMagic = {'R', 'S', 'V', 'E', 'M', 'B', '0', '1'};

static_assert(std::endian::native == std::endian::little,
              "binary embedding I/O assumes a little-endian host");

template <class T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& in) {
  T v{};
  if (!in.read(reinterpret_cast<char*>(&v), sizeof(T))) {
    throw DataError("truncated binary embedding");
  }
  return v;
}

}  // namespace

void EmbeddingConfig::validate() const {
  if (dim < 1) throw ConfigError("embedding dimensionality K must be >= 1");
  if (!(alpha > 0.0)) throw ConfigError("power-transform exponent alpha must be > 0");
  if (!std::isfinite(sigma_power)) throw ConfigError("sigma_power must be finite");
}

CsrMatrix power_transform(const CoocMatrix& m, double alpha) {
  if (!(alpha > 0.0)) throw ConfigError("power-transform exponent alpha must be > 0");
  CsrMatrix out;
  out.rows = m.num_contexts;
  out.cols = m.num_targets;
  out.row_ptr.assign(out.rows + 1, 0);
  out.col_idx.reserve(m.entries.size());
  out.values.reserve(m.entries.size());
  for (const auto& e : m.entries) {
    ++out.row_ptr[static_cast<std::size_t>(e.context) + 1];
    out.col_idx.push_back(e.target);
    out.values.push_back(alpha == 1.0 ? e.count : std::pow(e.count, alpha));
  }
  for (std::size_t r = 0; r < out.rows; ++r) out.row_ptr[r + 1] += out.row_ptr[r];
  return out;
}

std::ptrdiff_t EmbeddingMatrix::find(std::string_view word) const {
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (words[i] == word) return static_cast<std::ptrdiff_t>(i);
  }
  return -1;
}

EmbeddingMatrix embed_matrix(const CoocMatrix& m, const Vocabulary& vocab,
                             const EmbeddingConfig& cfg) {
  cfg.validate();
  if (m.entries.empty()) throw DataError("cannot embed an empty co-occurrence matrix");
  if (m.num_targets != vocab.size()) {
    throw DataError("co-occurrence matrix and vocabulary sizes differ");
  }
  SparseOperator op(power_transform(m, cfg.alpha));
  SvdOptions opts;
  opts.seed = cfg.seed;
  opts.tolerance = cfg.svd_tolerance;
  auto svd = truncated_svd(op, static_cast<std::size_t>(cfg.dim), opts);

  EmbeddingMatrix e;
  e.words = vocab.words();
  e.context = m.config;
  e.config = cfg;
  e.singular_values = svd.singular_values;
  e.vectors = std::move(svd.right);
  if (cfg.sigma_power != 0.0) {
    for (Eigen::Index c = 0; c < e.vectors.cols(); ++c) {
      e.vectors.col(c) *= std::pow(e.singular_values(c), cfg.sigma_power);
    }
  }
  if (!e.vectors.allFinite()) throw NumericalError("embedding contains non-finite values");
  return e;
}

EmbeddingMatrix embed(std::span<const Sentence> corpus, const Vocabulary& vocab,
                      const ContextConfig& ctx, const EmbeddingConfig& cfg) {
  return embed_matrix(count_cooccurrences(corpus, vocab, ctx), vocab, cfg);
}

void write_embedding_text(std::ostream& out, const EmbeddingMatrix& e) {
  out << e.size() << ' ' << e.dim() << '\n';
  const auto old = out.precision(17);
  for (std::size_t i = 0; i < e.size(); ++i) {
    out << e.words[i];
    for (int c = 0; c < e.dim(); ++c) out << ' ' << e.vectors(static_cast<Eigen::Index>(i), c);
    out << '\n';
  }
  out.precision(old);
}

EmbeddingMatrix read_embedding_text(std::istream& in) {
  std::size_t rows = 0;
  int dim = 0;
  if (!(in >> rows >> dim) || dim < 1) throw DataError("bad embedding header");
  EmbeddingMatrix e;
  e.words.resize(rows);
  e.vectors.resize(static_cast<Eigen::Index>(rows), dim);
  for (std::size_t i = 0; i < rows; ++i) {
    if (!(in >> e.words[i])) throw DataError("embedding truncated at row " + std::to_string(i));
    for (int c = 0; c < dim; ++c) {
      if (!(in >> e.vectors(static_cast<Eigen::Index>(i), c))) {
        throw DataError("embedding row " + std::to_string(i) + ": expected " +
                        std::to_string(dim) + " values");
      }
    }
  }
  return e;
}

void write_embedding_binary(std::ostream& out, const EmbeddingMatrix& e) {
  out.write(kMagic.data(), kMagic.size());
  put<std::uint64_t>(out, e.size());
  put<std::uint64_t>(out, static_cast<std::uint64_t>(e.dim()));
  for (std::size_t i = 0; i < e.size(); ++i) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(e.words[i].size()));
    out.write(e.words[i].data(), static_cast<std::streamsize>(e.words[i].size()));
    for (int c = 0; c < e.dim(); ++c) put<double>(out, e.vectors(static_cast<Eigen::Index>(i), c));
  }
}

EmbeddingMatrix read_embedding_binary(std::istream& in) {
  std::array<char, 8> magic{};
  if (!in.read(magic.data(), magic.size()) || magic != kMagic) {
    throw DataError("not an RSVEMB01 embedding file");
  }
  const auto rows = get<std::uint64_t>(in);
  const auto dim = get<std::uint64_t>(in);
  if (dim == 0 || dim > (1u << 20)) throw DataError("bad embedding dimensionality");
  EmbeddingMatrix e;
  e.words.resize(rows);
  e.vectors.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < rows; ++i) {
    const auto len = get<std::uint32_t>(in);
    e.words[i].resize(len);
    if (!in.read(e.words[i].data(), len)) throw DataError("truncated binary embedding");
    for (std::uint64_t c = 0; c < dim; ++c) {
      e.vectors(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = get<double>(in);
    }
  }
  return e;
}

EmbeddingMatrix read_embedding(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open embedding " + path.string());
  std::array<char, 8> head{};
  in.read(head.data(), head.size());
  const bool binary = in.gcount() == 8 && head == kMagic;
  in.clear();
  in.seekg(0);
  return binary ? read_embedding_binary(in) : read_embedding_text(in);
}

void write_embedding(const std::filesystem::path& path, const EmbeddingMatrix& e, bool binary) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  if (binary) {
    write_embedding_binary(out, e);
  } else {
    write_embedding_text(out, e);
  }
}

}  // namespace gendervec
