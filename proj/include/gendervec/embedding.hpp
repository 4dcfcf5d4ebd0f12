#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "gendervec/cooccurrence.hpp"
#include "gendervec/corpus.hpp"
#include "gendervec/linalg.hpp"

namespace gendervec {

struct EmbeddingConfig {
  int dim = 50;              // K
  double alpha = 0.5;        // power-transform exponent
  double sigma_power = 0.0;  // rows are scaled by sigma^sigma_power
  std::uint64_t seed = 42;   // Lanczos start vector
  double svd_tolerance = 1e-10;

  void validate() const;
  bool operator==(const EmbeddingConfig&) const = default;
};

/// Raises every stored count to `alpha`; zeros stay implicit. The result is
/// a context x target CSR matrix.
CsrMatrix power_transform(const CoocMatrix& m, double alpha);

/// Word vectors: row i belongs to words[i].
struct EmbeddingMatrix {
  std::vector<std::string> words;
  Eigen::MatrixXd vectors;  // |V| x K
  Eigen::VectorXd singular_values;
  ContextConfig context;
  EmbeddingConfig config;

  std::size_t size() const { return words.size(); }
  int dim() const { return static_cast<int>(vectors.cols()); }
  /// Row index of a word or -1.
  std::ptrdiff_t find(std::string_view word) const;
};

/// Power transform then top-K right singular vectors of the transformed
/// matrix, scaled by sigma^sigma_power.
EmbeddingMatrix embed_matrix(const CoocMatrix& m, const Vocabulary& vocab,
                             const EmbeddingConfig& cfg);

/// count -> transform -> SVD.
EmbeddingMatrix embed(std::span<const Sentence> corpus, const Vocabulary& vocab,
                      const ContextConfig& ctx, const EmbeddingConfig& cfg);

/// Text format: header `|V| K`, then one `word v1 ... vK` line per row.
void write_embedding_text(std::ostream& out, const EmbeddingMatrix& e);
EmbeddingMatrix read_embedding_text(std::istream& in);

/// Binary format: magic `RSVEMB01`, u64 |V|, u64 K, then per row a u32
/// word length, the word bytes and K little-endian float64 values.
void write_embedding_binary(std::ostream& out, const EmbeddingMatrix& e);
EmbeddingMatrix read_embedding_binary(std::istream& in);

/// Picks the format from the first 8 bytes.
EmbeddingMatrix read_embedding(const std::filesystem::path& path);
void write_embedding(const std::filesystem::path& path, const EmbeddingMatrix& e, bool binary);

}  // namespace gendervec
