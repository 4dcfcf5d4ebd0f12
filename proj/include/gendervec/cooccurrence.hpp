#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "gendervec/corpus.hpp"

namespace gendervec {

enum class ContextType { asymmetric_backward, asymmetric_forward, symmetric };

std::string to_string(ContextType t);
/// Accepts the canonical names plus the short forms backward/forward.
ContextType parse_context_type(std::string_view name);

struct ContextConfig {
  ContextType context_type = ContextType::asymmetric_backward;
  int window_size = 1;
  /// Weight a pair at distance d by 1/d instead of 1.
  bool distance_weighting = false;
  /// Permits window sizes beyond 5.
  bool allow_large_window = false;

  /// Throws ConfigError when the window is out of range.
  void validate() const;

  bool operator==(const ContextConfig&) const = default;
};

struct CoocEntry {
  std::int32_t context;
  std::int32_t target;
  double count;

  bool operator==(const CoocEntry&) const = default;
};

/// Sparse context x target count matrix. Entries are kept sorted by
/// (context, target) with no duplicates and no zeros, so two matrices with
/// equal content compare equal.
struct CoocMatrix {
  std::size_t num_contexts = 0;
  std::size_t num_targets = 0;
  ContextConfig config;
  std::vector<CoocEntry> entries;

  double total() const;
  bool operator==(const CoocMatrix&) const = default;
};

/// Counts (context, target) pairs within sentences. Out-of-vocabulary
/// tokens are neither context nor target. Sentences are counted as
/// independent shards across OpenMP workers.
CoocMatrix count_cooccurrences(const EncodedCorpus& corpus, std::size_t vocab_size,
                               const ContextConfig& cfg);

CoocMatrix count_cooccurrences(std::span<const Sentence> corpus, const Vocabulary& vocab,
                               const ContextConfig& cfg);

/// Entrywise sum. Throws ConfigError on mismatched dims or config.
CoocMatrix merge(const CoocMatrix& a, const CoocMatrix& b);

/// Writes a one-line JSON header then `context_id<TAB>target_id<TAB>count`.
void write_cooc(std::ostream& out, const CoocMatrix& m);
CoocMatrix read_cooc(std::istream& in);

}  // namespace gendervec
