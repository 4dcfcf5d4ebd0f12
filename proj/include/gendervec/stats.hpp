#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gendervec/classifier.hpp"
#include "json.hpp"

namespace gendervec {

struct StatResult {
  std::string name;
  double statistic = 0.0;  // tau-b, or mean(a) - mean(b)
  double z = 0.0;
  double p = 1.0;
  std::size_t n = 0;  // sample size
  std::uint64_t seed = 0;
  std::uint64_t permutations = 0;  // relabelings evaluated
  bool exhaustive = false;
};

nlohmann::ordered_json to_json(const StatResult& r);

/// Pair counts behind tau-b.
struct KendallCounts {
  std::uint64_t n = 0;
  std::uint64_t pairs = 0;      // n(n-1)/2
  std::uint64_t ties_x = 0;     // pairs tied in x (including joint ties)
  std::uint64_t ties_y = 0;     // pairs tied in y (including joint ties)
  std::uint64_t ties_xy = 0;    // pairs tied in both
  std::int64_t s = 0;           // concordant - discordant
  std::vector<std::uint64_t> x_groups;  // sizes of x tie groups (> 1)
  std::vector<std::uint64_t> y_groups;
};

/// O(n log n) pair counting (sort by x, then merge-sort inversions on y).
KendallCounts kendall_counts(std::span<const double> x, std::span<const double> y);

/// tau-b = S / sqrt((n0 - n1)(n0 - n2)) from pair counts.
double tau_b_from_counts(std::int64_t s, std::uint64_t pairs, std::uint64_t ties_x,
                         std::uint64_t ties_y);

/// Kendall tau-b with the tie-adjusted normal approximation and a
/// two-sided p. Throws DataError for length mismatch, n < 2, non-finite
/// values or an all-tied vector.
StatResult kendall_tau_b(std::span<const double> x, std::span<const double> y);

/// Relabelings are enumerated exhaustively up to this many assignments.
inline constexpr std::uint64_t kExhaustiveLimit = 100000;

/// Two-sample Fisher-Pitman permutation test on the mean difference.
/// Exhaustive when C(|a|+|b|, |a|) <= kExhaustiveLimit, giving
/// p = #{|stat| >= |observed|} / C; otherwise n_perm Monte-Carlo
/// relabelings with p = (1 + #extreme) / (1 + n_perm).
/// z = (observed - mean of relabeled stats) / their standard deviation.
StatResult fisher_pitman_permutation(std::span<const double> a, std::span<const double> b,
                                     std::uint64_t n_perm = 10000, std::uint64_t seed = 2024,
                                     bool allow_exhaustive = true);

namespace serial {
/// Same test with the single-threaded relabeling kernel.
StatResult fisher_pitman_permutation(std::span<const double> a, std::span<const double> b,
                                     std::uint64_t n_perm = 10000, std::uint64_t seed = 2024,
                                     bool allow_exhaustive = true);
}  // namespace serial

struct EntropyFrequencyPoint {
  std::string word;
  double entropy = 0.0;
  double log_frequency = 0.0;
  bool correct = true;
};

struct EntropyFrequencyReport {
  std::vector<EntropyFrequencyPoint> points;
  std::optional<StatResult> tau_all, tau_correct, tau_error;
  std::optional<StatResult> tau_low_all, tau_low_correct, tau_low_error;
  double log_frequency_cut = 8.0;
  std::size_t low_count = 0;
  double low_share = 0.0;
  std::optional<StatResult> entropy_permutation;  // correct vs error
  std::vector<std::string> warnings;
};

/// Kendall tau-b between ln(frequency) and entropy on all / correct /
/// erroneous records, the same on the subset with ln(frequency) below the
/// cut, and the Fisher-Pitman test of correct vs erroneous entropies.
/// Tests that cannot run (too few points, all tied) are skipped with a
/// warning. Throws DataError on empty input.
EntropyFrequencyReport entropy_frequency_analysis(std::span<const PredictionRecord> records,
                                                  std::uint64_t n_perm, std::uint64_t seed,
                                                  double log_frequency_cut = 8.0);

nlohmann::ordered_json to_json(const EntropyFrequencyReport& r);

}  // namespace gendervec
