#include "gendervec/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gendervec/errors.hpp"
#include "gendervec/kernels.hpp"

namespace gendervec {
namespace {

// Merge sort on `v`, returning the number of inversions (pairs i < j with
// v[i] > v[j]).
std::uint64_t count_inversions(std::vector<double>& v) {
  std::vector<double> buf(v.size());
  std::uint64_t swaps = 0;
  for (std::size_t width = 1; width < v.size(); width *= 2) {
    for (std::size_t lo = 0; lo < v.size(); lo += 2 * width) {
      const std::size_t mid = std::min(lo + width, v.size());
      const std::size_t hi = std::min(lo + 2 * width, v.size());
      std::size_t i = lo, j = mid, k = lo;
      while (i < mid && j < hi) {
        if (v[j] < v[i]) {
          swaps += mid - i;
          buf[k++] = v[j++];
        } else {
          buf[k++] = v[i++];
        }
      }
      while (i < mid) buf[k++] = v[i++];
      while (j < hi) buf[k++] = v[j++];
    }
    v.swap(buf);
  }
  return swaps;
}

// Sizes of runs of equal values in a sorted range (only runs > 1).
template <class It, class Eq>
std::vector<std::uint64_t> tie_groups(It first, It last, Eq eq) {
  std::vector<std::uint64_t> out;
  while (first != last) {
    auto run = first;
    std::uint64_t len = 0;
    while (run != last && eq(*run, *first)) ++run, ++len;
    if (len > 1) out.push_back(len);
    first = run;
  }
  return out;
}

std::uint64_t pairs_in(const std::vector<std::uint64_t>& groups) {
  std::uint64_t s = 0;
  for (auto t : groups) s += t * (t - 1) / 2;
  return s;
}

double normal_two_sided_p(double z) { return std::erfc(std::abs(z) / std::sqrt(2.0)); }

double mean_of(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

// C(n, k) or kExhaustiveLimit + 1 once it exceeds the limit.
std::uint64_t capped_binomial(std::uint64_t n, std::uint64_t k) {
  k = std::min(k, n - k);
  double c = 1.0;
  for (std::uint64_t i = 1; i <= k; ++i) {
    c = c * static_cast<double>(n - k + i) / static_cast<double>(i);
    if (c > static_cast<double>(kExhaustiveLimit)) return kExhaustiveLimit + 1;
  }
  return static_cast<std::uint64_t>(std::llround(c));
}

StatResult exhaustive_permutation(std::span<const double> pooled, std::size_t k, double observed) {
  const std::size_t n = pooled.size();
  const double total = std::accumulate(pooled.begin(), pooled.end(), 0.0);
  const double tol = 1e-9 * std::max(1.0, std::abs(observed));
  std::vector<std::size_t> comb(k);
  std::iota(comb.begin(), comb.end(), std::size_t{0});
  std::uint64_t extreme = 0, count = 0;
  double sum = 0.0, sum_sq = 0.0;
  while (true) {
    double sum_a = 0.0;
    for (auto i : comb) sum_a += pooled[i];
    const double stat =
        sum_a / static_cast<double>(k) - (total - sum_a) / static_cast<double>(n - k);
    if (std::abs(stat) >= std::abs(observed) - tol) ++extreme;
    sum += stat;
    sum_sq += stat * stat;
    ++count;
    // next k-combination in lexicographic order
    std::size_t i = k;
    while (i > 0 && comb[i - 1] == n - k + i - 1) --i;
    if (i == 0) break;
    ++comb[i - 1];
    for (std::size_t j = i; j < k; ++j) comb[j] = comb[j - 1] + 1;
  }
  StatResult r;
  r.exhaustive = true;
  r.permutations = count;
  r.p = static_cast<double>(extreme) / static_cast<double>(count);
  const double mean = sum / static_cast<double>(count);
  const double var = std::max(0.0, sum_sq / static_cast<double>(count) - mean * mean);
  r.z = var > 0.0 ? (observed - mean) / std::sqrt(var) : 0.0;
  return r;
}

template <class Kernel>
StatResult permutation_test(std::span<const double> a, std::span<const double> b,
                            std::uint64_t n_perm, std::uint64_t seed, bool allow_exhaustive,
                            Kernel&& kernel) {
  if (a.empty() || b.empty()) throw DataError("permutation test needs two non-empty groups");
  if (n_perm < 1) throw ConfigError("n_perm must be >= 1");
  std::vector<double> pooled(a.begin(), a.end());
  pooled.insert(pooled.end(), b.begin(), b.end());
  for (double v : pooled) {
    if (!std::isfinite(v)) throw DataError("permutation test input is not finite");
  }
  const double observed = mean_of(a) - mean_of(b);

  StatResult r;
  if (allow_exhaustive && capped_binomial(pooled.size(), a.size()) <= kExhaustiveLimit) {
    r = exhaustive_permutation(pooled, a.size(), observed);
  } else {
    const auto t = kernel(std::span<const double>(pooled), a.size(), observed, n_perm, seed);
    r.permutations = t.count;
    r.p = static_cast<double>(1 + t.extreme) / static_cast<double>(1 + t.count);
    const double mean = t.sum / static_cast<double>(t.count);
    const double var = std::max(0.0, t.sum_sq / static_cast<double>(t.count) - mean * mean);
    r.z = var > 0.0 ? (observed - mean) / std::sqrt(var) : 0.0;
  }
  r.name = "fisher_pitman_permutation";
  r.statistic = observed;
  r.n = pooled.size();
  r.seed = seed;
  r.p = std::min(1.0, r.p);
  return r;
}

}  // namespace

nlohmann::ordered_json to_json(const StatResult& r) {
  nlohmann::ordered_json j;
  j["name"] = r.name;
  j["statistic"] = r.statistic;
  j["z"] = r.z;
  j["p"] = r.p;
  j["n"] = r.n;
  if (r.name == "fisher_pitman_permutation") {
    j["seed"] = r.seed;
    j["permutations"] = r.permutations;
    j["exhaustive"] = r.exhaustive;
  }
  return j;
}

KendallCounts kendall_counts(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw DataError("kendall: vectors differ in length");
  KendallCounts c;
  c.n = x.size();
  c.pairs = c.n * (c.n - 1) / 2;
  std::vector<std::size_t> idx(x.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return x[a] != x[b] ? x[a] < x[b] : y[a] < y[b];
  });
  c.x_groups = tie_groups(idx.begin(), idx.end(), [&](auto a, auto b) { return x[a] == x[b]; });
  const auto joint = tie_groups(idx.begin(), idx.end(),
                                [&](auto a, auto b) { return x[a] == x[b] && y[a] == y[b]; });
  c.ties_x = pairs_in(c.x_groups);
  c.ties_xy = pairs_in(joint);

  std::vector<double> ys;
  ys.reserve(idx.size());
  for (auto i : idx) ys.push_back(y[i]);
  const std::uint64_t discordant = count_inversions(ys);  // ys is now sorted
  c.y_groups = tie_groups(ys.begin(), ys.end(), [](double a, double b) { return a == b; });
  c.ties_y = pairs_in(c.y_groups);

  // concordant + discordant = n0 - n1 - n2 + n3
  const auto untied = static_cast<std::int64_t>(c.pairs - c.ties_x - c.ties_y + c.ties_xy);
  c.s = untied - 2 * static_cast<std::int64_t>(discordant);
  return c;
}

double tau_b_from_counts(std::int64_t s, std::uint64_t pairs, std::uint64_t ties_x,
                         std::uint64_t ties_y) {
  const double dx = static_cast<double>(pairs - ties_x);
  const double dy = static_cast<double>(pairs - ties_y);
  return static_cast<double>(s) / std::sqrt(dx * dy);
}

StatResult kendall_tau_b(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw DataError("kendall: vectors differ in length");
  if (x.size() < 2) throw DataError("kendall: need at least 2 observations");
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i]) || !std::isfinite(y[i])) throw DataError("kendall: non-finite input");
  }
  const auto c = kendall_counts(x, y);
  if (c.ties_x == c.pairs || c.ties_y == c.pairs) {
    throw DataError("kendall: tau-b is undefined for an all-tied vector");
  }
  StatResult r;
  r.name = "kendall_tau_b";
  r.n = c.n;
  r.statistic = tau_b_from_counts(c.s, c.pairs, c.ties_x, c.ties_y);

  const double n = static_cast<double>(c.n);
  double vt = 0, vu = 0, t1 = 0, u1 = 0, t2 = 0, u2 = 0;
  for (auto g : c.x_groups) {
    const double t = static_cast<double>(g);
    vt += t * (t - 1) * (2 * t + 5);
    t1 += t * (t - 1);
    t2 += t * (t - 1) * (t - 2);
  }
  for (auto g : c.y_groups) {
    const double u = static_cast<double>(g);
    vu += u * (u - 1) * (2 * u + 5);
    u1 += u * (u - 1);
    u2 += u * (u - 1) * (u - 2);
  }
  double var = (n * (n - 1) * (2 * n + 5) - vt - vu) / 18.0 + t1 * u1 / (2.0 * n * (n - 1));
  if (c.n > 2) var += t2 * u2 / (9.0 * n * (n - 1) * (n - 2));
  r.z = var > 0 ? static_cast<double>(c.s) / std::sqrt(var) : 0.0;
  r.p = normal_two_sided_p(r.z);
  return r;
}

StatResult fisher_pitman_permutation(std::span<const double> a, std::span<const double> b,
                                     std::uint64_t n_perm, std::uint64_t seed,
                                     bool allow_exhaustive) {
  return permutation_test(a, b, n_perm, seed, allow_exhaustive,
                          [](auto&&... args) { return kernels::permutation_tally(args...); });
}

namespace serial {
StatResult fisher_pitman_permutation(std::span<const double> a, std::span<const double> b,
                                     std::uint64_t n_perm, std::uint64_t seed,
                                     bool allow_exhaustive) {
  return permutation_test(a, b, n_perm, seed, allow_exhaustive, [](auto&&... args) {
    return kernels::serial::permutation_tally(args...);
  });
}
}  // namespace serial

EntropyFrequencyReport entropy_frequency_analysis(std::span<const PredictionRecord> records,
                                                  std::uint64_t n_perm, std::uint64_t seed,
                                                  double log_frequency_cut) {
  if (records.empty()) throw DataError("entropy/frequency analysis of an empty record set");
  EntropyFrequencyReport rep;
  rep.log_frequency_cut = log_frequency_cut;
  for (const auto& r : records) {
    const double lf = std::log(static_cast<double>(std::max<std::uint64_t>(r.frequency, 1)));
    rep.points.push_back({r.word, r.entropy, lf, r.correct()});
  }

  auto run_tau = [&](const char* label, bool low_only, int correctness) -> std::optional<StatResult> {
    std::vector<double> xs, ys;
    for (const auto& p : rep.points) {
      if (low_only && !(p.log_frequency < log_frequency_cut)) continue;
      if (correctness == 1 && !p.correct) continue;
      if (correctness == 0 && p.correct) continue;
      xs.push_back(p.log_frequency);
      ys.push_back(p.entropy);
    }
    try {
      return kendall_tau_b(xs, ys);
    } catch (const DataError& e) {
      rep.warnings.push_back(std::string(label) + " skipped: " + e.what());
      return std::nullopt;
    }
  };
  rep.tau_all = run_tau("kendall(all)", false, -1);
  rep.tau_correct = run_tau("kendall(correct)", false, 1);
  rep.tau_error = run_tau("kendall(error)", false, 0);
  rep.tau_low_all = run_tau("kendall(low-frequency, all)", true, -1);
  rep.tau_low_correct = run_tau("kendall(low-frequency, correct)", true, 1);
  rep.tau_low_error = run_tau("kendall(low-frequency, error)", true, 0);

  rep.low_count = static_cast<std::size_t>(std::count_if(
      rep.points.begin(), rep.points.end(),
      [&](const auto& p) { return p.log_frequency < log_frequency_cut; }));
  rep.low_share = static_cast<double>(rep.low_count) / static_cast<double>(rep.points.size());

  std::vector<double> ok, bad;
  for (const auto& p : rep.points) (p.correct ? ok : bad).push_back(p.entropy);
  const bool identical = std::all_of(rep.points.begin(), rep.points.end(), [&](const auto& p) {
    return p.entropy == rep.points.front().entropy;
  });
  if (ok.empty() || bad.empty()) {
    rep.warnings.push_back("entropy permutation test skipped: one correctness group is empty");
  } else if (identical) {
    rep.warnings.push_back("entropy permutation test skipped: all entropies are identical");
  } else {
    rep.entropy_permutation = fisher_pitman_permutation(ok, bad, n_perm, seed);
  }
  return rep;
}

nlohmann::ordered_json to_json(const EntropyFrequencyReport& r) {
  auto opt = [](const std::optional<StatResult>& s) {
    return s ? to_json(*s) : nlohmann::ordered_json(nullptr);
  };
  nlohmann::ordered_json j;
  j["entropy_unit"] = "nats";
  j["points"] = r.points.size();
  j["kendall"]["all"] = opt(r.tau_all);
  j["kendall"]["correct"] = opt(r.tau_correct);
  j["kendall"]["error"] = opt(r.tau_error);
  j["low_frequency"]["log_frequency_cut"] = r.log_frequency_cut;
  j["low_frequency"]["count"] = r.low_count;
  j["low_frequency"]["share"] = r.low_share;
  j["low_frequency"]["kendall"]["all"] = opt(r.tau_low_all);
  j["low_frequency"]["kendall"]["correct"] = opt(r.tau_low_correct);
  j["low_frequency"]["kendall"]["error"] = opt(r.tau_low_error);
  j["entropy_permutation"] = opt(r.entropy_permutation);
  j["warnings"] = r.warnings;
  return j;
}

}  // namespace gendervec
