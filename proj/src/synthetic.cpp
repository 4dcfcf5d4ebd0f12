#include "gendervec/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>
#include <unordered_map>

#include "gendervec/errors.hpp"
#include "gendervec/rng.hpp"

namespace gendervec {
namespace {

// Letter-only names so the tokenizer keeps each one as a single token.
std::string make_name(char prefix, std::size_t i, std::size_t width) {
  std::string s(width, 'a');
  for (std::size_t p = width; p-- > 0;) {
    s[p] = static_cast<char>('a' + i % 26);
    i /= 26;
  }
  return prefix + s;
}

std::size_t name_width(std::size_t n) {
  std::size_t w = 1;
  for (std::size_t cap = 26; cap < n; cap *= 26) ++w;
  return w;
}

class ZipfSampler {
 public:
  ZipfSampler(std::size_t n, double exponent) : cdf_(n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      acc += 1.0 / std::pow(static_cast<double>(i + 1), exponent);
      cdf_[i] = acc;
    }
    for (auto& c : cdf_) c /= acc;
  }
  std::size_t operator()(Rng& rng) const {
    const double u = rng.uniform();
    const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    return std::min(static_cast<std::size_t>(it - cdf_.begin()), cdf_.size() - 1);
  }

 private:
  std::vector<double> cdf_;
};

}  // namespace

void SyntheticSpec::validate() const {
  if (classes.size() < 2) throw ConfigError("synthetic language needs at least 2 classes");
  std::set<std::string> articles;
  double prior_sum = 0.0;
  for (const auto& c : classes) {
    if (c.article.empty()) throw ConfigError("article tokens must be non-empty");
    if (!articles.insert(c.article).second) throw ConfigError("article tokens must be distinct");
    if (c.article.front() == 'n' || c.article.front() == 'w') {
      throw ConfigError("article tokens must not start with 'n' or 'w' (reserved for generated words)");
    }
    if (!(c.prior >= 0.0)) throw ConfigError("class priors must be non-negative");
    prior_sum += c.prior;
  }
  if (std::abs(prior_sum - 1.0) > 1e-9) throw ConfigError("class priors must sum to 1");
  if (nouns < classes.size()) throw ConfigError("need at least one noun per class");
  if (sentences < 1) throw ConfigError("need at least one sentence");
  if (fillers < 1) throw ConfigError("need at least one filler word");
  if (max_leading_fillers < 0 || max_trailing_fillers < 0) {
    throw ConfigError("filler counts must be non-negative");
  }
  if (!(agreement_noise >= 0.0 && agreement_noise <= 1.0)) {
    throw ConfigError("agreement_noise must be in [0, 1]");
  }
  if (!(ambiguous_share >= 0.0 && ambiguous_share <= 1.0)) {
    throw ConfigError("ambiguous_share must be in [0, 1]");
  }
  if (!(zipf_exponent >= 0.0)) throw ConfigError("zipf_exponent must be >= 0");
}

SyntheticLanguage generate_synthetic_language(const SyntheticSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  const std::size_t k = spec.classes.size();

  // Largest-remainder allocation of noun types to classes.
  std::vector<std::size_t> quota(k);
  std::vector<double> frac(k);
  std::size_t assigned = 0;
  for (std::size_t c = 0; c < k; ++c) {
    const double exact = spec.classes[c].prior * static_cast<double>(spec.nouns);
    quota[c] = static_cast<std::size_t>(std::floor(exact));
    frac[c] = exact - std::floor(exact);
    assigned += quota[c];
  }
  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return frac[a] > frac[b]; });
  for (std::size_t i = 0; assigned < spec.nouns; ++i, ++assigned) ++quota[order[i % k]];

  std::vector<std::size_t> labels;
  for (std::size_t c = 0; c < k; ++c) labels.insert(labels.end(), quota[c], c);
  rng.shuffle(std::span<std::size_t>(labels));

  std::vector<bool> ambiguous(spec.nouns, false);
  const auto n_amb = static_cast<std::size_t>(
      std::llround(spec.ambiguous_share * static_cast<double>(spec.nouns)));
  {
    std::vector<std::size_t> idx(spec.nouns);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    rng.shuffle(std::span<std::size_t>(idx));
    for (std::size_t i = 0; i < n_amb; ++i) ambiguous[idx[i]] = true;
  }

  SyntheticLanguage lang;
  const auto nw = name_width(spec.nouns);
  for (std::size_t i = 0; i < spec.nouns; ++i) {
    lang.nouns.push_back({make_name('n', i, nw), labels[i], ambiguous[i]});
    lang.lexicon.entries.emplace(lang.nouns.back().word, spec.classes[labels[i]].code);
  }
  std::vector<std::string> filler_words;
  const auto fw = name_width(spec.fillers);
  for (std::size_t i = 0; i < spec.fillers; ++i) filler_words.push_back(make_name('w', i, fw));

  const ZipfSampler noun_dist(spec.nouns, spec.zipf_exponent);
  const ZipfSampler filler_dist(spec.fillers, spec.zipf_exponent);
  lang.lines.reserve(spec.sentences);
  for (std::size_t s = 0; s < spec.sentences; ++s) {
    std::string line;
    auto emit = [&](const std::string& w) {
      if (!line.empty()) line.push_back(' ');
      line += w;
    };
    const auto lead = rng.below(static_cast<std::uint64_t>(spec.max_leading_fillers) + 1);
    for (std::uint64_t i = 0; i < lead; ++i) emit(filler_words[filler_dist(rng)]);

    const auto& noun = lang.nouns[noun_dist(rng)];
    std::size_t article_class = noun.class_index;
    if (noun.ambiguous) {
      article_class = static_cast<std::size_t>(rng.below(k));
    } else if (spec.agreement_noise > 0.0 && rng.uniform() < spec.agreement_noise) {
      const auto shift = 1 + static_cast<std::size_t>(rng.below(k - 1));
      article_class = (noun.class_index + shift) % k;
      ++lang.flipped_articles;
    }
    emit(spec.classes[article_class].article);
    ++lang.article_tokens;
    emit(noun.word);

    const auto trail = rng.below(static_cast<std::uint64_t>(spec.max_trailing_fillers) + 1);
    for (std::uint64_t i = 0; i < trail; ++i) emit(filler_words[filler_dist(rng)]);
    emit(".");
    lang.lines.push_back(std::move(line));
  }
  return lang;
}

void write_lines(std::ostream& out, const std::vector<std::string>& lines) {
  for (const auto& l : lines) out << l << '\n';
}

double measured_agreement_noise(const std::vector<std::string>& lines, const SyntheticSpec& spec,
                                const SyntheticLanguage& lang) {
  std::unordered_map<std::string, std::size_t> article_class;
  for (std::size_t c = 0; c < spec.classes.size(); ++c) article_class[spec.classes[c].article] = c;
  std::unordered_map<std::string, const SyntheticNoun*> nouns;
  for (const auto& n : lang.nouns) nouns[n.word] = &n;

  std::size_t total = 0, flipped = 0;
  for (const auto& line : lines) {
    std::istringstream in(line);
    std::string prev, tok;
    while (in >> tok) {
      auto a = article_class.find(prev);
      auto n = nouns.find(tok);
      if (a != article_class.end() && n != nouns.end() && !n->second->ambiguous) {
        ++total;
        flipped += a->second != n->second->class_index;
      }
      prev = tok;
    }
  }
  return total ? static_cast<double>(flipped) / static_cast<double>(total) : 0.0;
}

}  // namespace gendervec
