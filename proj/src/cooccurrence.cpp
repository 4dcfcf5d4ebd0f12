#include "gendervec/cooccurrence.hpp"

#include <istream>
#include "json.hpp"
#include <ostream>
#include <sstream>

#include "gendervec/errors.hpp"
#include "gendervec/kernels.hpp"

namespace gendervec {

std::string to_string(ContextType t) {
  switch (t) {
    case ContextType::asymmetric_backward: return "asymmetric_backward";
    case ContextType::asymmetric_forward: return "asymmetric_forward";
    case ContextType::symmetric: return "symmetric";
  }
  return "?";
}

ContextType parse_context_type(std::string_view name) {
  if (name == "asymmetric_backward" || name == "backward") return ContextType::asymmetric_backward;
  if (name == "asymmetric_forward" || name == "forward") return ContextType::asymmetric_forward;
  if (name == "symmetric") return ContextType::symmetric;
  throw ConfigError("unknown context type: " + std::string(name));
}

void ContextConfig::validate() const {
  if (window_size < 1) throw ConfigError("window_size must be >= 1");
  if (window_size > 5 && !allow_large_window) {
    throw ConfigError("window_size > 5 requires the large-window override");
  }
}

double CoocMatrix::total() const {
  double t = 0.0;
  for (const auto& e : entries) t += e.count;
  return t;
}

CoocMatrix count_cooccurrences(const EncodedCorpus& corpus, std::size_t vocab_size,
                               const ContextConfig& cfg) {
  cfg.validate();
  CoocMatrix m;
  m.num_contexts = vocab_size;
  m.num_targets = vocab_size;
  m.config = cfg;
  m.entries = kernels::count_pairs(corpus, cfg);
  return m;
}

CoocMatrix count_cooccurrences(std::span<const Sentence> corpus, const Vocabulary& vocab,
                               const ContextConfig& cfg) {
  return count_cooccurrences(encode(corpus, vocab), vocab.size(), cfg);
}

CoocMatrix merge(const CoocMatrix& a, const CoocMatrix& b) {
  if (a.num_contexts != b.num_contexts || a.num_targets != b.num_targets) {
    throw ConfigError("cannot merge co-occurrence matrices of different dimensions");
  }
  if (!(a.config == b.config)) {
    throw ConfigError("cannot merge co-occurrence matrices built with different configs");
  }
  CoocMatrix out;
  out.num_contexts = a.num_contexts;
  out.num_targets = a.num_targets;
  out.config = a.config;
  out.entries.reserve(a.entries.size() + b.entries.size());
  auto ia = a.entries.begin();
  auto ib = b.entries.begin();
  const auto less = [](const CoocEntry& x, const CoocEntry& y) {
    return x.context != y.context ? x.context < y.context : x.target < y.target;
  };
  while (ia != a.entries.end() || ib != b.entries.end()) {
    if (ib == b.entries.end() || (ia != a.entries.end() && less(*ia, *ib))) {
      out.entries.push_back(*ia++);
    } else if (ia == a.entries.end() || less(*ib, *ia)) {
      out.entries.push_back(*ib++);
    } else {
      out.entries.push_back({ia->context, ia->target, ia->count + ib->count});
      ++ia, ++ib;
    }
  }
  return out;
}

void write_cooc(std::ostream& out, const CoocMatrix& m) {
  nlohmann::ordered_json header;
  header["num_contexts"] = m.num_contexts;
  header["num_targets"] = m.num_targets;
  header["nnz"] = m.entries.size();
  header["context_type"] = to_string(m.config.context_type);
  header["window_size"] = m.config.window_size;
  header["distance_weighting"] = m.config.distance_weighting;
  out << header.dump() << '\n';
  const auto old = out.precision(17);
  for (const auto& e : m.entries) out << e.context << '\t' << e.target << '\t' << e.count << '\n';
  out.precision(old);
}

CoocMatrix read_cooc(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("co-occurrence file is empty");
  CoocMatrix m;
  try {
    const auto header = nlohmann::json::parse(line);
    m.num_contexts = header.at("num_contexts").get<std::size_t>();
    m.num_targets = header.at("num_targets").get<std::size_t>();
    m.config.context_type = parse_context_type(header.at("context_type").get<std::string>());
    m.config.window_size = header.at("window_size").get<int>();
    m.config.distance_weighting = header.value("distance_weighting", false);
    m.config.allow_large_window = m.config.window_size > 5;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("bad co-occurrence header: ") + e.what());
  }
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream row(line);
    CoocEntry e{};
    if (!(row >> e.context >> e.target >> e.count) || e.context < 0 || e.target < 0 ||
        static_cast<std::size_t>(e.context) >= m.num_contexts ||
        static_cast<std::size_t>(e.target) >= m.num_targets || !(e.count > 0)) {
      throw DataError("co-occurrence line " + std::to_string(line_no) + ": malformed entry");
    }
    if (!m.entries.empty()) {
      const auto& p = m.entries.back();
      if (p.context > e.context || (p.context == e.context && p.target >= e.target)) {
        throw DataError("co-occurrence line " + std::to_string(line_no) + ": entries not sorted");
      }
    }
    m.entries.push_back(e);
  }
  return m;
}

}  // namespace gendervec
