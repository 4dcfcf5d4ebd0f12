#include "gendervec/lexicon.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>

#include "gendervec/errors.hpp"
#include "json.hpp"

namespace gendervec {

std::string_view code_string(GenderCode c) {
  switch (c) {
    case GenderCode::uter: return "u";
    case GenderCode::neuter: return "n";
    case GenderCode::plural: return "p";
    case GenderCode::vacklande: return "v";
    case GenderCode::blank: return "";
  }
  return "";
}

std::string_view code_name(GenderCode c) {
  switch (c) {
    case GenderCode::uter: return "uter";
    case GenderCode::neuter: return "neuter";
    case GenderCode::plural: return "plural";
    case GenderCode::vacklande: return "vacklande";
    case GenderCode::blank: return "blank";
  }
  return "";
}

std::optional<GenderCode> parse_code(std::string_view s) {
  for (auto c : kAllGenderCodes) {
    if (s == code_string(c)) return c;
  }
  return std::nullopt;
}

std::size_t GenderLexicon::count(GenderCode c) const {
  return static_cast<std::size_t>(
      std::count_if(entries.begin(), entries.end(), [c](const auto& kv) { return kv.second == c; }));
}

std::optional<GenderCode> GenderLexicon::find(std::string_view word) const {
  auto it = entries.find(std::string(word));
  if (it == entries.end()) return std::nullopt;
  return it->second;
}

GenderLexicon parse_lexicon(std::istream& in) {
  GenderLexicon lex;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || line.find('\t', tab + 1) != std::string::npos || tab == 0) {
      throw DataError("lexicon line " + std::to_string(line_no) + ": expected word<TAB>code");
    }
    const std::string word = line.substr(0, tab);
    const auto code = parse_code(std::string_view(line).substr(tab + 1));
    if (!code) {
      throw DataError("lexicon line " + std::to_string(line_no) + ": unknown gender code '" +
                      line.substr(tab + 1) + "'");
    }
    auto [it, inserted] = lex.entries.try_emplace(word, *code);
    if (!inserted && it->second != *code) {
      lex.warnings.push_back("line " + std::to_string(line_no) + ": '" + word + "' recoded " +
                             std::string(code_name(it->second)) + " -> " +
                             std::string(code_name(*code)));
      it->second = *code;
    }
  }
  return lex;
}

GenderLexicon read_lexicon(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open lexicon " + path);
  return parse_lexicon(in);
}

GenderLexicon restrict_to_core_genders(const GenderLexicon& lex) {
  GenderLexicon out;
  for (const auto& [word, code] : lex.entries) {
    if (code == GenderCode::uter || code == GenderCode::neuter) out.entries.emplace(word, code);
  }
  return out;
}

void write_lexicon(std::ostream& out, const GenderLexicon& lex) {
  for (const auto& [word, code] : lex.entries) out << word << '\t' << code_string(code) << '\n';
}

std::string code_count_summary_json(const GenderLexicon& lex) {
  nlohmann::ordered_json j;
  j["u"] = lex.count(GenderCode::uter);
  j["n"] = lex.count(GenderCode::neuter);
  j["p"] = lex.count(GenderCode::plural);
  j["v"] = lex.count(GenderCode::vacklande);
  j["blank"] = lex.count(GenderCode::blank);
  j["total"] = lex.size();
  return j.dump(2);
}

}  // namespace gendervec
