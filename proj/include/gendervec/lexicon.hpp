#pragma once

#include <array>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace gendervec {

/// Gender codes of the source dictionary.
enum class GenderCode { uter, neuter, plural, vacklande, blank };

inline constexpr std::array<GenderCode, 5> kAllGenderCodes = {
    GenderCode::uter, GenderCode::neuter, GenderCode::plural, GenderCode::vacklande,
    GenderCode::blank};

/// "u", "n", "p", "v" or "" for blank.
std::string_view code_string(GenderCode c);
/// Human-readable name used in reports ("uter", ..., "blank").
std::string_view code_name(GenderCode c);
std::optional<GenderCode> parse_code(std::string_view s);

struct GenderLexicon {
  std::map<std::string, GenderCode> entries;
  /// Duplicate rows with conflicting codes (resolved last-wins).
  std::vector<std::string> warnings;

  std::size_t size() const { return entries.size(); }
  std::size_t count(GenderCode c) const;
  std::optional<GenderCode> find(std::string_view word) const;
};

/// Parses `word<TAB>code` rows. Throws DataError naming the line for rows
/// without exactly one tab, empty words or unknown codes. Empty lines are
/// skipped.
GenderLexicon parse_lexicon(std::istream& in);
GenderLexicon read_lexicon(const std::string& path);

/// Keeps the uter and neuter entries only.
GenderLexicon restrict_to_core_genders(const GenderLexicon& lex);

/// Rows in word order.
void write_lexicon(std::ostream& out, const GenderLexicon& lex);
/// `{"u": n, "n": n, "p": n, "v": n, "blank": n, "total": n}`
std::string code_count_summary_json(const GenderLexicon& lex);

}  // namespace gendervec
