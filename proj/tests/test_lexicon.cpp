#include <sstream>

#include "doctest.h"
#include "gendervec/errors.hpp"
#include "gendervec/lexicon.hpp"
#include "json.hpp"

using namespace gendervec;

namespace {
GenderLexicon parse(const std::string& s) {
  std::istringstream in(s);
  return parse_lexicon(in);
}
}  // namespace

TEST_CASE("single row and codes") {
  const auto lex = parse("hund\tu\n");
  REQUIRE(lex.size() == 1);
  CHECK(lex.find("hund") == GenderCode::uter);
  const auto all = parse("a\tu\nb\tn\nc\tp\nd\tv\ne\t\n\n");
  CHECK(all.count(GenderCode::uter) == 1);
  CHECK(all.count(GenderCode::neuter) == 1);
  CHECK(all.count(GenderCode::plural) == 1);
  CHECK(all.count(GenderCode::vacklande) == 1);
  CHECK(all.count(GenderCode::blank) == 1);
}

TEST_CASE("malformed rows report the line number") {
  try {
    parse("hund\tu\nx\tq\n");
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
  CHECK_THROWS_AS(parse("no-tab-here\n"), DataError);
}

TEST_CASE("duplicates resolve last-wins with a warning") {
  const auto lex = parse("bank\tu\nbank\tn\n");
  CHECK(lex.find("bank") == GenderCode::neuter);
  CHECK(lex.warnings.size() == 1);
  const auto same = parse("bank\tu\nbank\tu\n");
  CHECK(same.warnings.empty());
}

TEST_CASE("restrict_to_core_genders") {
  const auto lex = parse("a\tu\nb\tn\nc\tp\nd\tv\ne\t\n");
  const auto core = restrict_to_core_genders(lex);
  CHECK(core.size() == 2);
  const auto again = restrict_to_core_genders(core);
  CHECK(again.entries == core.entries);
  CHECK(restrict_to_core_genders(parse("c\tp\nd\tv\ne\t\n")).size() == 0);
  for (const auto& [w, c] : core.entries) CHECK(lex.find(w) == c);
}

TEST_CASE("serialize then parse reproduces the lexicon") {
  const auto lex = parse("z\tn\na\tu\nm\tv\nb\t\nk\tp\na\tn\n");
  std::ostringstream out;
  write_lexicon(out, lex);
  const auto back = parse(out.str());
  CHECK(back.entries == lex.entries);
  const auto summary = nlohmann::json::parse(code_count_summary_json(lex));
  CHECK(summary["u"] == 0);
  CHECK(summary["n"] == 2);
  CHECK(summary["total"] == 5);
}
