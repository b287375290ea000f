#include <sstream>

#include "../support.hpp"
#include "doctest.h"
#include "morphcall/error.hpp"
#include "morphcall/ud.hpp"

using namespace morphcall;

namespace {

std::size_t error_line(const std::string& text) {
  try {
    parse_conllu_string(text, "t.conllu", "ru");
  } catch (const ParseError& e) {
    return e.line();
  }
  return 0;
}

std::string word(int i, const std::string& form, const std::string& feats, int head, const std::string& rel) {
  return std::to_string(i) + "\t" + form + "\t" + form + "\tX\t_\t" + feats + "\t" + std::to_string(head) + "\t" +
         rel + "\t_\t_\n";
}

Sentence of_length(std::size_t n) {
  Sentence s;
  s.id = "len" + std::to_string(n);
  for (std::size_t i = 1; i <= n; ++i) {
    Token t;
    t.index = static_cast<int>(i);
    t.form = "w";
    t.deprel = i == 1 ? "root" : "dep";
    t.head = i == 1 ? 0 : 1;
    s.tokens.push_back(t);
  }
  return s;
}

}  // namespace

TEST_SUITE("ud") {
  TEST_CASE("empty input") { CHECK(parse_conllu_string("", "e", "ru").empty()); }

  TEST_CASE("chasy fixture") {
    auto s = parse_conllu_file(testing::fixture("chasy.conllu"), "ru");
    REQUIRE(s.size() == 2);
    CHECK(s[0].id == "chasy-2");
    REQUIRE(s[0].size() == 2);
    CHECK(s[0].tokens[1].form == "ostanovilis'");
    CHECK(feature_value(s[0].tokens[1], "Number") == std::optional<std::string>("Plur"));
    CHECK(s[0].tokens[1].head == 0);
    CHECK(s[0].tokens[0].head == 2);
    CHECK(s[0].has_unique_root());
    CHECK(s[0].language == "ru");

    const auto& t = s[1].tokens;
    CHECK(has_feature(t[1], "Number"));
    CHECK_FALSE(has_feature(t[2], "Number"));
    CHECK(t[2].feats.empty());
    CHECK_FALSE(feature_value(t[2], "Case"));
    CHECK(feature_value(t[3], "Case") == std::optional<std::string>("Acc"));
    CHECK(t[3].misc == "SpaceAfter=No");
  }

  TEST_CASE("multiword ranges and empty nodes are skipped") {
    std::string text = "# sent_id = m\n1-2\tim\t_\t_\t_\t_\t_\t_\t_\t_\n" + word(1, "in", "_", 0, "root") +
                       word(2, "dem", "Case=Dat", 1, "det") + "2.1\tx\tx\tX\t_\t_\t_\t_\t_\t_\n" +
                       word(3, "Haus", "_", 1, "obl") + "\n";
    auto s = parse_conllu_string(text, "m", "de");
    REQUIRE(s.size() == 1);
    REQUIRE(s[0].size() == 3);
    CHECK(s[0].forms() == std::vector<std::string>{"in", "dem", "Haus"});
  }

  TEST_CASE("fallback ids use the source and ordinal") {
    std::string text = word(1, "a", "_", 0, "root") + "\n" + word(1, "b", "_", 0, "root") + "\n";
    auto s = parse_conllu_string(text, "src", "en");
    REQUIRE(s.size() == 2);
    CHECK(s[0].id == "src#1");
    CHECK(s[1].id == "src#2");
  }

  TEST_CASE("malformed lines report their line number") {
    std::string ok = "# sent_id = a\n" + word(1, "a", "_", 0, "root");
    CHECK(error_line(ok + "2\tb\tb\tX\t_\t_\t1\tdep\t_\n") == 3);
    CHECK(error_line(ok + "x\tb\tb\tX\t_\t_\t1\tdep\t_\t_\n") == 3);
    CHECK(error_line(ok + "2\tb\tb\tX\t_\t_\th\tdep\t_\t_\n") == 3);
    CHECK(error_line("\n\n" + word(1, "a", "Case", 0, "root")) == 3);
  }

  TEST_CASE("multi-valued features are syncretic and query their first value") {
    auto s = parse_conllu_string(word(1, "pis'mo", "Case=Acc,Nom|Number=Sing", 0, "root"), "s", "ru");
    const Token& t = s.at(0).tokens.at(0);
    CHECK(t.syncretic("Case"));
    CHECK_FALSE(t.syncretic("Number"));
    CHECK(t.any_syncretic());
    CHECK(feature_value(t, "Case") == std::optional<std::string>("Acc"));
    CHECK(format_feats(t.feats) == "Case=Acc,Nom|Number=Sing");
  }

  TEST_CASE("root counting") {
    std::string text = word(1, "a", "_", 0, "root") + word(2, "b", "_", 0, "root") + "\n";
    auto s = parse_conllu_string(text, "r", "en");
    CHECK(s.at(0).root_count() == 2);
    CHECK_FALSE(s.at(0).has_unique_root());
    CHECK_FALSE(s.at(0).root_position());
  }

  TEST_CASE("round trip over the fixture treebanks") {
    for (const char* lang : {"ru", "en", "de", "fr"}) {
      CAPTURE(lang);
      auto parsed = parse_conllu_file(testing::fixture(std::string(lang) + ".conllu"), lang);
      REQUIRE(parsed.size() > 300);
      std::ostringstream out;
      write_conllu(out, parsed);
      auto again = parse_conllu_string(out.str(), "rt", lang);
      CHECK(again == parsed);
    }
  }

  TEST_CASE("has_feature agrees with feature_value") {
    for (const char* lang : {"ru", "en", "de", "fr"}) {
      auto parsed = parse_conllu_file(testing::fixture(std::string(lang) + ".conllu"), lang);
      for (const auto& s : parsed) {
        for (const auto& t : s.tokens) {
          for (const char* f : {"Number", "Case", "Person", "Gender", "Tense", "Nope"}) {
            REQUIRE(has_feature(t, f) == feature_value(t, f).has_value());
          }
        }
      }
    }
  }

  TEST_CASE("length filter boundaries") {
    std::vector<Sentence> in;
    for (std::size_t n : {4, 5, 25, 26}) in.push_back(of_length(n));
    auto out = filter_by_length(in, 5, 25);
    REQUIRE(out.size() == 2);
    CHECK(out[0].size() == 5);
    CHECK(out[1].size() == 25);
    CHECK(filter_by_length({}, 5, 25).empty());
    CHECK_THROWS_AS(filter_by_length(in, 6, 5), ConfigError);

    auto ru = filter_by_length(parse_conllu_file(testing::fixture("ru.conllu"), "ru"));
    for (const auto& s : ru) {
      CHECK(s.size() >= 5);
      CHECK(s.size() <= 25);
    }
  }

  TEST_CASE("default inventory") {
    auto inv = FeatureInventory::defaults();
    CHECK(inv.values("en", "Number") == std::vector<std::string>{"Sing", "Plur"});
    CHECK(inv.values("en", "Person") == std::vector<std::string>{"1", "2", "3"});
    CHECK(inv.features("en").size() == 2);
    CHECK(inv.values("fr", "Gender") == std::vector<std::string>{"Masc", "Fem"});
    CHECK_FALSE(inv.defines("fr", "Case"));
    CHECK(inv.values("de", "Case") == std::vector<std::string>{"Nom", "Acc", "Dat", "Gen"});
    CHECK(inv.values("de", "Gender").size() == 3);
    CHECK(inv.values("ru", "Case") == std::vector<std::string>{"Nom", "Acc", "Dat", "Gen", "Loc", "Ins"});
    CHECK(inv.values("ru", "Gender") == std::vector<std::string>{"Masc", "Fem", "Neut"});
    CHECK(inv.index_of("ru", "Case", "Loc") == std::optional<int>(4));
    CHECK_FALSE(inv.index_of("ru", "Case", "Par"));
    CHECK_THROWS_AS(inv.values("en", "Case"), ConfigError);
    CHECK_THROWS_AS(inv.set("xx", "F", {"a", "a"}), ConfigError);
  }
}
