#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace morphcall {

// Supported language codes, in the order used by presets and reports.
inline constexpr std::string_view kLanguages[] = {"ru", "en", "de", "fr"};
bool is_supported_language(std::string_view code);

// One syntactic word of a CoNLL-U sentence.
//
// Features keep every value of a multi-valued FEATS entry ("Case=Acc,Nom") so
// the sentence writes back unchanged; feature queries see the first value only
// and such features count as syncretic.
struct Token {
  int index = 0;  // 1-based
  std::string form;
  std::string lemma;
  std::string upos;
  std::string xpos = "_";
  std::map<std::string, std::vector<std::string>> feats;
  int head = 0;   // 0 = root
  std::string deprel;
  std::string deps = "_";
  std::string misc = "_";

  bool syncretic(std::string_view feature) const;
  bool any_syncretic() const;

  friend bool operator==(const Token&, const Token&) = default;
};

struct Sentence {
  std::string id;
  std::vector<Token> tokens;
  std::string language;

  std::size_t size() const noexcept { return tokens.size(); }

  // Number of tokens attached with deprel "root".
  std::size_t root_count() const;
  bool has_unique_root() const { return root_count() == 1; }
  // 0-based position of the unique root, if any.
  std::optional<std::size_t> root_position() const;

  std::vector<std::string> forms() const;
  // Forms joined by single spaces.
  std::string text() const;

  friend bool operator==(const Sentence&, const Sentence&) = default;
};

bool has_feature(const Token& token, std::string_view feature);
std::optional<std::string> feature_value(const Token& token, std::string_view feature);

// "Case=Nom|Number=Sing" <-> feature map. "_" is the empty map.
std::map<std::string, std::vector<std::string>> parse_feats(std::string_view column);
std::string format_feats(const std::map<std::string, std::vector<std::string>>& feats);

// Parses a CoNLL-U stream. source_name is used in error messages and for
// fallback sentence ids ("<source>#<ordinal>", 1-based).
std::vector<Sentence> parse_conllu(std::istream& in, const std::string& source_name,
                                   const std::string& language);
std::vector<Sentence> parse_conllu_string(std::string_view text, const std::string& source_name,
                                          const std::string& language);
std::vector<Sentence> parse_conllu_file(const std::string& path, const std::string& language);

// Word lines plus a sent_id comment; multiword ranges are not reconstructed.
void write_conllu(std::ostream& out, const std::vector<Sentence>& sentences);

std::vector<Sentence> filter_by_length(const std::vector<Sentence>& sentences,
                                       std::size_t min_tokens = 5, std::size_t max_tokens = 25);

// Ordered feature -> ordered admissible values, per language.
class FeatureInventory {
 public:
  using Values = std::vector<std::string>;

  // The Number/Case/Person/Gender inventories of ru, en, de, fr.
  static FeatureInventory defaults();

  void set(const std::string& language, const std::string& feature, Values values);

  bool defines(std::string_view language, std::string_view feature) const;
  // Throws ConfigError when undefined.
  const Values& values(std::string_view language, std::string_view feature) const;
  std::vector<std::string> features(std::string_view language) const;
  // Position of value in the list, if admissible.
  std::optional<int> index_of(std::string_view language, std::string_view feature,
                              std::string_view value) const;

 private:
  struct Entry {
    std::string feature;
    Values values;
  };
  std::map<std::string, std::vector<Entry>, std::less<>> by_language_;
};

}  // namespace morphcall
