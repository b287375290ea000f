#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace morphcall {

using FeatureBundle = std::map<std::string, std::string>;

// "Case=Nom|Number=Sing"; "_" or "" is the empty bundle.
FeatureBundle parse_bundle(std::string_view text);
std::string format_bundle(const FeatureBundle& bundle);

// First value of each feature of a token's FEATS map.
FeatureBundle first_values(const std::map<std::string, std::vector<std::string>>& feats);

// Paradigm table: (lemma, upos) -> forms with their feature bundles.
//
// File format: UTF-8 TSV, one line per form: form, lemma, upos, bundle.
// Blank lines and lines starting with '#' are ignored.
class InflectionLexicon {
 public:
  struct Entry {
    std::string form;
    FeatureBundle bundle;
    friend bool operator==(const Entry&, const Entry&) = default;
  };
  struct Analysis {
    std::string lemma;
    std::string upos;
    FeatureBundle bundle;
  };

  InflectionLexicon() = default;
  explicit InflectionLexicon(std::string language) : language_(std::move(language)) {}

  static InflectionLexicon load(std::istream& in, const std::string& source_name, const std::string& language);
  static InflectionLexicon load_file(const std::string& path, const std::string& language);

  void add(const std::string& form, const std::string& lemma, const std::string& upos, FeatureBundle bundle);

  const std::string& language() const noexcept { return language_; }
  std::size_t size() const noexcept { return size_; }

  // Entries of a paradigm ordered by form, then bundle. Empty when unknown.
  const std::vector<Entry>& paradigm(std::string_view lemma, std::string_view upos) const;

  // Every (lemma, upos, bundle) the lexicon lists for a surface form
  // (case-insensitive).
  std::vector<Analysis> analyze(std::string_view form) const;

  // First form of the paradigm whose bundle agrees with base+overrides: every
  // override feature must be present with the overridden value, and every
  // other feature the entry encodes must agree with base. Returns nullopt
  // when nothing matches or the match spells original_form.
  std::optional<std::string> inflect(std::string_view lemma, std::string_view upos, const FeatureBundle& base,
                                     const FeatureBundle& overrides, std::string_view original_form) const;

 private:
  std::string language_;
  std::map<std::pair<std::string, std::string>, std::vector<Entry>> paradigms_;
  std::multimap<std::string, std::pair<std::string, std::string>> by_form_;
  std::size_t size_ = 0;
};

// Lower-case stop-word forms for a language plus its article forms.
class StopList {
 public:
  StopList() = default;
  StopList(std::string language, std::set<std::string> words, std::set<std::string> articles);

  // Reads <dir>/stopwords/<lang>.txt and, when present, <dir>/articles/<lang>.txt.
  static StopList load(const std::string& data_dir, const std::string& language);

  const std::string& language() const noexcept { return language_; }
  bool is_stopword(std::string_view form) const;
  bool is_article(std::string_view form) const;
  bool has_articles() const noexcept { return !articles_.empty(); }
  const std::set<std::string>& words() const noexcept { return words_; }
  const std::set<std::string>& articles() const noexcept { return articles_; }

 private:
  std::string language_;
  std::set<std::string> words_;
  std::set<std::string> articles_;
};

// One entry per non-empty, non-comment line, lower-cased.
std::set<std::string> read_word_list(const std::string& path);

}  // namespace morphcall
