#include "morphcall/ud.hpp"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "morphcall/error.hpp"

namespace morphcall {

bool is_supported_language(std::string_view code) {
  return std::find(std::begin(kLanguages), std::end(kLanguages), code) != std::end(kLanguages);
}

bool Token::syncretic(std::string_view feature) const {
  auto it = feats.find(std::string(feature));
  return it != feats.end() && it->second.size() > 1;
}

bool Token::any_syncretic() const {
  return std::any_of(feats.begin(), feats.end(), [](const auto& kv) { return kv.second.size() > 1; });
}

std::size_t Sentence::root_count() const {
  return static_cast<std::size_t>(
      std::count_if(tokens.begin(), tokens.end(), [](const Token& t) { return t.deprel == "root"; }));
}

std::optional<std::size_t> Sentence::root_position() const {
  if (!has_unique_root()) return std::nullopt;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (tokens[i].deprel == "root") return i;
  }
  return std::nullopt;
}

std::vector<std::string> Sentence::forms() const {
  std::vector<std::string> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(t.form);
  return out;
}

std::string Sentence::text() const {
  std::string out;
  for (const auto& t : tokens) {
    if (!out.empty()) out.push_back(' ');
    out += t.form;
  }
  return out;
}

bool has_feature(const Token& token, std::string_view feature) {
  return token.feats.find(std::string(feature)) != token.feats.end();
}

std::optional<std::string> feature_value(const Token& token, std::string_view feature) {
  auto it = token.feats.find(std::string(feature));
  if (it == token.feats.end() || it->second.empty()) return std::nullopt;
  return it->second.front();
}

namespace {

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(s.substr(start));
      break;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

std::optional<int> parse_int(std::string_view s) {
  int v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

}  // namespace

std::map<std::string, std::vector<std::string>> parse_feats(std::string_view column) {
  std::map<std::string, std::vector<std::string>> feats;
  if (column == "_" || column.empty()) return feats;
  for (auto item : split(column, '|')) {
    auto eq = item.find('=');
    if (eq == std::string_view::npos || eq == 0 || eq + 1 == item.size()) {
      throw InputError("malformed FEATS item '" + std::string(item) + "'");
    }
    std::vector<std::string> values;
    for (auto v : split(item.substr(eq + 1), ',')) {
      if (v.empty()) throw InputError("empty value in FEATS item '" + std::string(item) + "'");
      values.emplace_back(v);
    }
    feats[std::string(item.substr(0, eq))] = std::move(values);
  }
  return feats;
}

std::string format_feats(const std::map<std::string, std::vector<std::string>>& feats) {
  if (feats.empty()) return "_";
  std::string out;
  for (const auto& [name, values] : feats) {
    if (!out.empty()) out.push_back('|');
    out += name;
    out.push_back('=');
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (i) out.push_back(',');
      out += values[i];
    }
  }
  return out;
}

std::vector<Sentence> parse_conllu(std::istream& in, const std::string& source_name,
                                   const std::string& language) {
  std::vector<Sentence> sentences;
  Sentence current;
  std::size_t ordinal = 0;
  std::size_t line_no = 0;
  std::size_t sentence_start_line = 0;
  bool in_sentence = false;

  auto flush = [&]() {
    if (!in_sentence) return;
    in_sentence = false;
    ++ordinal;
    if (current.tokens.empty()) {
      current = Sentence{};
      return;
    }
    const int n = static_cast<int>(current.tokens.size());
    for (const auto& t : current.tokens) {
      if (t.head > n) {
        throw ParseError(source_name, sentence_start_line,
                         "head " + std::to_string(t.head) + " of token " + std::to_string(t.index) +
                             " exceeds sentence length " + std::to_string(n));
      }
    }
    if (current.id.empty()) current.id = source_name + "#" + std::to_string(ordinal);
    current.language = language;
    sentences.push_back(std::move(current));
    current = Sentence{};
  };

  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) {
      flush();
      continue;
    }
    if (!in_sentence) {
      in_sentence = true;
      sentence_start_line = line_no;
    }
    if (line.front() == '#') {
      std::string_view body = trim(std::string_view(line).substr(1));
      if (body.starts_with("sent_id")) {
        auto eq = body.find('=');
        if (eq != std::string_view::npos) current.id = std::string(trim(body.substr(eq + 1)));
      }
      continue;
    }
    auto cols = split(line, '\t');
    if (cols.size() != 10) {
      throw ParseError(source_name, line_no,
                       "expected 10 tab-separated columns, found " + std::to_string(cols.size()));
    }
    if (cols[0].find('-') != std::string_view::npos || cols[0].find('.') != std::string_view::npos) {
      continue;  // multiword token range or empty node
    }
    auto index = parse_int(cols[0]);
    if (!index || *index < 1) throw ParseError(source_name, line_no, "non-integer token index '" + std::string(cols[0]) + "'");
    auto head = parse_int(cols[6]);
    if (!head || *head < 0) throw ParseError(source_name, line_no, "non-integer head '" + std::string(cols[6]) + "'");
    if (*index != static_cast<int>(current.tokens.size()) + 1) {
      throw ParseError(source_name, line_no, "token index " + std::to_string(*index) + " out of sequence");
    }
    Token tok;
    tok.index = *index;
    tok.form = std::string(cols[1]);
    tok.lemma = std::string(cols[2]);
    tok.upos = std::string(cols[3]);
    tok.xpos = std::string(cols[4]);
    try {
      tok.feats = parse_feats(cols[5]);
    } catch (const InputError& e) {
      throw ParseError(source_name, line_no, e.what());
    }
    tok.head = *head;
    tok.deprel = std::string(cols[7]);
    tok.deps = std::string(cols[8]);
    tok.misc = std::string(cols[9]);
    current.tokens.push_back(std::move(tok));
  }
  flush();
  return sentences;
}

std::vector<Sentence> parse_conllu_string(std::string_view text, const std::string& source_name,
                                          const std::string& language) {
  std::istringstream in{std::string(text)};
  return parse_conllu(in, source_name, language);
}

std::vector<Sentence> parse_conllu_file(const std::string& path, const std::string& language) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open treebank " + path);
  return parse_conllu(in, std::filesystem::path(path).filename().string(), language);
}

void write_conllu(std::ostream& out, const std::vector<Sentence>& sentences) {
  for (const auto& s : sentences) {
    out << "# sent_id = " << s.id << '\n';
    for (const auto& t : s.tokens) {
      out << t.index << '\t' << t.form << '\t' << t.lemma << '\t' << t.upos << '\t' << t.xpos << '\t'
          << format_feats(t.feats) << '\t' << t.head << '\t' << t.deprel << '\t' << t.deps << '\t'
          << t.misc << '\n';
    }
    out << '\n';
  }
}

std::vector<Sentence> filter_by_length(const std::vector<Sentence>& sentences, std::size_t min_tokens,
                                       std::size_t max_tokens) {
  if (min_tokens > max_tokens) throw ConfigError("length range with min > max");
  std::vector<Sentence> out;
  for (const auto& s : sentences) {
    if (s.size() >= min_tokens && s.size() <= max_tokens) out.push_back(s);
  }
  return out;
}

FeatureInventory FeatureInventory::defaults() {
  FeatureInventory inv;
  const Values number{"Sing", "Plur"};
  const Values person{"1", "2", "3"};
  inv.set("en", "Number", number);
  inv.set("en", "Person", person);
  inv.set("fr", "Number", number);
  inv.set("fr", "Person", person);
  inv.set("fr", "Gender", {"Masc", "Fem"});
  inv.set("de", "Number", number);
  inv.set("de", "Case", {"Nom", "Acc", "Dat", "Gen"});
  inv.set("de", "Person", person);
  inv.set("de", "Gender", {"Masc", "Fem", "Neut"});
  inv.set("ru", "Number", number);
  inv.set("ru", "Case", {"Nom", "Acc", "Dat", "Gen", "Loc", "Ins"});
  inv.set("ru", "Person", person);
  inv.set("ru", "Gender", {"Masc", "Fem", "Neut"});
  return inv;
}

void FeatureInventory::set(const std::string& language, const std::string& feature, Values values) {
  if (values.empty()) throw ConfigError("empty value list for " + language + "." + feature);
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i].empty()) throw ConfigError("empty value in " + language + "." + feature);
    for (std::size_t j = 0; j < i; ++j) {
      if (values[i] == values[j]) throw ConfigError("duplicate value " + values[i] + " in " + language + "." + feature);
    }
  }
  auto& entries = by_language_[language];
  for (auto& e : entries) {
    if (e.feature == feature) {
      e.values = std::move(values);
      return;
    }
  }
  entries.push_back({feature, std::move(values)});
}

bool FeatureInventory::defines(std::string_view language, std::string_view feature) const {
  auto it = by_language_.find(language);
  if (it == by_language_.end()) return false;
  return std::any_of(it->second.begin(), it->second.end(), [&](const Entry& e) { return e.feature == feature; });
}

const FeatureInventory::Values& FeatureInventory::values(std::string_view language,
                                                         std::string_view feature) const {
  auto it = by_language_.find(language);
  if (it != by_language_.end()) {
    for (const auto& e : it->second) {
      if (e.feature == feature) return e.values;
    }
  }
  throw ConfigError("feature " + std::string(feature) + " is not defined for language " + std::string(language));
}

std::vector<std::string> FeatureInventory::features(std::string_view language) const {
  std::vector<std::string> out;
  auto it = by_language_.find(language);
  if (it == by_language_.end()) return out;
  for (const auto& e : it->second) out.push_back(e.feature);
  return out;
}

std::optional<int> FeatureInventory::index_of(std::string_view language, std::string_view feature,
                                              std::string_view value) const {
  if (!defines(language, feature)) return std::nullopt;
  const auto& vals = values(language, feature);
  for (std::size_t i = 0; i < vals.size(); ++i) {
    if (vals[i] == value) return static_cast<int>(i);
  }
  return std::nullopt;
}

}  // namespace morphcall
