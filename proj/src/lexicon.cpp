#include "morphcall/lexicon.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <istream>
#include <set>

#include "morphcall/error.hpp"
#include "morphcall/utf8.hpp"

namespace morphcall {

FeatureBundle parse_bundle(std::string_view text) {
  FeatureBundle out;
  if (text.empty() || text == "_") return out;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('|', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view item = text.substr(start, end - start);
    auto eq = item.find('=');
    if (eq == std::string_view::npos || eq == 0 || eq + 1 == item.size()) {
      throw InputError("malformed feature item '" + std::string(item) + "'");
    }
    out[std::string(item.substr(0, eq))] = std::string(item.substr(eq + 1));
    start = end + 1;
  }
  return out;
}

std::string format_bundle(const FeatureBundle& bundle) {
  if (bundle.empty()) return "_";
  std::string out;
  for (const auto& [k, v] : bundle) {
    if (!out.empty()) out.push_back('|');
    out += k + "=" + v;
  }
  return out;
}

FeatureBundle first_values(const std::map<std::string, std::vector<std::string>>& feats) {
  FeatureBundle out;
  for (const auto& [k, v] : feats) {
    if (!v.empty()) out[k] = v.front();
  }
  return out;
}

InflectionLexicon InflectionLexicon::load(std::istream& in, const std::string& source_name,
                                          const std::string& language) {
  InflectionLexicon lex(language);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    std::vector<std::string> cols;
    std::size_t start = 0;
    while (true) {
      std::size_t tab = line.find('\t', start);
      cols.push_back(line.substr(start, tab == std::string::npos ? std::string::npos : tab - start));
      if (tab == std::string::npos) break;
      start = tab + 1;
    }
    if (cols.size() != 4) {
      throw ParseError(source_name, line_no, "expected 4 tab-separated columns, found " + std::to_string(cols.size()));
    }
    if (cols[0].empty() || cols[1].empty() || cols[2].empty()) {
      throw ParseError(source_name, line_no, "empty form, lemma or upos");
    }
    try {
      lex.add(cols[0], cols[1], cols[2], parse_bundle(cols[3]));
    } catch (const InputError& e) {
      throw ParseError(source_name, line_no, e.what());
    }
  }
  return lex;
}

InflectionLexicon InflectionLexicon::load_file(const std::string& path, const std::string& language) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open lexicon " + path);
  return load(in, std::filesystem::path(path).filename().string(), language);
}

void InflectionLexicon::add(const std::string& form, const std::string& lemma, const std::string& upos,
                            FeatureBundle bundle) {
  auto& entries = paradigms_[{lemma, upos}];
  Entry e{form, std::move(bundle)};
  if (std::find(entries.begin(), entries.end(), e) != entries.end()) return;
  auto key = [](const Entry& x) { return std::make_pair(x.form, format_bundle(x.bundle)); };
  auto pos = std::lower_bound(entries.begin(), entries.end(), e,
                              [&](const Entry& a, const Entry& b) { return key(a) < key(b); });
  entries.insert(pos, e);
  by_form_.emplace(utf8::lower(form), std::make_pair(lemma, upos));
  ++size_;
}

const std::vector<InflectionLexicon::Entry>& InflectionLexicon::paradigm(std::string_view lemma,
                                                                         std::string_view upos) const {
  static const std::vector<Entry> kEmpty;
  auto it = paradigms_.find({std::string(lemma), std::string(upos)});
  if (it == paradigms_.end()) it = paradigms_.find({utf8::lower(lemma), std::string(upos)});
  return it == paradigms_.end() ? kEmpty : it->second;
}

std::vector<InflectionLexicon::Analysis> InflectionLexicon::analyze(std::string_view form) const {
  std::vector<Analysis> out;
  const std::string key = utf8::lower(form);
  auto [lo, hi] = by_form_.equal_range(key);
  std::set<std::pair<std::string, std::string>> seen;
  for (auto it = lo; it != hi; ++it) {
    if (!seen.insert(it->second).second) continue;
    for (const auto& e : paradigm(it->second.first, it->second.second)) {
      if (utf8::lower(e.form) == key) out.push_back({it->second.first, it->second.second, e.bundle});
    }
  }
  return out;
}

std::optional<std::string> InflectionLexicon::inflect(std::string_view lemma, std::string_view upos,
                                                      const FeatureBundle& base, const FeatureBundle& overrides,
                                                      std::string_view original_form) const {
  for (const auto& e : paradigm(lemma, upos)) {
    bool ok = true;
    for (const auto& [f, v] : overrides) {
      auto it = e.bundle.find(f);
      if (it == e.bundle.end() || it->second != v) {
        ok = false;
        break;
      }
    }
    if (!ok) continue;
    for (const auto& [f, v] : e.bundle) {
      if (overrides.count(f)) continue;
      auto it = base.find(f);
      if (it != base.end() && it->second != v) {
        ok = false;
        break;
      }
    }
    if (!ok) continue;
    if (utf8::lower(e.form) == utf8::lower(original_form)) return std::nullopt;
    return e.form;
  }
  return std::nullopt;
}

StopList::StopList(std::string language, std::set<std::string> words, std::set<std::string> articles)
    : language_(std::move(language)), words_(std::move(words)), articles_(std::move(articles)) {}

std::set<std::string> read_word_list(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open word list " + path);
  std::set<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    out.insert(utf8::lower(line));
  }
  return out;
}

StopList StopList::load(const std::string& data_dir, const std::string& language) {
  namespace fs = std::filesystem;
  const fs::path words = fs::path(data_dir) / "stopwords" / (language + ".txt");
  if (!fs::exists(words)) throw ConfigError("no stop-word list for language " + language + " at " + words.string());
  std::set<std::string> w = read_word_list(words.string());
  if (w.empty()) throw ConfigError("empty stop-word list for language " + language);
  std::set<std::string> a;
  const fs::path articles = fs::path(data_dir) / "articles" / (language + ".txt");
  if (fs::exists(articles)) a = read_word_list(articles.string());
  return StopList(language, std::move(w), std::move(a));
}

bool StopList::is_stopword(std::string_view form) const { return words_.count(utf8::lower(form)) > 0; }

bool StopList::is_article(std::string_view form) const { return articles_.count(utf8::lower(form)) > 0; }

}  // namespace morphcall
