#include "morphcall/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "morphcall/error.hpp"
#include "morphcall/hash.hpp"
#include "morphcall/utf8.hpp"

namespace morphcall {

std::string_view baseline_name(BaselineKind k) {
  switch (k) {
    case BaselineKind::CharCount: return "char-count";
    case BaselineKind::CharTfidf: return "char-ngram-tfidf";
    case BaselineKind::SubwordTfidf: return "subword-tfidf";
    case BaselineKind::StaticVectors: return "static-vectors";
  }
  return "";
}

BaselineKind parse_baseline(std::string_view name) {
  for (auto k : {BaselineKind::CharCount, BaselineKind::CharTfidf, BaselineKind::SubwordTfidf,
                 BaselineKind::StaticVectors}) {
    if (baseline_name(k) == name) return k;
  }
  throw ConfigError("unknown baseline: " + std::string(name));
}

void BaselineConfig::validate() const {
  if (ngram_range.first < 1 || ngram_range.first > ngram_range.second) {
    throw ConfigError("ngram range must satisfy 1 <= lo <= hi");
  }
  if (vocabulary_cap == 0) throw ConfigError("vocabulary cap must be positive");
  if (kind == BaselineKind::StaticVectors && vectors_path.empty()) throw ConfigError("static vectors need a path");
  if (kind == BaselineKind::SubwordTfidf && sidecar_path.empty()) throw ConfigError("subword baseline needs a sidecar");
}

std::size_t char_count(std::string_view unit) { return utf8::length(unit); }

std::size_t char_count(const std::vector<std::string>& tokens) {
  std::size_t n = 0;
  for (const auto& t : tokens) n += utf8::length(t);
  return n;
}

std::vector<std::string> baseline_unit(const TaskInstance& inst, TaskFamily family) {
  if (family == TaskFamily::Perturbations || !inst.target_index) return inst.tokens;
  const std::size_t t = *inst.target_index;
  if (t >= inst.tokens.size()) throw BoundsError("target index beyond the sentence in " + inst.id);
  if (family == TaskFamily::Masked) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < inst.tokens.size(); ++i) {
      if (i != t) out.push_back(inst.tokens[i]);
    }
    return out;
  }
  return {inst.tokens[t]};
}

std::map<std::string, std::size_t> extract_ngrams(const std::vector<std::string>& doc, bool char_mode,
                                                  std::pair<std::size_t, std::size_t> range, bool lowercase) {
  std::map<std::string, std::size_t> grams;
  if (char_mode) {
    std::string joined;
    for (std::size_t i = 0; i < doc.size(); ++i) {
      if (i) joined += ' ';
      joined += doc[i];
    }
    const std::u32string text = utf8::decode(lowercase ? utf8::lower(joined) : joined);
    for (std::size_t n = range.first; n <= range.second; ++n) {
      for (std::size_t i = 0; i + n <= text.size(); ++i) ++grams[utf8::encode(text.substr(i, n))];
    }
  } else {
    for (std::size_t n = range.first; n <= range.second; ++n) {
      for (std::size_t i = 0; i + n <= doc.size(); ++i) {
        std::string g = doc[i];
        for (std::size_t k = 1; k < n; ++k) g += '\x1f' + doc[i + k];
        ++grams[g];
      }
    }
  }
  return grams;
}

TfidfModel fit_tfidf(const std::vector<std::vector<std::string>>& train_docs, const BaselineConfig& config) {
  config.validate();
  if (train_docs.empty()) throw InputError("cannot fit TF-IDF on an empty corpus");
  TfidfModel m;
  m.char_mode = config.kind != BaselineKind::SubwordTfidf;
  m.sublinear_tf = config.sublinear_tf;
  m.lowercase = config.lowercase && m.char_mode;
  m.ngram_range = config.ngram_range;

  std::map<std::string, std::size_t> df;
  Fnv1a64 h;
  for (const auto& doc : train_docs) {
    for (const auto& t : doc) {
      h.update(t);
      h.update(std::string_view("\x1f", 1));
    }
    h.update(std::string_view("\n", 1));
    for (const auto& [g, c] : extract_ngrams(doc, m.char_mode, m.ngram_range, m.lowercase)) ++df[g];
  }
  m.fitted_on = to_hex(h.digest());

  std::vector<std::pair<std::string, std::size_t>> entries(df.begin(), df.end());
  if (entries.size() > config.vocabulary_cap) {
    std::stable_sort(entries.begin(), entries.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    entries.resize(config.vocabulary_cap);
    std::sort(entries.begin(), entries.end());
  }
  const double n = static_cast<double>(train_docs.size());
  for (const auto& [g, d] : entries) {
    m.vocabulary.emplace(g, m.terms.size());
    m.terms.push_back(g);
    m.idf.push_back(std::log((1.0 + n) / (1.0 + static_cast<double>(d))) + 1.0);
  }
  return m;
}

SparseMatrix transform_tfidf(const TfidfModel& model, const std::vector<std::vector<std::string>>& docs) {
  std::vector<Eigen::Triplet<double>> triplets;
  for (std::size_t r = 0; r < docs.size(); ++r) {
    std::vector<std::pair<std::size_t, double>> row;
    double norm2 = 0.0;
    for (const auto& [g, c] : extract_ngrams(docs[r], model.char_mode, model.ngram_range, model.lowercase)) {
      auto it = model.vocabulary.find(g);
      if (it == model.vocabulary.end()) continue;
      const double tf = model.sublinear_tf ? 1.0 + std::log(static_cast<double>(c)) : static_cast<double>(c);
      const double v = tf * model.idf[it->second];
      row.emplace_back(it->second, v);
      norm2 += v * v;
    }
    const double norm = std::sqrt(norm2);
    for (const auto& [col, v] : row) {
      triplets.emplace_back(static_cast<int>(r), static_cast<int>(col), v / norm);
    }
  }
  SparseMatrix X(static_cast<Eigen::Index>(docs.size()), static_cast<Eigen::Index>(model.dim()));
  X.setFromTriplets(triplets.begin(), triplets.end());
  X.makeCompressed();
  return X;
}

const Eigen::VectorXd* StaticVectors::find(const std::string& word) const {
  auto it = vectors.find(word);
  if (it == vectors.end()) it = vectors.find(utf8::lower(word));
  return it == vectors.end() ? nullptr : &it->second;
}

StaticVectors parse_static_vectors(std::istream& in, const std::string& source) {
  StaticVectors sv;
  std::string line;
  std::size_t count = 0;
  if (!std::getline(in, line)) throw ParseError(source, 1, "missing header");
  {
    std::istringstream hs(line);
    std::string extra;
    if (!(hs >> count >> sv.dim) || (hs >> extra) || sv.dim == 0) {
      throw ParseError(source, 1, "header must be \"count dim\"");
    }
  }
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string word;
    ls >> word;
    Eigen::VectorXd v(static_cast<Eigen::Index>(sv.dim));
    for (std::size_t k = 0; k < sv.dim; ++k) {
      std::string tok;
      if (!(ls >> tok)) throw ParseError(source, lineno, "expected " + std::to_string(sv.dim) + " values");
      try {
        std::size_t used = 0;
        v(static_cast<Eigen::Index>(k)) = std::stod(tok, &used);
        if (used != tok.size()) throw std::invalid_argument(tok);
      } catch (const std::exception&) {
        throw ParseError(source, lineno, "bad number: " + tok);
      }
    }
    std::string extra;
    if (ls >> extra) throw ParseError(source, lineno, "more than " + std::to_string(sv.dim) + " values");
    sv.vectors.emplace(word, std::move(v));
  }
  if (sv.vectors.size() != count) {
    throw ParseError(source, lineno, "header announces " + std::to_string(count) + " vectors, found " +
                                         std::to_string(sv.vectors.size()));
  }
  return sv;
}

StaticVectors load_static_vectors(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  return parse_static_vectors(in, path);
}

PooledVector pool_static(const std::vector<std::string>& tokens, const StaticVectors& vectors) {
  PooledVector p;
  p.value = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(vectors.dim));
  std::size_t hits = 0;
  for (const auto& t : tokens) {
    if (const auto* v = vectors.find(t)) {
      p.value += *v;
      ++hits;
    }
  }
  if (hits == 0) {
    p.all_oov = true;
  } else {
    p.value /= static_cast<double>(hits);
  }
  return p;
}

std::vector<std::vector<std::string>> read_subword_sidecar(const std::string& path, const ProbingDataset& dataset) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open subword sidecar " + path);
  std::vector<std::vector<std::string>> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      auto j = nlohmann::json::parse(line);
      const std::size_t row = out.size();
      if (row < dataset.instances.size() && j.contains("id") &&
          j.at("id").get<std::string>() != dataset.instances[row].id) {
        throw IntegrityError(path + ":" + std::to_string(lineno) + ": sidecar id does not match instance " +
                             dataset.instances[row].id);
      }
      out.push_back(j.at("subwords").get<std::vector<std::string>>());
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(path, lineno, e.what());
    }
  }
  if (out.size() != dataset.instances.size()) {
    throw IntegrityError("sidecar has " + std::to_string(out.size()) + " entries for " +
                         std::to_string(dataset.instances.size()) + " instances");
  }
  return out;
}

namespace {

template <typename M>
SplitView<M> empty_view(const ProbingDataset& d) {
  SplitView<M> v;
  for (auto r : d.indices(Split::Train)) v.y_train.push_back(d.instances[r].label);
  for (auto r : d.indices(Split::Dev)) v.y_dev.push_back(d.instances[r].label);
  for (auto r : d.indices(Split::Test)) v.y_test.push_back(d.instances[r].label);
  return v;
}

std::vector<std::vector<std::string>> pick(const std::vector<std::vector<std::string>>& units,
                                           const std::vector<std::size_t>& rows) {
  std::vector<std::vector<std::string>> out;
  out.reserve(rows.size());
  for (auto r : rows) out.push_back(units[r]);
  return out;
}

}  // namespace

ProbeResult run_baseline(const ProbingDataset& dataset, const BaselineConfig& config, const ProbeConfig& probe) {
  config.validate();
  probe.validate();
  const TaskFamily family = dataset.family();
  std::vector<std::vector<std::string>> units;
  if (config.kind == BaselineKind::SubwordTfidf) {
    units = read_subword_sidecar(config.sidecar_path, dataset);
  } else {
    for (const auto& inst : dataset.instances) units.push_back(baseline_unit(inst, family));
  }

  LayerScore score;
  if (config.kind == BaselineKind::CharTfidf || config.kind == BaselineKind::SubwordTfidf) {
    auto view = empty_view<SparseMatrix>(dataset);
    const TfidfModel model = fit_tfidf(pick(units, dataset.indices(Split::Train)), config);
    view.train = transform_tfidf(model, pick(units, dataset.indices(Split::Train)));
    view.dev = transform_tfidf(model, pick(units, dataset.indices(Split::Dev)));
    view.test = transform_tfidf(model, pick(units, dataset.indices(Split::Test)));
    score = tune_regularization(view, dataset.arity, probe);
  } else {
    Eigen::MatrixXd X;
    if (config.kind == BaselineKind::CharCount) {
      X.resize(static_cast<Eigen::Index>(units.size()), 1);
      for (std::size_t i = 0; i < units.size(); ++i) {
        X(static_cast<Eigen::Index>(i), 0) = static_cast<double>(char_count(units[i]));
      }
    } else {
      const StaticVectors sv = load_static_vectors(config.vectors_path);
      X.resize(static_cast<Eigen::Index>(units.size()), static_cast<Eigen::Index>(sv.dim));
      for (std::size_t i = 0; i < units.size(); ++i) {
        X.row(static_cast<Eigen::Index>(i)) = pool_static(units[i], sv).value.transpose();
      }
    }
    score = tune_regularization(split_rows(dataset, X), dataset.arity, probe);
  }
  ProbeResult r;
  r.model_id = std::string(baseline_name(config.kind));
  r.instance = "baseline";
  r.task = dataset.task;
  r.language = dataset.language;
  r.pooling = "none";
  r.layers.push_back(score);
  return r;
}

}  // namespace morphcall
