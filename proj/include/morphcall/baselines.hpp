#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "morphcall/analysis.hpp"
#include "morphcall/dataset.hpp"
#include "morphcall/probe.hpp"

namespace morphcall {

enum class BaselineKind { CharCount, CharTfidf, SubwordTfidf, StaticVectors };

std::string_view baseline_name(BaselineKind k);
BaselineKind parse_baseline(std::string_view name);

struct BaselineConfig {
  BaselineKind kind = BaselineKind::CharTfidf;
  std::pair<std::size_t, std::size_t> ngram_range{1, 4};
  std::size_t vocabulary_cap = 200000;
  bool sublinear_tf = true;
  bool lowercase = true;  // char mode only
  std::string vectors_path;  // static vectors
  std::string sidecar_path;  // subword streams

  void validate() const;
};

// Unicode scalar values in a unit. For a token list the separating spaces are
// not counted.
std::size_t char_count(std::string_view unit);
std::size_t char_count(const std::vector<std::string>& tokens);

// Text the baselines see for one instance: the target word for word-level
// tasks, the sentence with the target removed for masked tasks, the whole
// sentence for perturbations.
std::vector<std::string> baseline_unit(const TaskInstance& inst, TaskFamily family);

struct TfidfModel {
  bool char_mode = true;
  bool sublinear_tf = true;
  bool lowercase = true;
  std::pair<std::size_t, std::size_t> ngram_range{1, 4};
  std::vector<std::string> terms;  // column order (lexicographic)
  std::unordered_map<std::string, std::size_t> vocabulary;
  std::vector<double> idf;
  std::string fitted_on;  // hash of the training documents

  std::size_t dim() const { return terms.size(); }
};

// Documents are token sequences. Char mode joins them with single spaces and
// takes character n-grams of the result; subword mode takes token n-grams.
TfidfModel fit_tfidf(const std::vector<std::vector<std::string>>& train_docs, const BaselineConfig& config);
SparseMatrix transform_tfidf(const TfidfModel& model, const std::vector<std::vector<std::string>>& docs);

// The n-gram multiset of one document, in the model's analyzer.
std::map<std::string, std::size_t> extract_ngrams(const std::vector<std::string>& doc, bool char_mode,
                                                  std::pair<std::size_t, std::size_t> range, bool lowercase);

struct StaticVectors {
  std::size_t dim = 0;
  std::unordered_map<std::string, Eigen::VectorXd> vectors;

  const Eigen::VectorXd* find(const std::string& word) const;  // exact, then lowercased
};

// Text format: "count dim" header, then "word v1 ... vdim" lines.
StaticVectors load_static_vectors(const std::string& path);
StaticVectors parse_static_vectors(std::istream& in, const std::string& source);

struct PooledVector {
  Eigen::VectorXd value;
  bool all_oov = false;
};

PooledVector pool_static(const std::vector<std::string>& tokens, const StaticVectors& vectors);

// One subword list per dataset instance, in dataset order.
std::vector<std::vector<std::string>> read_subword_sidecar(const std::string& path, const ProbingDataset& dataset);

// Features on train only, C tuned on dev, test scored; one pseudo-layer.
ProbeResult run_baseline(const ProbingDataset& dataset, const BaselineConfig& config, const ProbeConfig& probe);

}  // namespace morphcall
