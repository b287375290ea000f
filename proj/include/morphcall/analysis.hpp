#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "morphcall/dataset.hpp"
#include "morphcall/probe.hpp"
#include "morphcall/repstore.hpp"

namespace morphcall {

struct LayerScore {
  std::size_t layer = 0;
  double chosen_reg = 0.0;
  double val_auc = 0.0;
  double test_auc = 0.0;
  double test_accuracy = 0.0;

  friend bool operator==(const LayerScore&, const LayerScore&) = default;
};

struct ProbeResult {
  std::string model_id;
  std::string instance;
  std::string task;
  std::string language;
  std::string pooling;
  std::vector<LayerScore> layers;

  double mean_test_auc() const;
  friend bool operator==(const ProbeResult&, const ProbeResult&) = default;
};

// Train/dev/test matrices and labels for one feature view.
template <typename M>
struct SplitView {
  M train, dev, test;
  std::vector<int> y_train, y_dev, y_test;
};

// Fits one probe per C on train, keeps the C with the best dev macro-OVR AUC
// (ties go to the smaller C) and scores test with it.
LayerScore tune_regularization(const SplitView<Eigen::MatrixXd>& view, int arity, const ProbeConfig& config);
LayerScore tune_regularization(const SplitView<SparseMatrix>& view, int arity, const ProbeConfig& config);

// Rows of X selected by a split of the dataset.
SplitView<Eigen::MatrixXd> split_rows(const ProbingDataset& dataset, const Eigen::MatrixXd& X);

// Per-layer probing curve. The repset must be bound to the dataset.
ProbeResult layer_sweep(const ProbingDataset& dataset, const RepSet& repset, const ProbeConfig& config);

enum class SaliencyMode { MaxAbs, CumulativeMass };

struct NeuronProbeConfig {
  std::vector<double> l1_grid{1e-1, 1e-2, 1e-3, 1e-4, 1e-5};
  std::vector<double> l2_grid{1e-1, 1e-2, 1e-3, 1e-4, 1e-5};
  double top_fraction = 0.2;
  SaliencyMode mode = SaliencyMode::MaxAbs;
  ElasticNetConfig optimizer;
  std::uint64_t seed = 42;
  std::size_t jobs = 1;

  void validate() const;
};

struct Saliency {
  std::vector<double> values;       // sums to 1
  std::vector<std::size_t> order;   // descending saliency, index tiebreak
};

// saliency(j) = max_c |W[c, j]|, normalized to sum 1.
Saliency rank_neurons(const LinearProbe& probe);

// The first ceil(fraction * d) neurons of the ordering.
std::vector<std::size_t> top_neurons(const Saliency& saliency, double fraction);

// Union over classes of the smallest prefix of |W[c, .]| (descending) holding
// at least mass_fraction of that class's total weight mass; returned in
// ascending index order.
std::vector<std::size_t> top_neurons_cumulative(const LinearProbe& probe, double mass_fraction);

// Neuron j belongs to layer j / hidden_size.
std::vector<std::size_t> per_layer_counts(std::span<const std::size_t> neurons, std::size_t n_layers,
                                          std::size_t hidden_size);

struct NeuronReport {
  std::string model_id;
  std::string instance;
  std::string task;
  std::string language;
  std::size_t n_layers = 0;
  std::size_t hidden_size = 0;
  double l1 = 0.0;
  double l2 = 0.0;
  double val_auc = 0.0;
  double test_auc = 0.0;
  std::vector<double> saliency;
  std::vector<std::size_t> top_set;
  std::vector<std::size_t> per_layer_counts;

  friend bool operator==(const NeuronReport&, const NeuronReport&) = default;
};

// Elastic-net probe over all layers concatenated, tuned over the (l1, l2)
// grid on dev macro-OVR AUC (ties go to the earlier grid point).
NeuronReport neuron_sweep(const ProbingDataset& dataset, const RepSet& repset, const NeuronProbeConfig& config);

std::string probe_result_json(const ProbeResult& r);
std::string probe_result_csv(const ProbeResult& r);
ProbeResult parse_probe_result_json(const std::string& text);
std::string neuron_report_json(const NeuronReport& r);
std::string neuron_report_csv(const NeuronReport& r);

}  // namespace morphcall
