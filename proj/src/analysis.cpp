#include "morphcall/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include <json.hpp>

#include "morphcall/error.hpp"
#include "morphcall/metrics.hpp"
#include "morphcall/parallel.hpp"

namespace morphcall {

double ProbeResult::mean_test_auc() const {
  if (layers.empty()) return 0.0;
  double s = 0.0;
  for (const auto& l : layers) s += l.test_auc;
  return s / static_cast<double>(layers.size());
}

namespace {

struct Fit {
  double val_auc = 0.0;
  double test_auc = 0.0;
  double test_accuracy = 0.0;
};

template <typename M>
void check_view(const SplitView<M>& v) {
  if (v.y_train.empty()) throw InputError("empty train split");
  if (v.y_dev.empty()) throw InputError("empty dev split");
  if (v.y_test.empty()) throw InputError("empty test split");
}

template <typename M>
Fit evaluate_c(const SplitView<M>& view, int arity, double c, const ProbeConfig& config) {
  LinearProbe probe = fit_logreg(view.train, view.y_train, c, config, arity);
  Fit f;
  f.val_auc = macro_ovr_auc(predict_scores(probe, view.dev), view.y_dev);
  Eigen::MatrixXd test_scores = predict_scores(probe, view.test);
  f.test_auc = macro_ovr_auc(test_scores, view.y_test);
  f.test_accuracy = accuracy(test_scores, view.y_test);
  return f;
}

// Best dev score; among ties the smallest C (strongest regularization).
std::size_t pick_c(const std::vector<double>& grid, const std::vector<Fit>& fits) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (fits[i].val_auc > fits[best].val_auc || (fits[i].val_auc == fits[best].val_auc && grid[i] < grid[best])) best = i;
  }
  return best;
}

template <typename M>
LayerScore tune_impl(const SplitView<M>& view, int arity, const ProbeConfig& config) {
  config.validate();
  check_view(view);
  std::vector<Fit> fits(config.l2_grid.size());
  parallel_for(fits.size(), config.jobs, [&](std::size_t i) { fits[i] = evaluate_c(view, arity, config.l2_grid[i], config); });
  const std::size_t best = pick_c(config.l2_grid, fits);
  LayerScore s;
  s.chosen_reg = config.l2_grid[best];
  s.val_auc = fits[best].val_auc;
  s.test_auc = fits[best].test_auc;
  s.test_accuracy = fits[best].test_accuracy;
  return s;
}

Eigen::MatrixXd take_rows(const Eigen::MatrixXd& X, const std::vector<std::size_t>& rows) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), X.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = X.row(static_cast<Eigen::Index>(rows[i]));
  return out;
}

std::vector<int> take_labels(const ProbingDataset& d, const std::vector<std::size_t>& rows) {
  std::vector<int> out;
  out.reserve(rows.size());
  for (auto r : rows) out.push_back(d.instances[r].label);
  return out;
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

}  // namespace

LayerScore tune_regularization(const SplitView<Eigen::MatrixXd>& view, int arity, const ProbeConfig& config) {
  return tune_impl(view, arity, config);
}

LayerScore tune_regularization(const SplitView<SparseMatrix>& view, int arity, const ProbeConfig& config) {
  return tune_impl(view, arity, config);
}

SplitView<Eigen::MatrixXd> split_rows(const ProbingDataset& dataset, const Eigen::MatrixXd& X) {
  if (static_cast<std::size_t>(X.rows()) != dataset.instances.size()) {
    throw ShapeError("feature rows do not match dataset instances");
  }
  SplitView<Eigen::MatrixXd> v;
  const auto tr = dataset.indices(Split::Train);
  const auto dv = dataset.indices(Split::Dev);
  const auto te = dataset.indices(Split::Test);
  v.train = take_rows(X, tr);
  v.dev = take_rows(X, dv);
  v.test = take_rows(X, te);
  v.y_train = take_labels(dataset, tr);
  v.y_dev = take_labels(dataset, dv);
  v.y_test = take_labels(dataset, te);
  return v;
}

ProbeResult layer_sweep(const ProbingDataset& dataset, const RepSet& repset, const ProbeConfig& config) {
  config.validate();
  validate_binding(repset, dataset);
  const std::size_t n_layers = repset.header.n_layers;
  std::vector<SplitView<Eigen::MatrixXd>> views(n_layers);
  for (std::size_t l = 0; l < n_layers; ++l) {
    views[l] = split_rows(dataset, slice_layer(repset, l));
    check_view(views[l]);
  }
  const std::size_t g = config.l2_grid.size();
  std::vector<Fit> fits(n_layers * g);
  ProbeConfig inner = config;
  inner.jobs = 1;
  parallel_for(fits.size(), config.jobs, [&](std::size_t i) {
    fits[i] = evaluate_c(views[i / g], dataset.arity, config.l2_grid[i % g], inner);
  });

  ProbeResult r;
  r.model_id = repset.header.model_id;
  r.instance = std::string(instance_name(repset.header.instance));
  r.task = dataset.task;
  r.language = dataset.language;
  r.pooling = std::string(pooling_name(repset.header.pooling));
  for (std::size_t l = 0; l < n_layers; ++l) {
    std::vector<Fit> layer_fits(fits.begin() + static_cast<std::ptrdiff_t>(l * g),
                                fits.begin() + static_cast<std::ptrdiff_t>((l + 1) * g));
    const std::size_t best = pick_c(config.l2_grid, layer_fits);
    r.layers.push_back({l, config.l2_grid[best], layer_fits[best].val_auc, layer_fits[best].test_auc,
                        layer_fits[best].test_accuracy});
  }
  return r;
}

void NeuronProbeConfig::validate() const {
  if (l1_grid.empty() || l2_grid.empty()) throw ConfigError("elastic-net grids must be non-empty");
  for (double v : l1_grid) {
    if (!(v >= 0.0)) throw ConfigError("elastic-net lambdas must be non-negative");
  }
  for (double v : l2_grid) {
    if (!(v >= 0.0)) throw ConfigError("elastic-net lambdas must be non-negative");
  }
  if (!(top_fraction > 0.0 && top_fraction <= 1.0)) throw ConfigError("top_fraction must be in (0, 1]");
}

Saliency rank_neurons(const LinearProbe& probe) {
  const Eigen::Index d = probe.weights.cols();
  Saliency s;
  s.values.resize(static_cast<std::size_t>(d));
  double total = 0.0;
  for (Eigen::Index j = 0; j < d; ++j) {
    s.values[static_cast<std::size_t>(j)] = probe.weights.col(j).cwiseAbs().maxCoeff();
    total += s.values[static_cast<std::size_t>(j)];
  }
  for (auto& v : s.values) v = total > 0.0 ? v / total : 1.0 / static_cast<double>(d);
  s.order.resize(static_cast<std::size_t>(d));
  std::iota(s.order.begin(), s.order.end(), std::size_t{0});
  std::stable_sort(s.order.begin(), s.order.end(),
                   [&](std::size_t a, std::size_t b) { return s.values[a] > s.values[b]; });
  return s;
}

std::vector<std::size_t> top_neurons(const Saliency& saliency, double fraction) {
  if (!(fraction > 0.0 && fraction <= 1.0)) throw ConfigError("fraction must be in (0, 1]");
  const double exact = fraction * static_cast<double>(saliency.order.size());
  auto k = static_cast<std::size_t>(std::ceil(exact - 1e-9));
  k = std::min(k, saliency.order.size());
  return {saliency.order.begin(), saliency.order.begin() + static_cast<std::ptrdiff_t>(k)};
}

std::vector<std::size_t> top_neurons_cumulative(const LinearProbe& probe, double mass_fraction) {
  if (!(mass_fraction > 0.0 && mass_fraction <= 1.0)) throw ConfigError("mass fraction must be in (0, 1]");
  const Eigen::Index d = probe.weights.cols();
  std::vector<bool> chosen(static_cast<std::size_t>(d), false);
  for (Eigen::Index c = 0; c < probe.weights.rows(); ++c) {
    std::vector<std::size_t> order(static_cast<std::size_t>(d));
    std::iota(order.begin(), order.end(), std::size_t{0});
    auto mag = [&](std::size_t j) { return std::abs(probe.weights(c, static_cast<Eigen::Index>(j))); };
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return mag(a) > mag(b); });
    const double total = probe.weights.row(c).cwiseAbs().sum();
    if (total <= 0.0) continue;
    double acc = 0.0;
    for (std::size_t j : order) {
      if (acc >= mass_fraction * total) break;
      chosen[j] = true;
      acc += mag(j);
    }
  }
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < chosen.size(); ++j) {
    if (chosen[j]) out.push_back(j);
  }
  return out;
}

std::vector<std::size_t> per_layer_counts(std::span<const std::size_t> neurons, std::size_t n_layers,
                                          std::size_t hidden_size) {
  std::vector<std::size_t> counts(n_layers, 0);
  for (std::size_t j : neurons) {
    const std::size_t layer = j / hidden_size;
    if (layer >= n_layers) throw BoundsError("neuron index " + std::to_string(j) + " beyond the last layer");
    ++counts[layer];
  }
  return counts;
}

NeuronReport neuron_sweep(const ProbingDataset& dataset, const RepSet& repset, const NeuronProbeConfig& config) {
  config.validate();
  validate_binding(repset, dataset);
  const auto view = split_rows(dataset, concat_layers(repset));
  check_view(view);

  const std::size_t g1 = config.l1_grid.size();
  const std::size_t g2 = config.l2_grid.size();
  std::vector<LinearProbe> probes(g1 * g2);
  std::vector<double> val(g1 * g2);
  parallel_for(probes.size(), config.jobs, [&](std::size_t i) {
    probes[i] = fit_elastic_net(view.train, view.y_train, config.l1_grid[i / g2], config.l2_grid[i % g2],
                                config.optimizer, dataset.arity);
    val[i] = macro_ovr_auc(predict_scores(probes[i], view.dev), view.y_dev);
  });
  std::size_t best = 0;
  for (std::size_t i = 1; i < val.size(); ++i) {
    if (val[i] > val[best]) best = i;
  }
  const LinearProbe& probe = probes[best];

  NeuronReport r;
  r.model_id = repset.header.model_id;
  r.instance = std::string(instance_name(repset.header.instance));
  r.task = dataset.task;
  r.language = dataset.language;
  r.n_layers = repset.header.n_layers;
  r.hidden_size = repset.header.hidden_size;
  r.l1 = config.l1_grid[best / g2];
  r.l2 = config.l2_grid[best % g2];
  r.val_auc = val[best];
  r.test_auc = macro_ovr_auc(predict_scores(probe, view.test), view.y_test);
  Saliency s = rank_neurons(probe);
  r.saliency = s.values;
  r.top_set = config.mode == SaliencyMode::MaxAbs ? top_neurons(s, config.top_fraction)
                                                   : top_neurons_cumulative(probe, config.top_fraction);
  r.per_layer_counts = per_layer_counts(r.top_set, r.n_layers, r.hidden_size);
  return r;
}

std::string probe_result_json(const ProbeResult& r) {
  nlohmann::ordered_json j;
  j["model_id"] = r.model_id;
  j["instance"] = r.instance;
  j["task"] = r.task;
  j["language"] = r.language;
  j["pooling"] = r.pooling;
  j["metric"] = "macro-ovr-roc-auc";
  j["mean_test_auc"] = r.mean_test_auc();
  auto layers = nlohmann::ordered_json::array();
  for (const auto& l : r.layers) {
    nlohmann::ordered_json e;
    e["layer"] = l.layer;
    e["chosen_reg"] = l.chosen_reg;
    e["val_auc"] = l.val_auc;
    e["test_auc"] = l.test_auc;
    e["test_accuracy"] = l.test_accuracy;
    layers.push_back(e);
  }
  j["layers"] = layers;
  return j.dump(2) + "\n";
}

ProbeResult parse_probe_result_json(const std::string& text) {
  try {
    auto j = nlohmann::json::parse(text);
    ProbeResult r;
    r.model_id = j.at("model_id").get<std::string>();
    r.instance = j.at("instance").get<std::string>();
    r.task = j.at("task").get<std::string>();
    r.language = j.at("language").get<std::string>();
    r.pooling = j.value("pooling", "");
    for (const auto& e : j.at("layers")) {
      r.layers.push_back({e.at("layer").get<std::size_t>(), e.at("chosen_reg").get<double>(),
                          e.at("val_auc").get<double>(), e.at("test_auc").get<double>(),
                          e.value("test_accuracy", 0.0)});
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed probe report: ") + e.what());
  }
}

std::string probe_result_csv(const ProbeResult& r) {
  std::string out = "layer,chosen_reg,val_auc,test_auc\n";
  for (const auto& l : r.layers) {
    out += std::to_string(l.layer) + "," + fmt("%g", l.chosen_reg) + "," + fmt("%.6f", l.val_auc) + "," +
           fmt("%.6f", l.test_auc) + "\n";
  }
  return out;
}

std::string neuron_report_json(const NeuronReport& r) {
  nlohmann::ordered_json j;
  j["model_id"] = r.model_id;
  j["instance"] = r.instance;
  j["task"] = r.task;
  j["language"] = r.language;
  j["n_layers"] = r.n_layers;
  j["hidden_size"] = r.hidden_size;
  j["l1"] = r.l1;
  j["l2"] = r.l2;
  j["val_auc"] = r.val_auc;
  j["test_auc"] = r.test_auc;
  j["top_count"] = r.top_set.size();
  j["per_layer_counts"] = r.per_layer_counts;
  j["top_set"] = r.top_set;
  j["saliency"] = r.saliency;
  return j.dump(2) + "\n";
}

std::string neuron_report_csv(const NeuronReport& r) {
  std::string out = "layer,top_neuron_count\n";
  for (std::size_t l = 0; l < r.per_layer_counts.size(); ++l) {
    out += std::to_string(l) + "," + std::to_string(r.per_layer_counts[l]) + "\n";
  }
  return out;
}

}  // namespace morphcall
