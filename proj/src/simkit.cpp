#include "morphcall/simkit.hpp"

#include <cstdio>
#include <set>

#include <json.hpp>

#include "morphcall/error.hpp"
#include "morphcall/parallel.hpp"

namespace morphcall {

Eigen::MatrixXd center_columns(const Eigen::MatrixXd& X) {
  if (X.rows() < 2) throw InputError("centering needs at least two rows");
  return X.rowwise() - X.colwise().mean();
}

double linear_cka(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y) {
  if (X.rows() != Y.rows()) {
    throw ShapeError("CKA inputs have " + std::to_string(X.rows()) + " and " + std::to_string(Y.rows()) + " rows");
  }
  const Eigen::MatrixXd xc = center_columns(X);
  const Eigen::MatrixXd yc = center_columns(Y);
  if (xc.isZero(0.0) || yc.isZero(0.0)) return 0.0;
  const double cross = (xc.transpose() * yc).squaredNorm();
  const double xx = (xc.transpose() * xc).norm();
  const double yy = (yc.transpose() * yc).norm();
  if (xx == 0.0 || yy == 0.0) return 0.0;
  return cross / (xx * yy);
}

Pairing make_pairing(const ProbingDataset& dataset) {
  std::map<std::string, std::size_t> originals;
  for (std::size_t i = 0; i < dataset.instances.size(); ++i) {
    const auto& inst = dataset.instances[i];
    if (inst.label == 0) originals.emplace(inst.id, i);
  }
  Pairing p;
  std::set<std::string> used;
  std::vector<std::string> unmatched;
  for (std::size_t i = 0; i < dataset.instances.size(); ++i) {
    const auto& inst = dataset.instances[i];
    if (inst.label != 1) continue;
    auto it = inst.meta.find("pair");
    auto orig = it == inst.meta.end() ? originals.end() : originals.find(it->second);
    if (orig == originals.end()) {
      unmatched.push_back(inst.id);
      continue;
    }
    p.rows.emplace_back(orig->second, i);
    used.insert(orig->first);
  }
  for (const auto& [id, row] : originals) {
    if (!used.count(id)) unmatched.push_back(id);
  }
  if (!unmatched.empty()) {
    std::string msg = "incomplete pairing, unmatched:";
    for (const auto& id : unmatched) msg += " " + id;
    throw InputError(msg);
  }
  if (p.rows.size() < 2) throw InputError("pairing needs at least two pairs");
  return p;
}

Pairing identity_pairing(std::size_t n) {
  Pairing p;
  for (std::size_t i = 0; i < n; ++i) p.rows.emplace_back(i, i);
  return p;
}

std::string combination_name(const Combination& c) {
  return std::string(instance_name(c.first)) + "," + std::string(instance_name(c.second));
}

namespace {

void check_pair(const RepSet& a, const RepSet& b, const Pairing& pairing) {
  if (a.header.pooling != Pooling::Cls || b.header.pooling != Pooling::Cls) {
    throw BindingError("similarity analysis needs cls-pooled representations");
  }
  if (a.header.n_layers != b.header.n_layers) {
    throw ShapeError("layer counts differ: " + std::to_string(a.header.n_layers) + " vs " +
                     std::to_string(b.header.n_layers));
  }
  if (a.header.n_samples != b.header.n_samples) throw ShapeError("repsets differ in sample count");
  for (const auto& [i, j] : pairing.rows) {
    if (i >= a.header.n_samples || j >= b.header.n_samples) throw BoundsError("pairing row beyond the repset");
  }
}

Eigen::MatrixXd gather(const RepSet& r, const Pairing& pairing, std::size_t layer, bool second) {
  const auto h = r.header.hidden_size;
  Eigen::MatrixXd out(static_cast<Eigen::Index>(pairing.rows.size()), static_cast<Eigen::Index>(h));
  for (std::size_t k = 0; k < pairing.rows.size(); ++k) {
    const std::size_t row = second ? pairing.rows[k].second : pairing.rows[k].first;
    for (std::size_t u = 0; u < h; ++u) {
      out(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(u)) = r.at(row, layer, u);
    }
  }
  return out;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

}  // namespace

SimCurve ckasim_curve(const RepSet& a, const RepSet& b, const Pairing& pairing, std::size_t jobs) {
  check_pair(a, b, pairing);
  SimCurve c;
  c.model_id = a.header.model_id;
  c.task = a.header.task_name;
  c.language = a.header.language;
  c.combination = {a.header.instance, b.header.instance};
  c.scores.resize(a.header.n_layers);
  parallel_for(c.scores.size(), jobs, [&](std::size_t l) {
    c.scores[l] = linear_cka(gather(a, pairing, l, false), gather(b, pairing, l, true));
  });
  return c;
}

std::vector<std::vector<double>> ckasim_matrix(const RepSet& a, const RepSet& b, const Pairing& pairing,
                                               std::size_t jobs) {
  check_pair(a, b, pairing);
  const std::size_t L = a.header.n_layers;
  std::vector<Eigen::MatrixXd> xs(L), ys(L);
  for (std::size_t l = 0; l < L; ++l) {
    xs[l] = gather(a, pairing, l, false);
    ys[l] = gather(b, pairing, l, true);
  }
  std::vector<std::vector<double>> m(L, std::vector<double>(L, 0.0));
  parallel_for(L * L, jobs, [&](std::size_t i) { m[i / L][i % L] = linear_cka(xs[i / L], ys[i % L]); });
  return m;
}

std::vector<Combination> instance_combinations(const std::map<ModelInstance, const RepSet*>& available) {
  for (auto inst : {ModelInstance::PreTrained, ModelInstance::FineTuned}) {
    auto it = available.find(inst);
    if (it == available.end() || it->second == nullptr) {
      throw InputError("missing " + std::string(instance_name(inst)) + " representations");
    }
  }
  return {{ModelInstance::PreTrained, ModelInstance::PreTrained},
          {ModelInstance::PreTrained, ModelInstance::FineTuned},
          {ModelInstance::FineTuned, ModelInstance::FineTuned}};
}

std::string sim_curves_json(const std::vector<SimCurve>& curves) {
  auto arr = nlohmann::ordered_json::array();
  for (const auto& c : curves) {
    nlohmann::ordered_json j;
    j["model_id"] = c.model_id;
    j["task"] = c.task;
    j["language"] = c.language;
    j["combination"] = combination_name(c.combination);
    j["scores"] = c.scores;
    if (!c.layer_matrix.empty()) j["layer_matrix"] = c.layer_matrix;
    arr.push_back(j);
  }
  return arr.dump(2) + "\n";
}

std::string sim_curves_csv(const std::vector<SimCurve>& curves) {
  std::string out = "combination,layer,score\n";
  for (const auto& c : curves) {
    for (std::size_t l = 0; l < c.scores.size(); ++l) {
      out += "\"" + combination_name(c.combination) + "\"," + std::to_string(l) + "," + num(c.scores[l]) + "\n";
    }
  }
  return out;
}

}  // namespace morphcall
