#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "morphcall/dataset.hpp"
#include "morphcall/repstore.hpp"

namespace morphcall {

// Subtracts each column's mean. InputError when n < 2.
Eigen::MatrixXd center_columns(const Eigen::MatrixXd& X);

// Linear CKA on column-centered inputs; 0 if either centered matrix is all zero.
double linear_cka(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y);

// Row pairs (original row, perturbed row) into the dataset the repsets were
// extracted from.
struct Pairing {
  std::vector<std::pair<std::size_t, std::size_t>> rows;
};

// Pairs every perturbed instance with the original named by meta["pair"].
// InputError listing the ids left without a partner.
Pairing make_pairing(const ProbingDataset& dataset);
Pairing identity_pairing(std::size_t n);

using Combination = std::pair<ModelInstance, ModelInstance>;
std::string combination_name(const Combination& c);  // e.g. "pre-trained,fine-tuned"

struct SimCurve {
  std::string model_id;
  std::string task;
  std::string language;
  Combination combination{ModelInstance::PreTrained, ModelInstance::PreTrained};
  std::vector<double> scores;  // one per layer
  // Optional full [n_layers x n_layers] matrix, row = layer of A.
  std::vector<std::vector<double>> layer_matrix;
};

// score[l] = linear_cka(A originals at layer l, B perturbed at layer l).
SimCurve ckasim_curve(const RepSet& a, const RepSet& b, const Pairing& pairing, std::size_t jobs = 1);
// Every layer of A against every layer of B.
std::vector<std::vector<double>> ckasim_matrix(const RepSet& a, const RepSet& b, const Pairing& pairing,
                                               std::size_t jobs = 1);

// (pre, pre), (pre, fine), (fine, fine). InputError naming a missing instance.
std::vector<Combination> instance_combinations(const std::map<ModelInstance, const RepSet*>& available);

std::string sim_curves_json(const std::vector<SimCurve>& curves);
std::string sim_curves_csv(const std::vector<SimCurve>& curves);

}  // namespace morphcall
