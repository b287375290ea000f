#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

namespace morphcall {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

// Per-column affine transform fitted on training rows only. Zero-variance
// columns get unit scale, so they map to zero.
struct Standardizer {
  Eigen::RowVectorXd mean;
  Eigen::RowVectorXd scale;

  static Standardizer fit(const Eigen::MatrixXd& X);
  static Standardizer identity(Eigen::Index d);
  Eigen::MatrixXd apply(const Eigen::MatrixXd& X) const;
  bool empty() const { return mean.size() == 0; }
};

struct Regularization {
  enum class Kind { L2, ElasticNet } kind = Kind::L2;
  double c = 1.0;   // inverse L2 strength for Kind::L2
  double l1 = 0.0;  // elastic-net lambdas
  double l2 = 0.0;
};

// Multinomial linear classifier. Binary problems use k = 2 softmax rows.
struct LinearProbe {
  Eigen::MatrixXd weights;  // k x d, acting on standardized inputs
  Eigen::VectorXd bias;     // k
  int classes = 2;
  Standardizer standardizer;  // empty when inputs were not standardized
  Regularization regularization;
  std::size_t iterations = 0;
  bool converged = false;

  Eigen::Index dim() const { return weights.cols(); }
};

struct ProbeConfig {
  // Inverse regularization strengths C; the L2 penalty is 1/(2C)·||W||².
  std::vector<double> l2_grid{0.25, 0.5, 1.0, 2.0, 4.0};
  std::size_t max_iterations = 500;
  double tolerance = 1e-6;  // on the gradient norm, relative to its initial value
  std::uint64_t seed = 42;
  bool standardize = true;
  std::size_t jobs = 1;

  void validate() const;
};

struct ElasticNetConfig {
  std::size_t max_iterations = 3000;
  double tolerance = 1e-6;
  bool standardize = true;
};

// Total multinomial NLL plus 1/(2C)·||W||² (bias unpenalized). X is used as
// given. Fills the gradients when the pointers are non-null.
double logistic_objective(const Eigen::MatrixXd& X, std::span<const int> y, const Eigen::MatrixXd& W,
                          const Eigen::VectorXd& b, double C, Eigen::MatrixXd* grad_W = nullptr,
                          Eigen::VectorXd* grad_b = nullptr);

// Mean multinomial NLL plus l1·||W||₁ + (l2/2)·||W||². The W gradient includes
// l1·sign(W), which is the true gradient wherever no weight is exactly zero.
double elastic_net_objective(const Eigen::MatrixXd& X, std::span<const int> y, const Eigen::MatrixXd& W,
                             const Eigen::VectorXd& b, double l1, double l2, Eigen::MatrixXd* grad_W = nullptr,
                             Eigen::VectorXd* grad_b = nullptr);

// Mean multinomial NLL only.
double mean_nll(const Eigen::MatrixXd& X, std::span<const int> y, const Eigen::MatrixXd& W, const Eigen::VectorXd& b);

// classes = 0 infers k from the largest label.
LinearProbe fit_logreg(const Eigen::MatrixXd& X, std::span<const int> y, double C, const ProbeConfig& config,
                       int classes = 0);
// Sparse inputs are never standardized.
LinearProbe fit_logreg(const SparseMatrix& X, std::span<const int> y, double C, const ProbeConfig& config,
                       int classes = 0);

LinearProbe fit_elastic_net(const Eigen::MatrixXd& X, std::span<const int> y, double l1, double l2,
                            const ElasticNetConfig& config, int classes = 0);

// Softmax class probabilities [n x k].
Eigen::MatrixXd predict_scores(const LinearProbe& probe, const Eigen::MatrixXd& X);
Eigen::MatrixXd predict_scores(const LinearProbe& probe, const SparseMatrix& X);

// Row-wise softmax of a logit matrix.
Eigen::MatrixXd softmax_rows(const Eigen::MatrixXd& logits);

}  // namespace morphcall
