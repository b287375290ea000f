#pragma once

#include <span>

#include <Eigen/Dense>

namespace morphcall {

// Area under the ROC curve, P(s+ > s-) + P(tie)/2, from mid-ranks. Labels are
// 0/1; throws InputError unless both classes are present.
double roc_auc(std::span<const double> scores, std::span<const int> labels);

// Unweighted mean of one-vs-rest AUCs over the k score columns. For k = 2 this
// is exactly the binary AUC of column 1. Throws InputError if a class is absent.
double macro_ovr_auc(const Eigen::MatrixXd& scores, std::span<const int> labels);

// Fraction of rows whose argmax (first maximum) equals the label.
double accuracy(const Eigen::MatrixXd& scores, std::span<const int> labels);

}  // namespace morphcall
