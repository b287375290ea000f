#include "morphcall/metrics.hpp"

#include <algorithm>
#include <numeric>
#include <vector>

#include "morphcall/error.hpp"

namespace morphcall {

double roc_auc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw InputError("roc_auc: scores and labels differ in length");
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Twice the rank sum of positives; mid-ranks of tied groups are then
  // integers, which keeps the statistic exact.
  double twice_rank_sum = 0.0;
  double n_pos = 0.0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) ++j;
    const double twice_mid_rank = static_cast<double>(i + 1 + j + 1);
    for (std::size_t k = i; k <= j; ++k) {
      const int y = labels[order[k]];
      if (y != 0 && y != 1) throw InputError("roc_auc: labels must be 0 or 1");
      if (y == 1) {
        twice_rank_sum += twice_mid_rank;
        n_pos += 1.0;
      }
    }
    i = j + 1;
  }
  const double n_neg = static_cast<double>(n) - n_pos;
  if (n_pos == 0.0 || n_neg == 0.0) throw InputError("roc_auc: both classes must be present");
  const double twice_u = twice_rank_sum - n_pos * (n_pos + 1.0);
  return twice_u / (2.0 * n_pos * n_neg);
}

double macro_ovr_auc(const Eigen::MatrixXd& scores, std::span<const int> labels) {
  const auto k = scores.cols();
  if (static_cast<std::size_t>(scores.rows()) != labels.size()) {
    throw InputError("macro_ovr_auc: scores and labels differ in length");
  }
  if (k < 2) throw InputError("macro_ovr_auc: need at least two score columns");
  std::vector<double> col(labels.size());
  std::vector<int> bin(labels.size());
  auto class_auc = [&](Eigen::Index c) {
    for (std::size_t i = 0; i < labels.size(); ++i) {
      col[i] = scores(static_cast<Eigen::Index>(i), c);
      bin[i] = labels[i] == c ? 1 : 0;
    }
    return roc_auc(col, bin);
  };
  if (k == 2) {
    for (int y : labels) {
      if (y != 0 && y != 1) throw InputError("macro_ovr_auc: label outside [0, 2)");
    }
    return class_auc(1);
  }
  double sum = 0.0;
  for (Eigen::Index c = 0; c < k; ++c) sum += class_auc(c);
  return sum / static_cast<double>(k);
}

double accuracy(const Eigen::MatrixXd& scores, std::span<const int> labels) {
  if (labels.empty()) return 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    Eigen::Index best = 0;
    scores.row(static_cast<Eigen::Index>(i)).maxCoeff(&best);
    if (best == labels[i]) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(labels.size());
}

}  // namespace morphcall
