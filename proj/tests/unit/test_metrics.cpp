#include <vector>

#include "../oracles.hpp"
#include "doctest.h"
#include "morphcall/error.hpp"
#include "morphcall/metrics.hpp"
#include "morphcall/rng.hpp"

using namespace morphcall;

using testing::pairwise_auc;

TEST_SUITE("metrics") {
  TEST_CASE("hand examples") {
    CHECK(roc_auc(std::vector<double>{0.1, 0.4, 0.35, 0.8}, std::vector<int>{0, 0, 1, 1}) == 0.75);
    CHECK(roc_auc(std::vector<double>{1, 2, 3, 4}, std::vector<int>{0, 0, 1, 1}) == 1.0);
    CHECK(roc_auc(std::vector<double>{4, 3, 2, 1}, std::vector<int>{0, 0, 1, 1}) == 0.0);
    CHECK(roc_auc(std::vector<double>{2, 2, 2, 2}, std::vector<int>{0, 1, 0, 1}) == 0.5);
    CHECK_THROWS_AS(roc_auc(std::vector<double>{1, 2}, std::vector<int>{1, 1}), InputError);
  }

  TEST_CASE("rank statistic equals pairwise counting") {
    Rng rng(2024);
    for (int trial = 0; trial < 1000; ++trial) {
      const std::size_t n = 2 + rng.below(49);
      std::vector<double> s(n);
      std::vector<int> y(n);
      for (std::size_t i = 0; i < n; ++i) {
        s[i] = static_cast<double>(rng.below(8)) / 4.0;
        y[i] = static_cast<int>(rng.below(2));
      }
      y[0] = 0;
      y[1] = 1;
      REQUIRE(roc_auc(s, y) == pairwise_auc(s, y));
    }
  }

  TEST_CASE("macro one-vs-rest") {
    Eigen::MatrixXd two(4, 2);
    two << 0.9, 0.1, 0.6, 0.4, 0.65, 0.35, 0.2, 0.8;
    std::vector<int> y{0, 0, 1, 1};
    CHECK(macro_ovr_auc(two, y) == roc_auc(std::vector<double>{0.1, 0.4, 0.35, 0.8}, y));

    Eigen::MatrixXd perfect = Eigen::MatrixXd::Identity(3, 3);
    CHECK(macro_ovr_auc(perfect, std::vector<int>{0, 1, 2}) == 1.0);
    CHECK_THROWS_AS(macro_ovr_auc(perfect, std::vector<int>{0, 1, 1}), InputError);

    Rng rng(17);
    const int n = 3000;
    Eigen::MatrixXd random(n, 3);
    std::vector<int> labels(n);
    for (int i = 0; i < n; ++i) {
      for (int c = 0; c < 3; ++c) random(i, c) = rng.uniform();
      labels[i] = i % 3;
    }
    CHECK(std::abs(macro_ovr_auc(random, labels) - 0.5) < 0.03);
  }

  TEST_CASE("accuracy uses the first maximum") {
    Eigen::MatrixXd s(3, 2);
    s << 0.5, 0.5, 0.2, 0.8, 0.9, 0.1;
    CHECK(accuracy(s, std::vector<int>{0, 1, 1}) == doctest::Approx(2.0 / 3));
  }
}
