#include <cmath>
#include <numeric>

#include "../oracles.hpp"
#include "doctest.h"
#include "morphcall/error.hpp"
#include "morphcall/metrics.hpp"
#include "morphcall/probe.hpp"

using namespace morphcall;

TEST_SUITE("probe") {
  TEST_CASE("objective gradients match central differences") {
    Rng rng(31);
    for (int trial = 0; trial < 20; ++trial) {
      auto p = testing::gradient_problem(rng);
      CHECK(testing::logistic_gradient_error(p, 0.5) < 1e-4);
      CHECK(testing::elastic_gradient_error(p, 0.01, 0.1) < 1e-4);
    }
  }

  TEST_CASE("separable data is ranked perfectly") {
    Rng rng(1);
    const int n = 200;
    Eigen::MatrixXd X = testing::gaussian(rng, n, 2);
    std::vector<int> y(n);
    for (int i = 0; i < n; ++i) y[static_cast<std::size_t>(i)] = X(i, 0) > 0 ? 1 : 0;
    auto p = fit_logreg(X, y, 1.0, ProbeConfig{});
    CHECK(p.classes == 2);
    CHECK(macro_ovr_auc(predict_scores(p, X), y) == 1.0);
  }

  TEST_CASE("random labels score at chance") {
    Rng rng(2);
    const int n = 2000;
    Eigen::MatrixXd X = testing::gaussian(rng, n, 5);
    Eigen::MatrixXd T = testing::gaussian(rng, n, 5);
    std::vector<int> y(n), yt(n);
    for (int i = 0; i < n; ++i) {
      y[static_cast<std::size_t>(i)] = static_cast<int>(rng.below(2));
      yt[static_cast<std::size_t>(i)] = static_cast<int>(rng.below(2));
    }
    auto p = fit_logreg(X, y, 1.0, ProbeConfig{});
    double auc = macro_ovr_auc(predict_scores(p, T), yt);
    CHECK(auc >= 0.45);
    CHECK(auc <= 0.55);
  }

  TEST_CASE("softmax scores") {
    LinearProbe p;
    p.weights = Eigen::MatrixXd::Zero(3, 4);
    p.bias = Eigen::VectorXd::Zero(3);
    p.classes = 3;
    Rng rng(3);
    Eigen::MatrixXd X = testing::gaussian(rng, 5, 4);
    auto s = predict_scores(p, X);
    CHECK((s.array() - 1.0 / 3).abs().maxCoeff() < 1e-15);

    Eigen::MatrixXd logits = testing::gaussian(rng, 6, 3);
    auto a = softmax_rows(logits);
    auto b = softmax_rows((logits.array() + 17.5).matrix());
    CHECK((a - b).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((a.rowwise().sum().array() - 1.0).abs().maxCoeff() < 1e-9);

    Eigen::MatrixXd two = testing::gaussian(rng, 6, 2);
    auto t = softmax_rows(two);
    for (Eigen::Index i = 0; i < two.rows(); ++i) {
      CHECK(std::abs(t(i, 1) - 1.0 / (1.0 + std::exp(two(i, 0) - two(i, 1)))) < 1e-12);
    }
    CHECK_THROWS_AS(predict_scores(p, testing::gaussian(rng, 2, 3)), ShapeError);
  }

  TEST_CASE("input validation") {
    Eigen::MatrixXd X = Eigen::MatrixXd::Ones(4, 2);
    CHECK_THROWS_AS(fit_logreg(X, std::vector<int>{1, 1, 1, 1}, 1.0, ProbeConfig{}), InputError);
    X(0, 0) = std::nan("");
    CHECK_THROWS_AS(fit_logreg(X, std::vector<int>{0, 1, 0, 1}, 1.0, ProbeConfig{}), InputError);
    ProbeConfig bad;
    bad.l2_grid = {};
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad.l2_grid = {1.0, -2.0};
    CHECK_THROWS_AS(bad.validate(), ConfigError);
  }

  TEST_CASE("train statistics only") {
    Rng rng(4);
    Eigen::MatrixXd X = (testing::gaussian(rng, 50, 3).array() * 4.0 + 2.0).matrix();
    auto st = Standardizer::fit(X);
    auto Z = st.apply(X);
    CHECK(Z.colwise().mean().cwiseAbs().maxCoeff() < 1e-12);
    Eigen::MatrixXd C = Eigen::MatrixXd::Constant(5, 2, 3.0);
    CHECK(Standardizer::fit(C).apply(C).cwiseAbs().maxCoeff() == 0.0);
  }

  TEST_CASE("unregularized elastic net matches logistic regression") {
    Rng rng(5);
    Eigen::MatrixXd X;
    std::vector<int> y;
    testing::noisy_logistic(rng, 300, 4, X, y);
    ProbeConfig pc;
    pc.max_iterations = 5000;
    pc.tolerance = 1e-10;
    auto lr = fit_logreg(X, y, 1e12, pc);
    ElasticNetConfig ec;
    ec.max_iterations = 20000;
    ec.tolerance = 1e-10;
    auto en = fit_elastic_net(X, y, 0.0, 0.0, ec);
    CHECK(std::abs(testing::probe_mean_nll(lr, X, y) - testing::probe_mean_nll(en, X, y)) < 1e-3);
  }

  TEST_CASE("strong L1 zeroes the weights") {
    Rng rng(6);
    Eigen::MatrixXd X;
    std::vector<int> y;
    testing::noisy_logistic(rng, 300, 20, X, y);
    auto en = fit_elastic_net(X, y, 10.0, 0.0, ElasticNetConfig{});
    CHECK(testing::small_weight_fraction(en, 1e-6) >= 0.9);
  }

  TEST_CASE("the informative coordinate gets the largest weight") {
    Rng rng(7);
    const int n = 400;
    Eigen::MatrixXd X = testing::gaussian(rng, n, 8);
    std::vector<int> y(n);
    for (int i = 0; i < n; ++i) y[static_cast<std::size_t>(i)] = X(i, 5) > 0 ? 1 : 0;
    auto en = fit_elastic_net(X, y, 1e-3, 1e-3, ElasticNetConfig{});
    Eigen::Index best = 0;
    en.weights.cwiseAbs().colwise().maxCoeff().maxCoeff(&best);
    CHECK(best == 5);
  }

  TEST_CASE("sparse and dense fits agree without standardization") {
    Rng rng(8);
    Eigen::MatrixXd X;
    std::vector<int> y;
    testing::noisy_logistic(rng, 120, 3, X, y);
    ProbeConfig pc;
    pc.standardize = false;
    auto dense = fit_logreg(X, y, 1.0, pc);
    SparseMatrix S = X.sparseView();
    auto sparse = fit_logreg(S, y, 1.0, pc);
    CHECK((dense.weights - sparse.weights).cwiseAbs().maxCoeff() < 1e-5);
    CHECK((predict_scores(dense, X) - predict_scores(sparse, S)).cwiseAbs().maxCoeff() < 1e-5);
  }

  TEST_CASE("fits are deterministic") {
    Rng rng(9);
    Eigen::MatrixXd X;
    std::vector<int> y;
    testing::noisy_logistic(rng, 100, 3, X, y);
    auto a = fit_logreg(X, y, 2.0, ProbeConfig{});
    auto b = fit_logreg(X, y, 2.0, ProbeConfig{});
    CHECK(a.weights == b.weights);
    CHECK(a.bias == b.bias);
  }
}
