#include "morphcall/probe.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

#include "morphcall/error.hpp"

namespace morphcall {

Standardizer Standardizer::fit(const Eigen::MatrixXd& X) {
  Standardizer s;
  const double n = static_cast<double>(X.rows());
  s.mean = X.colwise().mean();
  s.scale.resize(X.cols());
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    const double var = n > 0 ? (X.col(j).array() - s.mean(j)).square().sum() / n : 0.0;
    const double sd = std::sqrt(var);
    s.scale(j) = sd > 1e-12 ? sd : 1.0;
  }
  return s;
}

Standardizer Standardizer::identity(Eigen::Index d) {
  Standardizer s;
  s.mean = Eigen::RowVectorXd::Zero(d);
  s.scale = Eigen::RowVectorXd::Ones(d);
  return s;
}

Eigen::MatrixXd Standardizer::apply(const Eigen::MatrixXd& X) const {
  if (X.cols() != mean.size()) throw ShapeError("standardizer dimension mismatch");
  return (X.rowwise() - mean).array().rowwise() / scale.array();
}

void ProbeConfig::validate() const {
  if (l2_grid.empty()) throw ConfigError("probe regularization grid is empty");
  for (double c : l2_grid) {
    if (!(c > 0.0) || !std::isfinite(c)) throw ConfigError("probe regularization values must be positive");
  }
  if (max_iterations == 0) throw ConfigError("max_iterations must be positive");
  if (!(tolerance > 0.0)) throw ConfigError("tolerance must be positive");
}

Eigen::MatrixXd softmax_rows(const Eigen::MatrixXd& logits) {
  Eigen::MatrixXd p = logits;
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    const double m = p.row(i).maxCoeff();
    p.row(i) = (p.row(i).array() - m).exp();
    p.row(i) /= p.row(i).sum();
  }
  return p;
}

namespace {

// Sum of multinomial NLL over rows; gradients are sums as well.
template <typename XT>
double softmax_nll(const XT& X, std::span<const int> y, const Eigen::MatrixXd& W, const Eigen::VectorXd& b,
                   Eigen::MatrixXd* grad_W, Eigen::VectorXd* grad_b) {
  Eigen::MatrixXd z = X * W.transpose();
  z.rowwise() += b.transpose();
  double loss = 0.0;
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    const double m = z.row(i).maxCoeff();
    const double lse = m + std::log((z.row(i).array() - m).exp().sum());
    loss += lse - z(i, y[static_cast<std::size_t>(i)]);
    if (grad_W || grad_b) {
      z.row(i) = (z.row(i).array() - lse).exp();
      z(i, y[static_cast<std::size_t>(i)]) -= 1.0;
    }
  }
  if (grad_W) *grad_W = (z.transpose() * X);
  if (grad_b) *grad_b = z.colwise().sum().transpose();
  return loss;
}

void check_labels(std::span<const int> y, Eigen::Index n, int& classes) {
  if (static_cast<Eigen::Index>(y.size()) != n) throw InputError("label count does not match row count");
  if (y.empty()) throw InputError("no training rows");
  int max_label = 0;
  for (int v : y) {
    if (v < 0) throw InputError("negative label");
    max_label = std::max(max_label, v);
  }
  if (classes == 0) classes = std::max(2, max_label + 1);
  if (max_label >= classes) throw InputError("label outside [0, k)");
  std::vector<bool> seen(static_cast<std::size_t>(classes), false);
  int distinct = 0;
  for (int v : y) {
    if (!seen[static_cast<std::size_t>(v)]) {
      seen[static_cast<std::size_t>(v)] = true;
      ++distinct;
    }
  }
  if (distinct < 2) throw InputError("training labels contain a single class");
  if (n < classes) throw InputError("fewer rows than classes");
}

void check_finite(const Eigen::MatrixXd& X) {
  if (!X.allFinite()) throw InputError("non-finite value in input matrix");
}

void check_finite(const SparseMatrix& X) {
  for (Eigen::Index i = 0; i < X.nonZeros(); ++i) {
    if (!std::isfinite(X.valuePtr()[i])) throw InputError("non-finite value in input matrix");
  }
}

struct MinimizeResult {
  Eigen::VectorXd x;
  std::size_t iterations = 0;
  bool converged = false;
};

// Limited-memory BFGS with Armijo backtracking. Stops when the gradient norm
// falls to tol times its initial value (or below tol in absolute terms).
template <typename F>
MinimizeResult lbfgs(F&& f, Eigen::VectorXd x, std::size_t max_iter, double tol) {
  constexpr std::size_t kHistory = 10;
  Eigen::VectorXd g(x.size());
  double fx = f(x, g);
  const double g0 = std::max(1.0, g.norm());
  std::deque<Eigen::VectorXd> s_hist, y_hist;
  std::deque<double> rho_hist;
  MinimizeResult res;
  Eigen::VectorXd x_new(x.size()), g_new(x.size());
  for (std::size_t it = 0; it < max_iter; ++it) {
    if (g.norm() <= tol * g0) {
      res.converged = true;
      break;
    }
    // Two-loop recursion.
    Eigen::VectorXd q = -g;
    std::vector<double> alpha(s_hist.size());
    for (std::size_t i = s_hist.size(); i-- > 0;) {
      alpha[i] = rho_hist[i] * s_hist[i].dot(q);
      q -= alpha[i] * y_hist[i];
    }
    if (!s_hist.empty()) {
      q *= s_hist.back().dot(y_hist.back()) / y_hist.back().squaredNorm();
    } else {
      q /= g.norm();
    }
    for (std::size_t i = 0; i < s_hist.size(); ++i) {
      const double beta = rho_hist[i] * y_hist[i].dot(q);
      q += (alpha[i] - beta) * s_hist[i];
    }
    double slope = g.dot(q);
    if (slope >= 0.0) {
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
      q = -g / g.norm();
      slope = g.dot(q);
    }
    double step = 1.0;
    double f_new = 0.0;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      x_new = x + step * q;
      f_new = f(x_new, g_new);
      if (std::isfinite(f_new) && f_new <= fx + 1e-4 * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    res.iterations = it + 1;
    if (!accepted) break;
    Eigen::VectorXd s = x_new - x;
    Eigen::VectorXd yv = g_new - g;
    const double sy = s.dot(yv);
    const bool stalled = std::abs(fx - f_new) <= 1e-15 * std::max(1.0, std::abs(fx));
    x = x_new;
    g = g_new;
    fx = f_new;
    if (sy > 1e-12 * yv.squaredNorm()) {
      s_hist.push_back(std::move(s));
      y_hist.push_back(std::move(yv));
      rho_hist.push_back(1.0 / sy);
      if (s_hist.size() > kHistory) {
        s_hist.pop_front();
        y_hist.pop_front();
        rho_hist.pop_front();
      }
    }
    if (stalled) {
      res.converged = g.norm() <= tol * g0 * 10.0;
      break;
    }
  }
  if (!res.converged) res.converged = g.norm() <= tol * g0;
  res.x = std::move(x);
  return res;
}

template <typename XT>
LinearProbe fit_logreg_impl(const XT& X, std::span<const int> y, double C, const ProbeConfig& config,
                            int classes, Standardizer standardizer) {
  const Eigen::Index k = classes;
  const Eigen::Index d = X.cols();
  auto objective = [&](const Eigen::VectorXd& theta, Eigen::VectorXd& grad) {
    Eigen::Map<const Eigen::MatrixXd> W(theta.data(), k, d);
    Eigen::Map<const Eigen::VectorXd> b(theta.data() + k * d, k);
    Eigen::MatrixXd gW;
    Eigen::VectorXd gb;
    double v = softmax_nll(X, y, W, b, &gW, &gb);
    v += 0.5 / C * W.squaredNorm();
    gW += W / C;
    grad.resize(theta.size());
    Eigen::Map<Eigen::MatrixXd>(grad.data(), k, d) = gW;
    grad.tail(k) = gb;
    return v;
  };
  auto res = lbfgs(objective, Eigen::VectorXd::Zero(k * d + k), config.max_iterations, config.tolerance);
  LinearProbe probe;
  probe.classes = classes;
  probe.weights = Eigen::Map<const Eigen::MatrixXd>(res.x.data(), k, d);
  probe.bias = res.x.tail(k);
  probe.standardizer = std::move(standardizer);
  probe.regularization = {Regularization::Kind::L2, C, 0.0, 0.0};
  probe.iterations = res.iterations;
  probe.converged = res.converged;
  if (!probe.weights.allFinite() || !probe.bias.allFinite()) throw InputError("optimizer produced non-finite weights");
  return probe;
}

}  // namespace

double logistic_objective(const Eigen::MatrixXd& X, std::span<const int> y, const Eigen::MatrixXd& W,
                          const Eigen::VectorXd& b, double C, Eigen::MatrixXd* grad_W, Eigen::VectorXd* grad_b) {
  double v = softmax_nll(X, y, W, b, grad_W, grad_b);
  v += 0.5 / C * W.squaredNorm();
  if (grad_W) *grad_W += W / C;
  return v;
}

double elastic_net_objective(const Eigen::MatrixXd& X, std::span<const int> y, const Eigen::MatrixXd& W,
                             const Eigen::VectorXd& b, double l1, double l2, Eigen::MatrixXd* grad_W,
                             Eigen::VectorXd* grad_b) {
  const double n = static_cast<double>(X.rows());
  double v = softmax_nll(X, y, W, b, grad_W, grad_b) / n;
  v += l1 * W.cwiseAbs().sum() + 0.5 * l2 * W.squaredNorm();
  if (grad_W) {
    *grad_W /= n;
    *grad_W += l2 * W;
    *grad_W += l1 * W.unaryExpr([](double w) { return double((w > 0) - (w < 0)); });
  }
  if (grad_b) *grad_b /= n;
  return v;
}

double mean_nll(const Eigen::MatrixXd& X, std::span<const int> y, const Eigen::MatrixXd& W, const Eigen::VectorXd& b) {
  return softmax_nll(X, y, W, b, nullptr, nullptr) / static_cast<double>(X.rows());
}

LinearProbe fit_logreg(const Eigen::MatrixXd& X, std::span<const int> y, double C, const ProbeConfig& config,
                       int classes) {
  if (!(C > 0.0)) throw ConfigError("C must be positive");
  check_labels(y, X.rows(), classes);
  check_finite(X);
  if (config.standardize) {
    Standardizer st = Standardizer::fit(X);
    const Eigen::MatrixXd Z = st.apply(X);
    return fit_logreg_impl(Z, y, C, config, classes, std::move(st));
  }
  return fit_logreg_impl(X, y, C, config, classes, Standardizer{});
}

LinearProbe fit_logreg(const SparseMatrix& X, std::span<const int> y, double C, const ProbeConfig& config,
                       int classes) {
  if (!(C > 0.0)) throw ConfigError("C must be positive");
  check_labels(y, X.rows(), classes);
  check_finite(X);
  return fit_logreg_impl(X, y, C, config, classes, Standardizer{});
}

LinearProbe fit_elastic_net(const Eigen::MatrixXd& X_raw, std::span<const int> y, double l1, double l2,
                            const ElasticNetConfig& config, int classes) {
  if (l1 < 0.0 || l2 < 0.0) throw ConfigError("elastic-net lambdas must be non-negative");
  check_labels(y, X_raw.rows(), classes);
  check_finite(X_raw);
  Standardizer st = config.standardize ? Standardizer::fit(X_raw) : Standardizer{};
  const Eigen::MatrixXd X = config.standardize ? st.apply(X_raw) : X_raw;
  const Eigen::Index k = classes;
  const Eigen::Index d = X.cols();
  const double n = static_cast<double>(X.rows());

  auto smooth = [&](const Eigen::MatrixXd& W, const Eigen::VectorXd& b, Eigen::MatrixXd* gW, Eigen::VectorXd* gb) {
    double v = softmax_nll(X, y, W, b, gW, gb) / n + 0.5 * l2 * W.squaredNorm();
    if (gW) *gW = *gW / n + l2 * W;
    if (gb) *gb /= n;
    return v;
  };
  auto soft_threshold = [](const Eigen::MatrixXd& M, double t) {
    return M.unaryExpr([t](double w) { return w > t ? w - t : (w < -t ? w + t : 0.0); }).eval();
  };

  // FISTA with backtracking and function-value restarts.
  Eigen::MatrixXd W = Eigen::MatrixXd::Zero(k, d), yW = W;
  Eigen::VectorXd b = Eigen::VectorXd::Zero(k), yb = b;
  double F = smooth(W, b, nullptr, nullptr) + l1 * W.cwiseAbs().sum();
  double t = 1.0;
  double L = 1.0;
  double ref = -1.0;
  LinearProbe probe;
  Eigen::MatrixXd gW;
  Eigen::VectorXd gb;
  for (std::size_t it = 0; it < config.max_iterations; ++it) {
    probe.iterations = it + 1;
    const double fy = smooth(yW, yb, &gW, &gb);
    L = std::max(L / 1.5, 1e-8);
    Eigen::MatrixXd zW;
    Eigen::VectorXd zb;
    double fz = 0.0;
    for (int bt = 0; bt < 80; ++bt) {
      zW = soft_threshold(yW - gW / L, l1 / L);
      zb = yb - gb / L;
      fz = smooth(zW, zb, nullptr, nullptr);
      const double dist = (zW - yW).squaredNorm() + (zb - yb).squaredNorm();
      const double lin = (gW.cwiseProduct(zW - yW)).sum() + gb.dot(zb - yb);
      if (fz <= fy + lin + 0.5 * L * dist + 1e-12 * std::abs(fy)) break;
      L *= 2.0;
    }
    const double step_norm = L * std::sqrt((zW - yW).squaredNorm() + (zb - yb).squaredNorm());
    if (ref < 0.0) ref = std::max(1.0, step_norm);
    const double Fz = fz + l1 * zW.cwiseAbs().sum();
    if (Fz > F) {
      // Momentum overshot; restart from the current iterate.
      t = 1.0;
      yW = W;
      yb = b;
      continue;
    }
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    const double mom = (t - 1.0) / t_next;
    yW = zW + mom * (zW - W);
    yb = zb + mom * (zb - b);
    W = std::move(zW);
    b = std::move(zb);
    F = Fz;
    t = t_next;
    if (step_norm <= config.tolerance * ref) {
      probe.converged = true;
      break;
    }
  }
  probe.classes = classes;
  probe.weights = std::move(W);
  probe.bias = std::move(b);
  probe.standardizer = std::move(st);
  probe.regularization = {Regularization::Kind::ElasticNet, 0.0, l1, l2};
  if (!probe.weights.allFinite()) throw InputError("optimizer produced non-finite weights");
  return probe;
}

Eigen::MatrixXd predict_scores(const LinearProbe& probe, const Eigen::MatrixXd& X) {
  if (X.cols() != probe.dim()) {
    throw ShapeError("input has " + std::to_string(X.cols()) + " columns, probe expects " + std::to_string(probe.dim()));
  }
  Eigen::MatrixXd logits = (probe.standardizer.empty() ? X : probe.standardizer.apply(X)) * probe.weights.transpose();
  logits.rowwise() += probe.bias.transpose();
  return softmax_rows(logits);
}

Eigen::MatrixXd predict_scores(const LinearProbe& probe, const SparseMatrix& X) {
  if (X.cols() != probe.dim()) {
    throw ShapeError("input has " + std::to_string(X.cols()) + " columns, probe expects " + std::to_string(probe.dim()));
  }
  if (!probe.standardizer.empty()) throw InputError("probe was trained on standardized dense inputs");
  Eigen::MatrixXd logits = X * probe.weights.transpose();
  logits.rowwise() += probe.bias.transpose();
  return softmax_rows(logits);
}

}  // namespace morphcall
