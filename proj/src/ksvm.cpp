#include "textseam/ksvm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "textseam/error.hpp"

namespace textseam {

namespace {

constexpr double kTau = 1e-12;
constexpr double kInf = std::numeric_limits<double>::infinity();

bool in_up(double y, double a, double C) { return (y > 0 && a < C) || (y < 0 && a > 0); }
bool in_low(double y, double a, double C) { return (y > 0 && a > 0) || (y < 0 && a < C); }

}  // namespace

double BinarySvm::decision(std::span<const double> kernel_row) const {
  double f = bias;
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    if (alpha[i] != 0.0) f += alpha[i] * y[i] * kernel_row[i];
  }
  return f;
}

BinarySvm smo_train(const Matrix& gram, std::span<const double> y, const SmoOptions& options) {
  const std::size_t n = y.size();
  const double C = options.C;
  BinarySvm svm;
  svm.alpha.assign(n, 0.0);
  svm.y.assign(y.begin(), y.end());

  const bool any_pos = std::any_of(y.begin(), y.end(), [](double v) { return v > 0; });
  const bool any_neg = std::any_of(y.begin(), y.end(), [](double v) { return v < 0; });
  if (!any_pos || !any_neg) {
    svm.bias = any_pos ? 1.0 : -1.0;
    return svm;
  }

  auto Q = [&](std::size_t i, std::size_t j) { return y[i] * y[j] * gram(i, j); };
  std::vector<double> G(n, -1.0);
  std::vector<double>& a = svm.alpha;
  const std::size_t cap = options.max_iterations ? options.max_iterations : std::max<std::size_t>(100000, 100 * n);

  svm.converged = false;
  for (std::size_t iter = 0; iter < cap; ++iter) {
    double gmax = -kInf;
    std::size_t i = n;
    for (std::size_t t = 0; t < n; ++t) {
      if (in_up(y[t], a[t], C) && -y[t] * G[t] > gmax) {
        gmax = -y[t] * G[t];
        i = t;
      }
    }
    double gmin = kInf, best = kInf;
    std::size_t j = n;
    for (std::size_t t = 0; t < n; ++t) {
      if (!in_low(y[t], a[t], C)) continue;
      const double v = -y[t] * G[t];
      gmin = std::min(gmin, v);
      if (i == n || v >= gmax) continue;
      const double b = gmax - v;
      double quad = Q(i, i) + Q(t, t) - 2.0 * y[i] * y[t] * Q(i, t);
      if (quad <= 0) quad = kTau;
      const double obj = -(b * b) / quad;
      if (obj < best) {
        best = obj;
        j = t;
      }
    }
    svm.iterations = iter;
    if (i == n || j == n || gmax - gmin < options.tolerance) {
      svm.converged = true;
      break;
    }

    const double old_ai = a[i], old_aj = a[j];
    if (y[i] != y[j]) {
      double quad = Q(i, i) + Q(j, j) + 2.0 * Q(i, j);
      if (quad <= 0) quad = kTau;
      const double delta = (-G[i] - G[j]) / quad;
      const double diff = a[i] - a[j];
      a[i] += delta;
      a[j] += delta;
      if (diff > 0) {
        if (a[j] < 0) {
          a[j] = 0;
          a[i] = diff;
        }
      } else if (a[i] < 0) {
        a[i] = 0;
        a[j] = -diff;
      }
      if (diff > 0) {
        if (a[i] > C) {
          a[i] = C;
          a[j] = C - diff;
        }
      } else if (a[j] > C) {
        a[j] = C;
        a[i] = C + diff;
      }
    } else {
      double quad = Q(i, i) + Q(j, j) - 2.0 * Q(i, j);
      if (quad <= 0) quad = kTau;
      const double delta = (G[i] - G[j]) / quad;
      const double sum = a[i] + a[j];
      a[i] -= delta;
      a[j] += delta;
      if (sum > C) {
        if (a[i] > C) {
          a[i] = C;
          a[j] = sum - C;
        }
      } else if (a[j] < 0) {
        a[j] = 0;
        a[i] = sum;
      }
      if (sum > C) {
        if (a[j] > C) {
          a[j] = C;
          a[i] = sum - C;
        }
      } else if (a[i] < 0) {
        a[i] = 0;
        a[j] = sum;
      }
    }
    const double di = a[i] - old_ai, dj = a[j] - old_aj;
    for (std::size_t t = 0; t < n; ++t) G[t] += Q(t, i) * di + Q(t, j) * dj;
  }

  double ub = kInf, lb = -kInf, sum_free = 0.0;
  std::size_t n_free = 0;
  for (std::size_t t = 0; t < n; ++t) {
    const double yg = y[t] * G[t];
    if (a[t] >= C) {
      if (y[t] < 0) ub = std::min(ub, yg);
      else lb = std::max(lb, yg);
    } else if (a[t] <= 0) {
      if (y[t] > 0) ub = std::min(ub, yg);
      else lb = std::max(lb, yg);
    } else {
      ++n_free;
      sum_free += yg;
    }
  }
  const double rho = n_free > 0 ? sum_free / static_cast<double>(n_free) : 0.5 * (ub + lb);
  svm.bias = -rho;
  return svm;
}

double max_kkt_violation(const Matrix& gram, std::span<const double> y, std::span<const double> alpha, double C) {
  const std::size_t n = y.size();
  double gmax = -kInf, gmin = kInf;
  for (std::size_t t = 0; t < n; ++t) {
    double g = -1.0;
    for (std::size_t s = 0; s < n; ++s) g += y[t] * y[s] * gram(t, s) * alpha[s];
    const double v = -y[t] * g;
    if (in_up(y[t], alpha[t], C)) gmax = std::max(gmax, v);
    if (in_low(y[t], alpha[t], C)) gmin = std::min(gmin, v);
  }
  if (gmax == -kInf || gmin == kInf) return 0.0;
  return std::max(0.0, gmax - gmin);
}

std::vector<double> KsvmModel::decision_values(std::span<const double> kernel_row) const {
  std::vector<double> out(present.size(), -kInf);
  for (std::size_t c = 0; c < present.size(); ++c) {
    if (present[c]) out[c] = machines[c].decision(kernel_row);
  }
  return out;
}

int KsvmModel::predict(std::span<const double> kernel_row) const {
  const auto d = decision_values(kernel_row);
  return static_cast<int>(std::max_element(d.begin(), d.end()) - d.begin());
}

KsvmModel ksvm_fit(const Matrix& gram, std::span<const int> y, const SmoOptions& options) {
  if (!(options.C > 0.0)) throw ConfigError("ksvm: C must be positive");
  if (!(options.tolerance > 0.0)) throw ConfigError("ksvm: tolerance must be positive");
  const std::size_t n = y.size();
  if (n == 0) throw ValidationError("ksvm: empty training set");
  if (gram.rows() != n || gram.cols() != n) throw ValidationError("ksvm: gram must be n x n for n labels");
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      const double a = gram(i, j), b = gram(j, i);
      if (!std::isfinite(a)) throw ValidationError("ksvm: non-finite gram entry");
      if (std::abs(a - b) > 1e-9 * std::max({1.0, std::abs(a), std::abs(b)}))
        throw ValidationError("ksvm: gram is not symmetric");
    }
  }
  for (int label : y) {
    if (label < 0 || label >= kNumLabels) throw ValidationError("ksvm: label out of range");
  }

  KsvmModel model;
  model.C = options.C;
  model.present.assign(kNumLabels, 0);
  model.machines.resize(kNumLabels);
  for (int label : y) model.present[static_cast<std::size_t>(label)] = 1;
  std::vector<double> yb(n);
  for (int c = 0; c < kNumLabels; ++c) {
    if (!model.present[static_cast<std::size_t>(c)]) continue;
    for (std::size_t i = 0; i < n; ++i) yb[i] = y[i] == c ? 1.0 : -1.0;
    model.machines[static_cast<std::size_t>(c)] = smo_train(gram, yb, options);
    model.converged = model.converged && model.machines[static_cast<std::size_t>(c)].converged;
  }
  return model;
}

std::vector<double> GakSvmModel::prepare(std::span<const double> values) const {
  if (standardize) return scaler.apply(values);
  return {values.begin(), values.end()};
}

int GakSvmModel::predict(std::span<const double> values) const {
  const auto v = prepare(values);
  const double self = gak_log(v, v, sigma);
  std::vector<double> row(train_series.size());
  for (std::size_t j = 0; j < train_series.size(); ++j) {
    const auto& t = train_series[j];
    row[j] = std::exp(gak_log(v, t, sigma) - 0.5 * (self + gak_log(t, t, sigma)));
  }
  return svm.predict(row);
}

}  // namespace textseam
