#include "textseam/logreg.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "textseam/error.hpp"

namespace textseam {

namespace {

void softmax_inplace(std::vector<double>& z) {
  const double m = *std::max_element(z.begin(), z.end());
  double sum = 0.0;
  for (double& v : z) {
    v = std::exp(v - m);
    sum += v;
  }
  for (double& v : z) v /= sum;
}

void linear_logits(const Matrix& weights, std::span<const double> x, std::vector<double>& out) {
  const std::size_t dim = x.size();
  out.resize(weights.rows());
  for (std::size_t c = 0; c < weights.rows(); ++c) {
    auto w = weights.row(c);
    double z = w[dim];
    for (std::size_t f = 0; f < dim; ++f) z += w[f] * x[f];
    out[c] = z;
  }
}

}  // namespace

Standardizer Standardizer::fit(const Matrix& x) {
  Standardizer s;
  s.mean.assign(x.cols(), 0.0);
  s.stddev.assign(x.cols(), 1.0);
  if (x.rows() == 0) return s;
  const double n = static_cast<double>(x.rows());
  for (std::size_t c = 0; c < x.cols(); ++c) {
    double sum = 0.0;
    for (std::size_t r = 0; r < x.rows(); ++r) sum += x(r, c);
    const double mean = sum / n;
    double ss = 0.0;
    for (std::size_t r = 0; r < x.rows(); ++r) ss += (x(r, c) - mean) * (x(r, c) - mean);
    const double sd = std::sqrt(ss / n);
    s.mean[c] = mean;
    s.stddev[c] = sd > 1e-12 ? sd : 1.0;
  }
  return s;
}

void Standardizer::apply_row(std::span<const double> in, std::span<double> out) const {
  for (std::size_t c = 0; c < in.size(); ++c) out[c] = (in[c] - mean[c]) / stddev[c];
}

Matrix Standardizer::apply(const Matrix& x) const {
  Matrix out(x.rows(), x.cols());
  for (std::size_t r = 0; r < x.rows(); ++r) apply_row(x.row(r), out.row(r));
  return out;
}

std::vector<double> LogRegModel::logits(std::span<const double> features) const {
  std::vector<double> x(features.size());
  standardizer.apply_row(features, x);
  std::vector<double> z;
  linear_logits(weights, x, z);
  return z;
}

std::vector<double> LogRegModel::predict_proba(std::span<const double> features) const {
  auto z = logits(features);
  softmax_inplace(z);
  return z;
}

int LogRegModel::predict(std::span<const double> features) const {
  const auto z = logits(features);
  return static_cast<int>(std::max_element(z.begin(), z.end()) - z.begin());
}

double logreg_objective(const Matrix& weights, const Matrix& x_std, std::span<const int> y, double l2,
                        Matrix* gradient) {
  const std::size_t n = x_std.rows(), dim = x_std.cols(), k = weights.rows();
  if (gradient) *gradient = Matrix(k, dim + 1);
  double loss = 0.0;
  std::vector<double> p;
  for (std::size_t i = 0; i < n; ++i) {
    auto x = x_std.row(i);
    linear_logits(weights, x, p);
    const double m = *std::max_element(p.begin(), p.end());
    double sum = 0.0;
    for (double v : p) sum += std::exp(v - m);
    const double log_norm = m + std::log(sum);
    loss -= p[static_cast<std::size_t>(y[i])] - log_norm;
    if (!gradient) continue;
    for (std::size_t c = 0; c < k; ++c) {
      const double g = std::exp(p[c] - log_norm) - (static_cast<int>(c) == y[i] ? 1.0 : 0.0);
      auto gr = gradient->row(c);
      for (std::size_t f = 0; f < dim; ++f) gr[f] += g * x[f];
      gr[dim] += g;
    }
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  loss *= inv_n;
  double penalty = 0.0;
  for (std::size_t c = 0; c < k; ++c) {
    for (std::size_t f = 0; f < dim; ++f) penalty += weights(c, f) * weights(c, f);
  }
  loss += 0.5 * l2 * penalty;
  if (gradient) {
    for (std::size_t c = 0; c < k; ++c) {
      for (std::size_t f = 0; f <= dim; ++f) {
        double& g = (*gradient)(c, f);
        g *= inv_n;
        if (f < dim) g += l2 * weights(c, f);
      }
    }
  }
  return loss;
}

LogRegModel logreg_fit(const Matrix& x, std::span<const int> y, const LogRegOptions& options) {
  if (x.rows() != y.size()) throw ValidationError("logreg: rows(X) != len(y)");
  if (x.rows() < 10) throw ValidationError("logreg: need at least 10 training rows");
  if (options.n_classes < 2) throw ConfigError("logreg: need at least 2 classes");
  if (options.epochs < 1) throw ConfigError("logreg: epochs must be positive");
  if (!(options.learning_rate > 0.0)) throw ConfigError("logreg: learning rate must be positive");
  if (!(options.l2 >= 0.0)) throw ConfigError("logreg: l2 must be non-negative");
  for (double v : x.data()) {
    if (!std::isfinite(v)) throw ValidationError("logreg: non-finite feature");
  }
  for (int label : y) {
    if (label < 0 || static_cast<std::size_t>(label) >= options.n_classes)
      throw ValidationError("logreg: label " + std::to_string(label) + " out of range");
  }

  LogRegModel model;
  model.n_classes = options.n_classes;
  model.dim = x.cols();
  model.standardizer = Standardizer::fit(x);
  const Matrix x_std = model.standardizer.apply(x);

  model.weights = Matrix(options.n_classes, x.cols() + 1);
  std::mt19937_64 rng(options.seed);
  std::normal_distribution<double> init(0.0, 0.01);
  for (double& w : model.weights.data()) w = init(rng);

  Matrix grad;
  for (std::size_t epoch = 0; epoch < options.epochs; ++epoch) {
    const double loss = logreg_objective(model.weights, x_std, y, options.l2, &grad);
    if (!std::isfinite(loss)) throw NumericError("logreg: non-finite loss at epoch " + std::to_string(epoch));
    auto& w = model.weights.data();
    const auto& g = grad.data();
    for (std::size_t i = 0; i < w.size(); ++i) w[i] -= options.learning_rate * g[i];
  }
  return model;
}

}  // namespace textseam
