#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "textseam/matrix.hpp"
#include "textseam/types.hpp"

namespace textseam {

// Per-feature z-scoring with training statistics; constant features get stddev 1.
struct Standardizer {
  std::vector<double> mean;
  std::vector<double> stddev;

  static Standardizer fit(const Matrix& x);
  Matrix apply(const Matrix& x) const;
  void apply_row(std::span<const double> in, std::span<double> out) const;
};

struct LogRegOptions {
  double l2 = 1e-3;
  std::size_t epochs = 500;
  double learning_rate = 1e-2;
  std::uint64_t seed = 0;
  std::size_t n_classes = kNumLabels;
};

// Multinomial logistic regression. weights is n_classes x (dim + 1); the last
// column is the bias.
struct LogRegModel {
  std::size_t n_classes = kNumLabels;
  std::size_t dim = 0;
  Matrix weights;
  Standardizer standardizer;

  std::vector<double> logits(std::span<const double> features) const;
  std::vector<double> predict_proba(std::span<const double> features) const;
  // Argmax of the logits; ties go to the smaller class.
  int predict(std::span<const double> features) const;
};

// Mean softmax cross-entropy plus (l2 / 2) * ||W||^2 over non-bias weights, for
// already standardized features. Fills `gradient` (same shape as weights) when given.
double logreg_objective(const Matrix& weights, const Matrix& x_std, std::span<const int> y, double l2,
                        Matrix* gradient = nullptr);

// Full-batch gradient descent from a small seeded random start. Throws
// ValidationError for shape problems and NumericError (with the epoch) if the
// loss becomes non-finite.
LogRegModel logreg_fit(const Matrix& x, std::span<const int> y, const LogRegOptions& options = {});

}  // namespace textseam
