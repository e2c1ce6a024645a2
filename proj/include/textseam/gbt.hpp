#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "textseam/matrix.hpp"
#include "textseam/types.hpp"

namespace textseam {

enum class GbtMode { regression, binary, multiclass };

std::string_view to_string(GbtMode mode);
GbtMode parse_gbt_mode(std::string_view text);

struct GbtOptions {
  GbtMode mode = GbtMode::multiclass;
  std::size_t n_classes = kNumLabels;  // multiclass only
  std::size_t trees = 200;             // boosting rounds
  std::size_t depth = 3;
  double learning_rate = 0.1;
  double subsample = 1.0;  // row fraction per round, drawn with `seed`
  std::size_t min_samples_leaf = 1;
  std::uint64_t seed = 0;
};

// Binary regression tree; a row goes left when x[feature] <= threshold.
struct RegressionTree {
  struct Node {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;
  };
  std::vector<Node> nodes;

  double predict(std::span<const double> x) const;
  std::size_t depth() const;
};

struct GbtModel {
  GbtMode mode = GbtMode::multiclass;
  std::size_t n_classes = kNumLabels;
  std::size_t dim = 0;
  double learning_rate = 0.1;
  std::vector<double> base_score;                // one entry, or one per class
  std::vector<std::vector<RegressionTree>> rounds;  // per round: one tree, or one per class
  std::vector<double> train_loss;                // after each round

  // Additive scores: one (regression, binary) or n_classes (multiclass).
  std::vector<double> raw_scores(std::span<const double> x) const;
  double predict_value(std::span<const double> x) const;        // regression
  double predict_probability(std::span<const double> x) const;  // binary: sigmoid of the score
  std::vector<double> predict_proba(std::span<const double> x) const;
  // Multiclass argmax (ties to the smaller class) or binary p >= 0.5.
  int predict_class(std::span<const double> x) const;
};

// Friedman gradient boosting. Regression fits squared-error residuals with
// mean leaves; binary and multiclass fit log-loss residuals with one Newton
// step per leaf (multiclass: one tree per class per round). Splits are exact
// greedy over sorted feature values. Deterministic given options.seed.
GbtModel gbt_fit(const Matrix& x, std::span<const double> y, const GbtOptions& options = {});

}  // namespace textseam
