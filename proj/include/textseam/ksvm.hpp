#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "textseam/matrix.hpp"
#include "textseam/series.hpp"
#include "textseam/types.hpp"

namespace textseam {

struct SmoOptions {
  double C = 1.0;
  double tolerance = 1e-3;       // stop when the maximal KKT violation drops below this
  std::size_t max_iterations = 0;  // 0: max(100000, 100 n)
};

// Two-class soft-margin dual over a precomputed kernel; y in {-1, +1}.
// decision(x) = sum_i alpha_i y_i K(i, x) + bias.
struct BinarySvm {
  std::vector<double> alpha;
  std::vector<double> y;
  double bias = 0.0;
  bool converged = true;
  std::size_t iterations = 0;

  double decision(std::span<const double> kernel_row) const;
};

// libsvm-style SMO with second-order working-set selection. A problem whose
// labels all share one sign gets alpha = 0 and bias = that sign.
BinarySvm smo_train(const Matrix& gram, std::span<const double> y, const SmoOptions& options = {});

// Largest violation of the dual KKT conditions (max over I_up of -y G minus min
// over I_low of -y G), recomputed from scratch. 0 when either set is empty.
double max_kkt_violation(const Matrix& gram, std::span<const double> y, std::span<const double> alpha, double C);

// One-vs-rest over kNumLabels classes. Classes absent from training never win.
struct KsvmModel {
  double C = 1.0;
  std::vector<char> present;         // per class
  std::vector<BinarySvm> machines;   // per class; empty machine for absent classes
  bool converged = true;

  // Decision value per class (-infinity for absent classes).
  std::vector<double> decision_values(std::span<const double> kernel_row) const;
  // Argmax of decision_values; ties go to the smaller class.
  int predict(std::span<const double> kernel_row) const;
};

// Throws ValidationError for a non-square or asymmetric gram, a size mismatch
// or labels outside [0,9], and ConfigError for C <= 0. The gram is not
// eigen-checked for positive semi-definiteness.
KsvmModel ksvm_fit(const Matrix& gram, std::span<const int> y, const SmoOptions& options = {});

// One-vs-rest SVM over the global alignment kernel of ID series. Series are
// z-scored with `scaler` (when `standardize`) before any kernel evaluation.
struct GakSvmModel {
  KsvmModel svm;
  double sigma = 1.0;
  bool standardize = true;
  SeriesScaler scaler;
  std::vector<std::vector<double>> train_series;  // already scaled

  std::vector<double> prepare(std::span<const double> values) const;
  int predict(std::span<const double> values) const;
};

}  // namespace textseam
