#include "textseam/metrics.hpp"

#include <cstdlib>
#include <ostream>

#include "textseam/error.hpp"

namespace textseam {

EvalReport compute_metrics(std::span<const std::pair<int, int>> pairs, std::string fold_tag) {
  if (pairs.empty()) throw ValidationError("compute_metrics: no predictions");
  EvalReport report;
  report.fold_tag = std::move(fold_tag);
  std::size_t exact = 0, soft = 0;
  double sq = 0.0;
  for (const auto& [truth, pred] : pairs) {
    if (truth < 0 || truth >= kNumLabels || pred < 0 || pred >= kNumLabels)
      throw ValidationError("compute_metrics: label outside [0,9]");
    const int diff = pred - truth;
    exact += diff == 0;
    soft += std::abs(diff) <= 1;
    sq += static_cast<double>(diff * diff);
    ++report.confusion[static_cast<std::size_t>(truth)][static_cast<std::size_t>(pred)];
  }
  const double n = static_cast<double>(pairs.size());
  report.n = pairs.size();
  report.acc = static_cast<double>(exact) / n;
  report.soft_acc1 = static_cast<double>(soft) / n;
  report.mse = sq / n;
  return report;
}

double relative_change(double a, double b) { return b == 0.0 ? 0.0 : (a - b) / b; }

void write_confusion_csv(const ConfusionMatrix& confusion, std::ostream& out) {
  for (const auto& row : confusion) {
    for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << row[c];
    out << '\n';
  }
}

}  // namespace textseam
