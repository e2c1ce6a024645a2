#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>

#include "textseam/types.hpp"

namespace textseam {

using ConfusionMatrix = std::array<std::array<std::size_t, kNumLabels>, kNumLabels>;  // [true][pred]

struct EvalReport {
  double acc = 0.0;
  double soft_acc1 = 0.0;
  double mse = 0.0;
  std::size_t n = 0;
  std::string fold_tag;
  ConfusionMatrix confusion{};
};

// Human guessing accuracy on RoFT, used for annotation only.
inline constexpr double kHumanAcc = 0.2262;
inline constexpr double kHumanSoftAcc1 = 0.4031;
inline constexpr double kHumanMse = 13.88;

// pairs are (true, predicted). Throws ValidationError on empty input or a label outside [0,9].
EvalReport compute_metrics(std::span<const std::pair<int, int>> pairs, std::string fold_tag = {});

// (a - b) / b, or 0 when b == 0.
double relative_change(double a, double b);

// 10 lines of 10 comma-separated counts; rows are true labels.
void write_confusion_csv(const ConfusionMatrix& confusion, std::ostream& out);

}  // namespace textseam
