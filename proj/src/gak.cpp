#include <cmath>
#include <limits>
#include <vector>

#include "textseam/error.hpp"
#include "textseam/series.hpp"

namespace textseam {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// log(e^up + e^left + e^diag). up and left are added first so swapping the two
// series (which swaps up and left) gives a bit-identical result.
double log_sum3(double up, double left, double diag) {
  const double m = std::max(up, std::max(left, diag));
  if (m == kNegInf) return kNegInf;
  return m + std::log((std::exp(up - m) + std::exp(left - m)) + std::exp(diag - m));
}

}  // namespace

double gak_log(std::span<const double> a, std::span<const double> b, double sigma) {
  if (a.empty() || b.empty()) throw ValidationError("gak: series must be nonempty");
  if (!(sigma > 0.0)) throw ValidationError("gak: sigma must be positive");
  const double inv_two_sigma2 = 1.0 / (2.0 * sigma * sigma);

  std::vector<double> prev(b.size() + 1, kNegInf), cur(b.size() + 1, kNegInf);
  prev[0] = 0.0;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = kNegInf;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const double diff = a[i - 1] - b[j - 1];
      const double phi = diff * diff * inv_two_sigma2;
      const double log_local = -phi - std::log(2.0 - std::exp(-phi));
      cur[j] = log_local + log_sum3(prev[j], cur[j - 1], prev[j - 1]);
    }
    std::swap(prev, cur);
    prev[0] = kNegInf;
  }
  return prev[b.size()];
}

double gak(std::span<const double> a, std::span<const double> b, double sigma) {
  const double ab = gak_log(a, b, sigma);
  const double aa = gak_log(a, a, sigma);
  const double bb = gak_log(b, b, sigma);
  return std::exp(ab - 0.5 * (aa + bb));
}

}  // namespace textseam
