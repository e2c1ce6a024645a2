#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "textseam/matrix.hpp"

namespace textseam {

// n points in R^d, row-major. Invariants: n >= 2, d >= 1, all coordinates finite.
class PointCloud {
 public:
  PointCloud(std::size_t n, std::size_t dim, std::vector<double> coords);
  static PointCloud from_floats(std::size_t n, std::size_t dim, std::span<const float> coords);

  std::size_t size() const noexcept { return n_; }
  std::size_t dim() const noexcept { return dim_; }
  std::span<const double> point(std::size_t i) const noexcept { return {coords_.data() + i * dim_, dim_}; }
  const std::vector<double>& coords() const noexcept { return coords_; }

  PointCloud subset(std::span<const std::size_t> idx) const;

 private:
  std::size_t n_;
  std::size_t dim_;
  std::vector<double> coords_;
};

double squared_distance(std::span<const double> a, std::span<const double> b) noexcept;

// Keeps the first copy of each exactly repeated point. Throws NumericError if
// fewer than two distinct points remain.
PointCloud collapse_duplicates(const PointCloud& cloud);

// Sum over Euclidean MST edges of length^alpha (alpha = 1: total MST length,
// the degree-0 persistence mass). Dense Prim, exact distances. All-identical
// clouds give 0.
double euclidean_mst_length(const PointCloud& cloud, double alpha = 1.0);

struct PhdOptions {
  double alpha = 1.0;
  std::vector<std::size_t> schedule;  // subset sizes; empty selects default_phd_schedule(n)
  std::size_t resamples = 3;
  std::uint64_t seed = 0;
};

// 8 sizes evenly spaced from max(8, ceil(0.1 n)) to n, deduplicated. Small
// clouds start at max(4, n/2) instead. Throws ValidationError when fewer than
// two distinct sizes are possible (n < 5).
std::vector<std::size_t> default_phd_schedule(std::size_t n);

struct PhdFit {
  std::vector<std::size_t> sizes;
  std::vector<double> mass;  // median E_alpha per size
  double slope = 0.0;        // least-squares slope of log mass against log size
  double dimension = 0.0;    // alpha / (1 - slope)
};

// Persistent-homology fractal dimension from the growth of E_alpha with the
// subset size. Subsets are uniform without replacement, drawn by index from a
// generator seeded with options.seed. Throws NumericError "degenerate cloud"
// when a median mass is 0 and "divergent dimension" when slope >= 1 - 1e-9.
PhdFit phd_fit(const PointCloud& cloud, const PhdOptions& options = {});
inline double phd(const PointCloud& cloud, const PhdOptions& options = {}) {
  return phd_fit(cloud, options).dimension;
}

struct TleOptions {
  std::size_t k = 20;
  // Include the center point in the neighborhood set (V* = V + {x}).
  bool include_center = true;
};

// Tight-locality estimate for one point, given the squared distance matrix.
// Returns nullopt when the neighborhood is degenerate or the estimate is not a
// positive finite number.
std::optional<double> tle_point_estimate(const PointCloud& cloud, const Matrix& sq_dist, std::size_t point,
                                         const TleOptions& options);

// Mean of the per-point tight-locality estimates. Requires k >= 2 and
// n >= k + 2; throws NumericError "no valid neighborhoods" if every point is skipped.
double tle(const PointCloud& cloud, const TleOptions& options = {});

}  // namespace textseam
