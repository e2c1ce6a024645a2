#pragma once

// Serial reference implementations of the kernels in kernels.hpp. Kept for
// testing and benchmarking; results must match the parallel versions.

#include <optional>
#include <span>
#include <vector>

#include "textseam/matrix.hpp"
#include "textseam/tda.hpp"

namespace textseam::reference {

Matrix pairwise_sq_distances(const PointCloud& cloud);
double prim_mst_length(const PointCloud& cloud, double alpha);
std::vector<std::optional<double>> tle_point_estimates(const PointCloud& cloud, const TleOptions& options);
Matrix gak_gram(std::span<const std::vector<double>> series, double sigma);
Matrix gak_cross_gram(std::span<const std::vector<double>> rows, std::span<const std::vector<double>> cols,
                      double sigma);

}  // namespace textseam::reference
