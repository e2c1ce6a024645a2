#pragma once

// OpenMP-parallel kernels. Each has a serial twin in textseam::reference
// (reference.hpp) that tests compare against and textseam_bench times.

#include <optional>
#include <span>
#include <vector>

#include "textseam/matrix.hpp"
#include "textseam/tda.hpp"

namespace textseam::kernels {

// Below this many points Prim's relaxation loop stays serial.
inline constexpr std::size_t kParallelPrimThreshold = 256;

// n x n squared Euclidean distances; rows computed in parallel.
Matrix pairwise_sq_distances(const PointCloud& cloud);

// Prim's MST with a parallel relax-and-argmin step. Ties go to the lower index,
// so the tree and the summation order match the serial reference exactly.
double prim_mst_length(const PointCloud& cloud, double alpha);

// Per-point tight-locality estimates, parallel over points.
std::vector<std::optional<double>> tle_point_estimates(const PointCloud& cloud, const TleOptions& options);

// Global alignment kernel Gram matrices over value series, normalized so the
// diagonal of gak_gram is exactly 1. Parallel over (i, j) cells.
Matrix gak_gram(std::span<const std::vector<double>> series, double sigma);
Matrix gak_cross_gram(std::span<const std::vector<double>> rows, std::span<const std::vector<double>> cols,
                      double sigma);

}  // namespace textseam::kernels
