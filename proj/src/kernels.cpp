#include "textseam/kernels.hpp"

#include <cmath>
#include <limits>

#include "textseam/error.hpp"
#include "textseam/parallel.hpp"
#include "textseam/series.hpp"

namespace textseam::kernels {

namespace {

struct Candidate {
  double dist = std::numeric_limits<double>::infinity();
  std::size_t index = 0;
  bool better_than(const Candidate& o) const { return dist < o.dist || (dist == o.dist && index < o.index); }
};

}  // namespace

Matrix pairwise_sq_distances(const PointCloud& cloud) {
  const std::size_t n = cloud.size();
  Matrix out(n, n);
  const long long count = static_cast<long long>(n);
#pragma omp parallel for schedule(static) num_threads(max_threads())
  for (long long i = 0; i < count; ++i) {
    const auto row = static_cast<std::size_t>(i);
    for (std::size_t j = 0; j < n; ++j) out(row, j) = squared_distance(cloud.point(row), cloud.point(j));
  }
  return out;
}

double prim_mst_length(const PointCloud& cloud, double alpha) {
  const std::size_t n = cloud.size();
  const long long count = static_cast<long long>(n);
  std::vector<double> best(n, std::numeric_limits<double>::infinity());
  std::vector<char> in_tree(n, 0);
  in_tree[0] = 1;
  std::size_t current = 0;
  double total = 0.0;
  const bool parallel = n >= kParallelPrimThreshold;

  for (std::size_t added = 1; added < n; ++added) {
    Candidate next{std::numeric_limits<double>::infinity(), n};
#pragma omp parallel if (parallel) num_threads(max_threads())
    {
      Candidate local{std::numeric_limits<double>::infinity(), n};
#pragma omp for schedule(static) nowait
      for (long long v = 0; v < count; ++v) {
        const auto idx = static_cast<std::size_t>(v);
        if (in_tree[idx]) continue;
        const double d = std::sqrt(squared_distance(cloud.point(current), cloud.point(idx)));
        if (d < best[idx]) best[idx] = d;
        const Candidate c{best[idx], idx};
        if (c.better_than(local)) local = c;
      }
#pragma omp critical(textseam_prim_argmin)
      {
        if (local.better_than(next)) next = local;
      }
    }
    in_tree[next.index] = 1;
    total += alpha == 1.0 ? next.dist : std::pow(next.dist, alpha);
    current = next.index;
  }
  return total;
}

std::vector<std::optional<double>> tle_point_estimates(const PointCloud& cloud, const TleOptions& options) {
  const Matrix dist = pairwise_sq_distances(cloud);
  std::vector<std::optional<double>> out(cloud.size());
  parallel_for(cloud.size(), [&](std::size_t i) { out[i] = tle_point_estimate(cloud, dist, i, options); });
  return out;
}

Matrix gak_gram(std::span<const std::vector<double>> series, double sigma) {
  const std::size_t n = series.size();
  std::vector<double> self(n);
  parallel_for(n, [&](std::size_t i) { self[i] = gak_log(series[i], series[i], sigma); });
  Matrix gram(n, n);
  parallel_for(n, [&](std::size_t i) {
    gram(i, i) = 1.0;
    for (std::size_t j = i + 1; j < n; ++j) {
      const double k = std::exp(gak_log(series[i], series[j], sigma) - 0.5 * (self[i] + self[j]));
      gram(i, j) = k;
      gram(j, i) = k;
    }
  });
  return gram;
}

Matrix gak_cross_gram(std::span<const std::vector<double>> rows, std::span<const std::vector<double>> cols,
                      double sigma) {
  std::vector<double> row_self(rows.size()), col_self(cols.size());
  parallel_for(rows.size(), [&](std::size_t i) { row_self[i] = gak_log(rows[i], rows[i], sigma); });
  parallel_for(cols.size(), [&](std::size_t j) { col_self[j] = gak_log(cols[j], cols[j], sigma); });
  Matrix out(rows.size(), cols.size());
  parallel_for(rows.size(), [&](std::size_t i) {
    for (std::size_t j = 0; j < cols.size(); ++j)
      out(i, j) = std::exp(gak_log(rows[i], cols[j], sigma) - 0.5 * (row_self[i] + col_self[j]));
  });
  return out;
}

}  // namespace textseam::kernels
