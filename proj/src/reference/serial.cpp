#include <cmath>
#include <limits>

#include "textseam/reference.hpp"
#include "textseam/series.hpp"

namespace textseam::reference {

Matrix pairwise_sq_distances(const PointCloud& cloud) {
  const std::size_t n = cloud.size();
  Matrix out(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) out(i, j) = squared_distance(cloud.point(i), cloud.point(j));
  }
  return out;
}

double prim_mst_length(const PointCloud& cloud, double alpha) {
  const std::size_t n = cloud.size();
  std::vector<double> best(n, std::numeric_limits<double>::infinity());
  std::vector<char> in_tree(n, 0);
  in_tree[0] = 1;
  std::size_t current = 0;
  double total = 0.0;
  for (std::size_t added = 1; added < n; ++added) {
    std::size_t next = n;
    for (std::size_t v = 0; v < n; ++v) {
      if (in_tree[v]) continue;
      const double d = std::sqrt(squared_distance(cloud.point(current), cloud.point(v)));
      if (d < best[v]) best[v] = d;
      if (next == n || best[v] < best[next]) next = v;
    }
    in_tree[next] = 1;
    total += alpha == 1.0 ? best[next] : std::pow(best[next], alpha);
    current = next;
  }
  return total;
}

std::vector<std::optional<double>> tle_point_estimates(const PointCloud& cloud, const TleOptions& options) {
  const Matrix dist = pairwise_sq_distances(cloud);
  std::vector<std::optional<double>> out(cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) out[i] = tle_point_estimate(cloud, dist, i, options);
  return out;
}

Matrix gak_gram(std::span<const std::vector<double>> series, double sigma) {
  const std::size_t n = series.size();
  std::vector<double> self(n);
  for (std::size_t i = 0; i < n; ++i) self[i] = gak_log(series[i], series[i], sigma);
  Matrix gram(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    gram(i, i) = 1.0;
    for (std::size_t j = i + 1; j < n; ++j) {
      const double k = std::exp(gak_log(series[i], series[j], sigma) - 0.5 * (self[i] + self[j]));
      gram(i, j) = k;
      gram(j, i) = k;
    }
  }
  return gram;
}

Matrix gak_cross_gram(std::span<const std::vector<double>> rows, std::span<const std::vector<double>> cols,
                      double sigma) {
  std::vector<double> row_self(rows.size()), col_self(cols.size());
  for (std::size_t i = 0; i < rows.size(); ++i) row_self[i] = gak_log(rows[i], rows[i], sigma);
  for (std::size_t j = 0; j < cols.size(); ++j) col_self[j] = gak_log(cols[j], cols[j], sigma);
  Matrix out(rows.size(), cols.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < cols.size(); ++j)
      out(i, j) = std::exp(gak_log(rows[i], cols[j], sigma) - 0.5 * (row_self[i] + col_self[j]));
  }
  return out;
}

}  // namespace textseam::reference
