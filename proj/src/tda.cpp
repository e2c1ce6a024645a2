#include "textseam/tda.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "textseam/error.hpp"
#include "textseam/kernels.hpp"
#include "textseam/parallel.hpp"

namespace textseam {

PointCloud::PointCloud(std::size_t n, std::size_t dim, std::vector<double> coords)
    : n_(n), dim_(dim), coords_(std::move(coords)) {
  if (n_ < 2) throw ValidationError("point cloud needs at least 2 points, got " + std::to_string(n_));
  if (dim_ == 0) throw ValidationError("point cloud dimension must be positive");
  if (coords_.size() != n_ * dim_)
    throw ValidationError("point cloud has " + std::to_string(coords_.size()) + " coordinates, expected " +
                          std::to_string(n_ * dim_));
  for (double v : coords_) {
    if (!std::isfinite(v)) throw ValidationError("point cloud has a non-finite coordinate");
  }
}

PointCloud PointCloud::from_floats(std::size_t n, std::size_t dim, std::span<const float> coords) {
  return PointCloud(n, dim, std::vector<double>(coords.begin(), coords.end()));
}

PointCloud PointCloud::subset(std::span<const std::size_t> idx) const {
  std::vector<double> out;
  out.reserve(idx.size() * dim_);
  for (std::size_t i : idx) {
    auto p = point(i);
    out.insert(out.end(), p.begin(), p.end());
  }
  return PointCloud(idx.size(), dim_, std::move(out));
}

double squared_distance(std::span<const double> a, std::span<const double> b) noexcept {
  double sum = 0.0;
  for (std::size_t c = 0; c < a.size(); ++c) {
    const double diff = a[c] - b[c];
    sum += diff * diff;
  }
  return sum;
}

PointCloud collapse_duplicates(const PointCloud& cloud) {
  const std::size_t n = cloud.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  auto less = [&](std::size_t a, std::size_t b) {
    auto pa = cloud.point(a);
    auto pb = cloud.point(b);
    return std::lexicographical_compare(pa.begin(), pa.end(), pb.begin(), pb.end());
  };
  std::stable_sort(order.begin(), order.end(), less);

  std::vector<char> keep(n, 1);
  for (std::size_t i = 1; i < n; ++i) {
    auto prev = cloud.point(order[i - 1]);
    auto cur = cloud.point(order[i]);
    if (std::equal(prev.begin(), prev.end(), cur.begin())) keep[order[i]] = 0;
  }
  std::vector<std::size_t> kept;
  for (std::size_t i = 0; i < n; ++i) {
    if (keep[i]) kept.push_back(i);
  }
  if (kept.size() < 2) throw NumericError("fewer than 2 distinct points");
  if (kept.size() == n) return cloud;
  return cloud.subset(kept);
}

double euclidean_mst_length(const PointCloud& cloud, double alpha) {
  if (!(alpha > 0.0)) throw ValidationError("alpha must be positive");
  return kernels::prim_mst_length(cloud, alpha);
}

std::vector<std::size_t> default_phd_schedule(std::size_t n) {
  if (n < 5) throw ValidationError("PHD needs at least 5 points, got " + std::to_string(n));
  std::size_t lo = std::max<std::size_t>(8, (n + 9) / 10);
  if (lo >= n) lo = std::max<std::size_t>(4, n / 2);
  std::vector<std::size_t> sizes;
  constexpr int kSteps = 8;
  for (int j = 0; j < kSteps; ++j) {
    const double s = static_cast<double>(lo) + static_cast<double>(j) * static_cast<double>(n - lo) / (kSteps - 1);
    const auto size = static_cast<std::size_t>(std::llround(s));
    if (sizes.empty() || sizes.back() != size) sizes.push_back(size);
  }
  return sizes;
}

PhdFit phd_fit(const PointCloud& cloud, const PhdOptions& options) {
  if (!(options.alpha > 0.0)) throw ValidationError("alpha must be positive");
  if (options.resamples < 1) throw ValidationError("PHD needs at least one resample");
  PhdFit fit;
  fit.sizes = options.schedule.empty() ? default_phd_schedule(cloud.size()) : options.schedule;
  std::sort(fit.sizes.begin(), fit.sizes.end());
  fit.sizes.erase(std::unique(fit.sizes.begin(), fit.sizes.end()), fit.sizes.end());
  if (fit.sizes.size() < 2) throw ValidationError("PHD schedule needs at least two distinct sizes");
  if (fit.sizes.front() < 4) throw ValidationError("PHD schedule sizes must be >= 4");
  if (fit.sizes.back() > cloud.size())
    throw ValidationError("PHD schedule size " + std::to_string(fit.sizes.back()) + " exceeds cloud size " +
                          std::to_string(cloud.size()));

  // Draw every subset up front so the RNG stream does not depend on threading.
  std::mt19937_64 rng(options.seed);
  std::vector<std::size_t> pool(cloud.size());
  std::vector<std::vector<std::size_t>> subsets;
  for (std::size_t size : fit.sizes) {
    for (std::size_t r = 0; r < options.resamples; ++r) {
      std::iota(pool.begin(), pool.end(), 0);
      for (std::size_t i = 0; i < size; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, pool.size() - 1);
        std::swap(pool[i], pool[pick(rng)]);
      }
      std::vector<std::size_t> chosen(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(size));
      std::sort(chosen.begin(), chosen.end());
      subsets.push_back(std::move(chosen));
    }
  }

  std::vector<double> masses(subsets.size());
  parallel_for(subsets.size(), [&](std::size_t i) {
    masses[i] = kernels::prim_mst_length(cloud.subset(subsets[i]), options.alpha);
  });

  for (std::size_t s = 0; s < fit.sizes.size(); ++s) {
    auto first = masses.begin() + static_cast<std::ptrdiff_t>(s * options.resamples);
    std::vector<double> group(first, first + static_cast<std::ptrdiff_t>(options.resamples));
    std::sort(group.begin(), group.end());
    const std::size_t m = group.size();
    const double median = m % 2 ? group[m / 2] : 0.5 * (group[m / 2 - 1] + group[m / 2]);
    if (!(median > 0.0)) throw NumericError("degenerate cloud");
    fit.mass.push_back(median);
  }

  const std::size_t m = fit.sizes.size();
  double mx = 0.0, my = 0.0;
  std::vector<double> lx(m), ly(m);
  for (std::size_t i = 0; i < m; ++i) {
    lx[i] = std::log(static_cast<double>(fit.sizes[i]));
    ly[i] = std::log(fit.mass[i]);
    mx += lx[i];
    my += ly[i];
  }
  mx /= static_cast<double>(m);
  my /= static_cast<double>(m);
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    sxy += (lx[i] - mx) * (ly[i] - my);
    sxx += (lx[i] - mx) * (lx[i] - mx);
  }
  fit.slope = sxy / sxx;
  if (!std::isfinite(fit.slope) || fit.slope >= 1.0 - 1e-9) throw NumericError("divergent dimension");
  fit.dimension = options.alpha / (1.0 - fit.slope);
  return fit;
}

namespace {

// Distance from q to w rescaled so the sphere of radius r around x maps to r:
// r * |w - q| / t, where t is how far the ray from q through w travels before
// leaving the ball. Equals r|w-q|^2 / (2 (x-q).(w-q)) when q is on the sphere.
// Returns the ratio d / r, or nullopt for degenerate geometry.
std::optional<double> tight_ratio(std::span<const double> x, double r, std::span<const double> q,
                                  std::span<const double> w) {
  double len2 = 0.0, proj = 0.0, off2 = 0.0;
  for (std::size_t c = 0; c < x.size(); ++c) {
    const double u = w[c] - q[c];
    const double o = q[c] - x[c];
    len2 += u * u;
    proj += o * u;
    off2 += o * o;
  }
  const double len = std::sqrt(len2);
  if (len <= 1e-12 * r) return std::nullopt;
  const double b = proj / len;
  const double disc = std::max(0.0, b * b - (off2 - r * r));
  const double t = -b + std::sqrt(disc);
  if (t <= 1e-12 * r) return std::nullopt;
  const double ratio = len / t;
  if (!(ratio > 1e-12) || !std::isfinite(ratio)) return std::nullopt;
  return ratio;
}

}  // namespace

std::optional<double> tle_point_estimate(const PointCloud& cloud, const Matrix& sq_dist, std::size_t point,
                                         const TleOptions& options) {
  const std::size_t n = cloud.size();
  const std::size_t k = options.k;
  std::vector<std::size_t> others;
  others.reserve(n - 1);
  for (std::size_t j = 0; j < n; ++j) {
    if (j != point) others.push_back(j);
  }
  auto closer = [&](std::size_t a, std::size_t b) {
    const double da = sq_dist(point, a), db = sq_dist(point, b);
    return da < db || (da == db && a < b);
  };
  std::partial_sort(others.begin(), others.begin() + static_cast<std::ptrdiff_t>(k), others.end(), closer);
  const double r = std::sqrt(sq_dist(point, others[k - 1]));
  if (!(r > 0.0)) return std::nullopt;

  std::vector<std::size_t> hood(others.begin(), others.begin() + static_cast<std::ptrdiff_t>(k));
  if (options.include_center) hood.push_back(point);

  const auto x = cloud.point(point);
  std::vector<double> mirror(cloud.dim());
  double total = 0.0;
  std::size_t valid_pairs = 0;
  for (std::size_t a : hood) {
    const auto v = cloud.point(a);
    for (std::size_t c = 0; c < mirror.size(); ++c) mirror[c] = 2.0 * x[c] - v[c];
    for (std::size_t b : hood) {
      if (a == b) continue;
      const auto w = cloud.point(b);
      const auto direct = tight_ratio(x, r, v, w);
      if (!direct) continue;
      const auto mirrored = tight_ratio(x, r, mirror, w);
      if (!mirrored) continue;
      total += std::log(*direct) + std::log(*mirrored);
      ++valid_pairs;
    }
  }
  if (valid_pairs == 0 || !(total < 0.0)) return std::nullopt;
  const double estimate = -2.0 * static_cast<double>(valid_pairs) / total;
  if (!std::isfinite(estimate) || estimate <= 0.0) return std::nullopt;
  return estimate;
}

double tle(const PointCloud& cloud, const TleOptions& options) {
  if (options.k < 2) throw ValidationError("TLE needs k >= 2");
  if (cloud.size() < options.k + 2)
    throw ValidationError("TLE needs at least k + 2 = " + std::to_string(options.k + 2) + " points, got " +
                          std::to_string(cloud.size()));
  const auto estimates = kernels::tle_point_estimates(cloud, options);
  double sum = 0.0;
  std::size_t count = 0;
  for (const auto& e : estimates) {
    if (e) {
      sum += *e;
      ++count;
    }
  }
  if (count == 0) throw NumericError("no valid neighborhoods");
  return sum / static_cast<double>(count);
}

}  // namespace textseam
