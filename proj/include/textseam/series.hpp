#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "textseam/tda.hpp"
#include "textseam/trace.hpp"

namespace textseam {

enum class IdEstimator { phd, tle };

std::string_view to_string(IdEstimator estimator);
IdEstimator parse_estimator(std::string_view text);

// Intrinsic-dimension value per sliding window over a trace's token embeddings.
struct IdSeries {
  std::string sample_id;
  IdEstimator estimator = IdEstimator::phd;
  std::size_t window = 20;
  std::size_t step = 5;
  std::vector<std::size_t> centers;  // strictly increasing token indices
  std::vector<double> values;
};

struct SeriesOptions {
  IdEstimator estimator = IdEstimator::phd;
  std::size_t window = 20;
  std::size_t step = 5;
  // k is capped at (distinct points in the window) - 2.
  TleOptions tle{};
  // schedule is ignored (each window uses its default); seed is mixed with the window index.
  PhdOptions phd{};
};

// floor((n_tokens - window) / step) + 1, or 0 when n_tokens < window.
std::size_t window_count(std::size_t n_tokens, std::size_t window, std::size_t step);

// Windows start at 0, step, 2*step, ... while start + window <= n_tokens; the
// center is start + window/2. Repeated embeddings in a window are collapsed
// before estimation. Windows whose estimate fails are linearly interpolated
// from the nearest successful neighbours (ends copy the nearest one). Throws
// ValidationError "trace too short" when n_tokens < window and NumericError
// when every window fails.
IdSeries build_id_series(const TokenTrace& trace, const SeriesOptions& options = {});

// Builds series for many traces in parallel; output order follows `ids`.
std::vector<IdSeries> build_id_series_batch(const TraceStore& store, std::span<const std::string> ids,
                                            const SeriesOptions& options = {});

// Log of the unnormalized global alignment kernel: sum over all monotone
// alignments of the product of local kernels exp(-phi) / (2 - exp(-phi)),
// phi = (x - y)^2 / (2 sigma^2), accumulated in log space.
double gak_log(std::span<const double> a, std::span<const double> b, double sigma);

// Normalized kernel K(a,b) / sqrt(K(a,a) K(b,b)), in (0, 1].
double gak(std::span<const double> a, std::span<const double> b, double sigma);
inline double gak(const IdSeries& a, const IdSeries& b, double sigma) { return gak(a.values, b.values, sigma); }

// Median absolute difference between pooled values (at most 2000, taken by a
// fixed stride) times sqrt(median series length). Falls back to 1.
double default_gak_sigma(std::span<const std::vector<double>> training);

// Z-scores series values with statistics pooled over a training set.
struct SeriesScaler {
  double mean = 0.0;
  double stddev = 1.0;

  static SeriesScaler fit(std::span<const std::vector<double>> training);
  std::vector<double> apply(std::span<const double> values) const;
};

// series.jsonl: {"id", "estimator", "H", "S", "centers", "values"}
void write_series_jsonl(std::span<const IdSeries> series, std::ostream& out);
std::vector<IdSeries> read_series_jsonl(std::istream& in);

}  // namespace textseam
