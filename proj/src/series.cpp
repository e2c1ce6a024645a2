#include "textseam/series.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <nlohmann/json.hpp>
#include <ostream>

#include "textseam/error.hpp"
#include "textseam/parallel.hpp"

namespace textseam {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double estimate_window(const TokenTrace& trace, std::size_t start, std::size_t window_index,
                       const SeriesOptions& options) {
  const auto first = trace.embeddings.begin() + static_cast<std::ptrdiff_t>(start * trace.dim);
  std::vector<double> coords(first, first + static_cast<std::ptrdiff_t>(options.window * trace.dim));
  const PointCloud cloud = collapse_duplicates(PointCloud(options.window, trace.dim, std::move(coords)));

  if (options.estimator == IdEstimator::phd) {
    PhdOptions phd = options.phd;
    phd.schedule.clear();
    phd.seed = splitmix64(options.phd.seed ^ splitmix64(window_index));
    return textseam::phd(cloud, phd);
  }
  if (cloud.size() < 4) throw NumericError("window has fewer than 4 distinct points");
  TleOptions tle = options.tle;
  tle.k = std::max<std::size_t>(2, std::min(tle.k, cloud.size() - 2));
  return textseam::tle(cloud, tle);
}

}  // namespace

std::string_view to_string(IdEstimator estimator) { return estimator == IdEstimator::phd ? "phd" : "tle"; }

IdEstimator parse_estimator(std::string_view text) {
  if (text == "phd") return IdEstimator::phd;
  if (text == "tle") return IdEstimator::tle;
  throw ValidationError("unknown estimator '" + std::string(text) + "' (expected phd or tle)");
}

std::size_t window_count(std::size_t n_tokens, std::size_t window, std::size_t step) {
  if (n_tokens < window) return 0;
  return (n_tokens - window) / step + 1;
}

IdSeries build_id_series(const TokenTrace& trace, const SeriesOptions& options) {
  if (options.window < 2) throw ValidationError("window must hold at least 2 tokens");
  if (options.step < 1) throw ValidationError("step must be positive");
  if (trace.n_tokens < options.window)
    throw ValidationError("trace too short: '" + trace.sample_id + "' has " + std::to_string(trace.n_tokens) +
                          " tokens, window is " + std::to_string(options.window));

  const std::size_t count = window_count(trace.n_tokens, options.window, options.step);
  IdSeries out{trace.sample_id, options.estimator, options.window, options.step, {}, {}};
  out.centers.resize(count);
  out.values.assign(count, std::numeric_limits<double>::quiet_NaN());
  std::vector<char> ok(count, 0);
  for (std::size_t w = 0; w < count; ++w) {
    const std::size_t start = w * options.step;
    out.centers[w] = start + options.window / 2;
    try {
      const double v = estimate_window(trace, start, w, options);
      if (std::isfinite(v)) {
        out.values[w] = v;
        ok[w] = 1;
      }
    } catch (const NumericError&) {
    } catch (const ValidationError&) {
    }
  }

  std::vector<std::size_t> good;
  for (std::size_t w = 0; w < count; ++w) {
    if (ok[w]) good.push_back(w);
  }
  if (good.empty()) throw NumericError("every window failed for '" + trace.sample_id + "'");
  for (std::size_t w = 0; w < count; ++w) {
    if (ok[w]) continue;
    auto after = std::lower_bound(good.begin(), good.end(), w);
    if (after == good.begin()) {
      out.values[w] = out.values[*after];
    } else if (after == good.end()) {
      out.values[w] = out.values[good.back()];
    } else {
      const std::size_t lo = *(after - 1), hi = *after;
      const double t = static_cast<double>(w - lo) / static_cast<double>(hi - lo);
      out.values[w] = out.values[lo] + t * (out.values[hi] - out.values[lo]);
    }
  }
  return out;
}

std::vector<IdSeries> build_id_series_batch(const TraceStore& store, std::span<const std::string> ids,
                                            const SeriesOptions& options) {
  std::vector<IdSeries> out(ids.size());
  parallel_for(ids.size(), [&](std::size_t i) { out[i] = build_id_series(store.load(ids[i]), options); });
  return out;
}

double default_gak_sigma(std::span<const std::vector<double>> training) {
  std::vector<double> pooled;
  std::vector<std::size_t> lengths;
  for (const auto& s : training) {
    pooled.insert(pooled.end(), s.begin(), s.end());
    lengths.push_back(s.size());
  }
  if (pooled.size() < 2) return 1.0;
  constexpr std::size_t kMaxValues = 2000;
  if (pooled.size() > kMaxValues) {
    std::vector<double> sub;
    const double stride = static_cast<double>(pooled.size()) / kMaxValues;
    for (std::size_t i = 0; i < kMaxValues; ++i) sub.push_back(pooled[static_cast<std::size_t>(i * stride)]);
    pooled = std::move(sub);
  }
  std::vector<double> diffs;
  diffs.reserve(pooled.size() * (pooled.size() - 1) / 2);
  for (std::size_t i = 0; i < pooled.size(); ++i) {
    for (std::size_t j = i + 1; j < pooled.size(); ++j) diffs.push_back(std::abs(pooled[i] - pooled[j]));
  }
  auto mid = diffs.begin() + static_cast<std::ptrdiff_t>(diffs.size() / 2);
  std::nth_element(diffs.begin(), mid, diffs.end());
  auto len_mid = lengths.begin() + static_cast<std::ptrdiff_t>(lengths.size() / 2);
  std::nth_element(lengths.begin(), len_mid, lengths.end());
  const double sigma = *mid * std::sqrt(static_cast<double>(*len_mid));
  return std::isfinite(sigma) && sigma > 0.0 ? sigma : 1.0;
}

SeriesScaler SeriesScaler::fit(std::span<const std::vector<double>> training) {
  double sum = 0.0, sum2 = 0.0;
  std::size_t n = 0;
  for (const auto& s : training) {
    for (double v : s) {
      sum += v;
      sum2 += v * v;
      ++n;
    }
  }
  SeriesScaler scaler;
  if (n == 0) return scaler;
  scaler.mean = sum / static_cast<double>(n);
  const double var = std::max(0.0, sum2 / static_cast<double>(n) - scaler.mean * scaler.mean);
  scaler.stddev = var > 0.0 ? std::sqrt(var) : 1.0;
  return scaler;
}

std::vector<double> SeriesScaler::apply(std::span<const double> values) const {
  std::vector<double> out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) out[i] = (values[i] - mean) / stddev;
  return out;
}

void write_series_jsonl(std::span<const IdSeries> series, std::ostream& out) {
  for (const auto& s : series) {
    nlohmann::ordered_json obj;
    obj["id"] = s.sample_id;
    obj["estimator"] = to_string(s.estimator);
    obj["H"] = s.window;
    obj["S"] = s.step;
    obj["centers"] = s.centers;
    obj["values"] = s.values;
    out << obj.dump() << '\n';
  }
}

std::vector<IdSeries> read_series_jsonl(std::istream& in) {
  std::vector<IdSeries> out;
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    ++row;
    try {
      const auto obj = nlohmann::json::parse(line);
      IdSeries s;
      s.sample_id = obj.at("id").get<std::string>();
      s.estimator = parse_estimator(obj.at("estimator").get<std::string>());
      s.window = obj.at("H").get<std::size_t>();
      s.step = obj.at("S").get<std::size_t>();
      s.centers = obj.at("centers").get<std::vector<std::size_t>>();
      s.values = obj.at("values").get<std::vector<double>>();
      if (s.values.empty() || s.values.size() != s.centers.size())
        throw ValidationError("centers and values must be nonempty and equally long");
      for (std::size_t i = 1; i < s.centers.size(); ++i) {
        if (s.centers[i] <= s.centers[i - 1]) throw ValidationError("centers must be strictly increasing");
      }
      out.push_back(std::move(s));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(std::string("series.jsonl: ") + e.what(), row);
    } catch (const ParseError&) {
      throw;
    } catch (const ValidationError& e) {
      throw ParseError(e.what(), row);
    }
  }
  return out;
}

}  // namespace textseam
