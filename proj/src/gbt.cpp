#include "textseam/gbt.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "textseam/error.hpp"

namespace textseam {

namespace {

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

void softmax_inplace(std::vector<double>& z) {
  const double m = *std::max_element(z.begin(), z.end());
  double sum = 0.0;
  for (double& v : z) {
    v = std::exp(v - m);
    sum += v;
  }
  for (double& v : z) v /= sum;
}

// Leaf value from the residuals (and for log-loss, the hessians) of its rows.
enum class LeafRule { mean, newton };

struct SplitBest {
  double gain = 0.0;
  int feature = -1;
  double threshold = 0.0;
};

class TreeBuilder {
 public:
  TreeBuilder(const Matrix& x, const std::vector<std::vector<std::size_t>>& sorted, std::size_t depth,
              std::size_t min_leaf)
      : x_(x), sorted_(sorted), depth_(depth), min_leaf_(min_leaf) {}

  // residual: negative gradient; hess: Newton denominator per row (unused for mean leaves);
  // in_bag: rows that take part in this tree.
  RegressionTree build(std::span<const double> residual, std::span<const double> hess, std::span<const char> in_bag,
                       LeafRule rule, double newton_scale) const {
    const std::size_t n = x_.rows();
    RegressionTree tree;
    tree.nodes.emplace_back();
    std::vector<int> node_of(n, -1);
    for (std::size_t i = 0; i < n; ++i) {
      if (in_bag[i]) node_of[i] = 0;
    }
    std::vector<int> frontier{0};

    for (std::size_t level = 0; level < depth_ && !frontier.empty(); ++level) {
      const std::size_t width = tree.nodes.size();
      std::vector<double> total(width, 0.0), total_sq(width, 0.0);
      std::vector<std::size_t> count(width, 0);
      for (std::size_t i = 0; i < n; ++i) {
        if (node_of[i] < 0) continue;
        total[static_cast<std::size_t>(node_of[i])] += residual[i];
        total_sq[static_cast<std::size_t>(node_of[i])] += residual[i] * residual[i];
        ++count[static_cast<std::size_t>(node_of[i])];
      }

      std::vector<SplitBest> best(width);
      struct Running {
        double sum = 0.0;
        std::size_t n = 0;
        double last = 0.0;
      };
      std::vector<Running> run(width);
      for (std::size_t f = 0; f < x_.cols(); ++f) {
        std::fill(run.begin(), run.end(), Running{});
        for (std::size_t i : sorted_[f]) {
          const int node = node_of[i];
          if (node < 0) continue;
          const auto nd = static_cast<std::size_t>(node);
          Running& r = run[nd];
          const double v = x_(i, f);
          if (r.n >= min_leaf_ && v > r.last && count[nd] - r.n >= min_leaf_) {
            const double nl = static_cast<double>(r.n), nr = static_cast<double>(count[nd] - r.n);
            const double sr = total[nd] - r.sum;
            const double gain = r.sum * r.sum / nl + sr * sr / nr - total[nd] * total[nd] / static_cast<double>(count[nd]);
            if (gain > best[nd].gain && gain > 1e-12 * total_sq[nd]) {
              double threshold = r.last + 0.5 * (v - r.last);
              if (!(threshold < v)) threshold = r.last;
              best[nd] = {gain, static_cast<int>(f), threshold};
            }
          }
          r.sum += residual[i];
          ++r.n;
          r.last = v;
        }
      }

      std::vector<int> next;
      for (int node : frontier) {
        const auto nd = static_cast<std::size_t>(node);
        if (best[nd].feature < 0) continue;
        const int left = static_cast<int>(tree.nodes.size());
        tree.nodes.emplace_back();
        tree.nodes.emplace_back();
        tree.nodes[nd].feature = best[nd].feature;
        tree.nodes[nd].threshold = best[nd].threshold;
        tree.nodes[nd].left = left;
        tree.nodes[nd].right = left + 1;
        next.push_back(left);
        next.push_back(left + 1);
      }
      for (std::size_t i = 0; i < n; ++i) {
        if (node_of[i] < 0) continue;
        const auto& node = tree.nodes[static_cast<std::size_t>(node_of[i])];
        if (node.feature < 0) continue;
        node_of[i] = x_(i, static_cast<std::size_t>(node.feature)) <= node.threshold ? node.left : node.right;
      }
      frontier = std::move(next);
    }

    std::vector<double> num(tree.nodes.size(), 0.0), den(tree.nodes.size(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      if (node_of[i] < 0) continue;
      const auto nd = static_cast<std::size_t>(node_of[i]);
      num[nd] += residual[i];
      den[nd] += rule == LeafRule::mean ? 1.0 : hess[i];
    }
    for (std::size_t nd = 0; nd < tree.nodes.size(); ++nd) {
      auto& node = tree.nodes[nd];
      if (node.feature >= 0) continue;
      node.value = den[nd] > 1e-12 ? newton_scale * num[nd] / den[nd] : 0.0;
    }
    return tree;
  }

 private:
  const Matrix& x_;
  const std::vector<std::vector<std::size_t>>& sorted_;
  std::size_t depth_;
  std::size_t min_leaf_;
};

}  // namespace

std::string_view to_string(GbtMode mode) {
  switch (mode) {
    case GbtMode::regression: return "regression";
    case GbtMode::binary: return "binary";
    case GbtMode::multiclass: return "multiclass";
  }
  return "unknown";
}

GbtMode parse_gbt_mode(std::string_view text) {
  if (text == "regression") return GbtMode::regression;
  if (text == "binary") return GbtMode::binary;
  if (text == "multiclass") return GbtMode::multiclass;
  throw ValidationError("unknown GBT mode '" + std::string(text) + "'");
}

double RegressionTree::predict(std::span<const double> x) const {
  std::size_t nd = 0;
  while (nodes[nd].feature >= 0) {
    const auto& node = nodes[nd];
    nd = static_cast<std::size_t>(x[static_cast<std::size_t>(node.feature)] <= node.threshold ? node.left : node.right);
  }
  return nodes[nd].value;
}

std::size_t RegressionTree::depth() const {
  std::vector<std::size_t> level(nodes.size(), 0);
  std::size_t deepest = 0;
  for (std::size_t nd = 0; nd < nodes.size(); ++nd) {
    if (nodes[nd].feature < 0) continue;
    for (int child : {nodes[nd].left, nodes[nd].right}) {
      level[static_cast<std::size_t>(child)] = level[nd] + 1;
      deepest = std::max(deepest, level[nd] + 1);
    }
  }
  return deepest;
}

std::vector<double> GbtModel::raw_scores(std::span<const double> x) const {
  std::vector<double> scores = base_score;
  for (const auto& round : rounds) {
    for (std::size_t k = 0; k < round.size(); ++k) scores[k] += learning_rate * round[k].predict(x);
  }
  return scores;
}

double GbtModel::predict_value(std::span<const double> x) const { return raw_scores(x)[0]; }

double GbtModel::predict_probability(std::span<const double> x) const { return sigmoid(raw_scores(x)[0]); }

std::vector<double> GbtModel::predict_proba(std::span<const double> x) const {
  auto scores = raw_scores(x);
  if (mode == GbtMode::binary) {
    const double p = sigmoid(scores[0]);
    return {1.0 - p, p};
  }
  softmax_inplace(scores);
  return scores;
}

int GbtModel::predict_class(std::span<const double> x) const {
  const auto scores = raw_scores(x);
  if (mode == GbtMode::binary) return sigmoid(scores[0]) >= 0.5 ? 1 : 0;
  return static_cast<int>(std::max_element(scores.begin(), scores.end()) - scores.begin());
}

GbtModel gbt_fit(const Matrix& x, std::span<const double> y, const GbtOptions& options) {
  if (options.depth < 1) throw ConfigError("gbt: depth must be >= 1");
  if (options.trees < 1) throw ConfigError("gbt: trees must be >= 1");
  if (!(options.learning_rate > 0.0)) throw ConfigError("gbt: learning rate must be positive");
  if (!(options.subsample > 0.0 && options.subsample <= 1.0)) throw ConfigError("gbt: subsample must be in (0,1]");
  if (options.min_samples_leaf < 1) throw ConfigError("gbt: min_samples_leaf must be >= 1");
  if (x.rows() != y.size()) throw ValidationError("gbt: rows(X) != len(y)");
  if (x.rows() == 0) throw ValidationError("gbt: empty training set");
  for (double v : x.data()) {
    if (!std::isfinite(v)) throw ValidationError("gbt: non-finite feature");
  }
  const std::size_t n = x.rows();
  const std::size_t k = options.mode == GbtMode::multiclass ? options.n_classes : 1;
  if (options.mode == GbtMode::multiclass && k < 2) throw ConfigError("gbt: need at least 2 classes");
  for (double v : y) {
    if (!std::isfinite(v)) throw ValidationError("gbt: non-finite target");
    if (options.mode == GbtMode::binary && v != 0.0 && v != 1.0) throw ValidationError("gbt: binary target must be 0/1");
    if (options.mode == GbtMode::multiclass &&
        (v < 0.0 || v >= static_cast<double>(k) || v != std::floor(v)))
      throw ValidationError("gbt: class label out of range");
  }

  GbtModel model;
  model.mode = options.mode;
  model.n_classes = options.mode == GbtMode::multiclass ? k : (options.mode == GbtMode::binary ? 2 : 1);
  model.dim = x.cols();
  model.learning_rate = options.learning_rate;

  const double mean_y = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
  if (options.mode == GbtMode::regression) {
    model.base_score = {mean_y};
  } else if (options.mode == GbtMode::binary) {
    const double p = std::clamp(mean_y, 1e-6, 1.0 - 1e-6);
    model.base_score = {std::log(p / (1.0 - p))};
  } else {
    std::vector<double> counts(k, 0.0);
    for (double v : y) counts[static_cast<std::size_t>(v)] += 1.0;
    for (double c : counts) model.base_score.push_back(std::log(std::max(c / static_cast<double>(n), 1e-6)));
  }

  std::vector<std::vector<std::size_t>> sorted(x.cols(), std::vector<std::size_t>(n));
  for (std::size_t f = 0; f < x.cols(); ++f) {
    std::iota(sorted[f].begin(), sorted[f].end(), 0);
    std::stable_sort(sorted[f].begin(), sorted[f].end(), [&](std::size_t a, std::size_t b) { return x(a, f) < x(b, f); });
  }
  const TreeBuilder builder(x, sorted, options.depth, options.min_samples_leaf);

  // scores[i * k + c]
  std::vector<double> scores(n * k);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < k; ++c) scores[i * k + c] = model.base_score[c];
  }

  std::mt19937_64 rng(options.seed);
  std::vector<char> in_bag(n, 1);
  std::vector<std::size_t> order(n);
  const auto bag_size = std::max<std::size_t>(1, static_cast<std::size_t>(options.subsample * static_cast<double>(n)));
  std::vector<double> residual(n), hess(n), probs(n * k);

  auto compute_probs = [&] {
    for (std::size_t i = 0; i < n; ++i) {
      if (options.mode == GbtMode::binary) {
        probs[i] = sigmoid(scores[i]);
      } else if (options.mode == GbtMode::multiclass) {
        std::vector<double> z(scores.begin() + static_cast<std::ptrdiff_t>(i * k),
                              scores.begin() + static_cast<std::ptrdiff_t>((i + 1) * k));
        softmax_inplace(z);
        std::copy(z.begin(), z.end(), probs.begin() + static_cast<std::ptrdiff_t>(i * k));
      }
    }
  };
  auto loss = [&] {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (options.mode == GbtMode::regression) {
        const double r = y[i] - scores[i];
        total += r * r;
      } else if (options.mode == GbtMode::binary) {
        const double p = std::clamp(probs[i], 1e-15, 1.0 - 1e-15);
        total -= y[i] == 1.0 ? std::log(p) : std::log(1.0 - p);
      } else {
        total -= std::log(std::max(probs[i * k + static_cast<std::size_t>(y[i])], 1e-15));
      }
    }
    return total / static_cast<double>(n);
  };

  for (std::size_t round = 0; round < options.trees; ++round) {
    if (bag_size < n) {
      std::iota(order.begin(), order.end(), 0);
      std::shuffle(order.begin(), order.end(), rng);
      std::fill(in_bag.begin(), in_bag.end(), 0);
      for (std::size_t i = 0; i < bag_size; ++i) in_bag[order[i]] = 1;
    }
    compute_probs();
    std::vector<RegressionTree> trees;
    for (std::size_t c = 0; c < k; ++c) {
      for (std::size_t i = 0; i < n; ++i) {
        if (options.mode == GbtMode::regression) {
          residual[i] = y[i] - scores[i];
        } else if (options.mode == GbtMode::binary) {
          residual[i] = y[i] - probs[i];
          hess[i] = probs[i] * (1.0 - probs[i]);
        } else {
          const double target = static_cast<std::size_t>(y[i]) == c ? 1.0 : 0.0;
          residual[i] = target - probs[i * k + c];
          hess[i] = std::abs(residual[i]) * (1.0 - std::abs(residual[i]));
        }
      }
      const LeafRule rule = options.mode == GbtMode::regression ? LeafRule::mean : LeafRule::newton;
      const double scale = options.mode == GbtMode::multiclass ? static_cast<double>(k - 1) / static_cast<double>(k) : 1.0;
      trees.push_back(builder.build(residual, hess, in_bag, rule, scale));
    }
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t c = 0; c < k; ++c) scores[i * k + c] += options.learning_rate * trees[c].predict(x.row(i));
    }
    model.rounds.push_back(std::move(trees));
    if (options.mode != GbtMode::regression) compute_probs();
    model.train_loss.push_back(loss());
  }
  return model;
}

}  // namespace textseam
