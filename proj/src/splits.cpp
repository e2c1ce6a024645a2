#include "textseam/splits.hpp"

#include <algorithm>
#include <map>
#include <random>
#include <set>

#include "textseam/error.hpp"

namespace textseam {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

void stratified_split(const Corpus& corpus, const std::vector<std::size_t>& pool, std::uint64_t seed, Fold& fold,
                      std::vector<std::string>& warnings) {
  std::mt19937_64 rng(seed);
  std::array<std::vector<std::size_t>, kNumLabels> strata;
  for (std::size_t i : pool) strata[static_cast<std::size_t>(corpus.samples[i].label)].push_back(i);
  std::vector<std::size_t> order, small;
  for (int label = 0; label < kNumLabels; ++label) {
    auto& s = strata[static_cast<std::size_t>(label)];
    if (s.empty()) continue;
    if (s.size() < 5) {
      warnings.push_back("fold " + fold.tag + ": label " + std::to_string(label) + " has " +
                         std::to_string(s.size()) + " samples; split unstratified");
      small.insert(small.end(), s.begin(), s.end());
      continue;
    }
    std::shuffle(s.begin(), s.end(), rng);
    order.insert(order.end(), s.begin(), s.end());
  }
  std::shuffle(small.begin(), small.end(), rng);
  order.insert(order.end(), small.begin(), small.end());
  for (std::size_t p = 0; p < order.size(); ++p) {
    const std::size_t slot = p % 5;
    if (slot < 3) fold.train.push_back(order[p]);
    else if (slot == 3) fold.val.push_back(order[p]);
    else fold.test_in.push_back(order[p]);
  }
}

}  // namespace

std::string_view to_string(SplitMode mode) {
  switch (mode) {
    case SplitMode::in_domain: return "in-domain";
    case SplitMode::cross_topic: return "cross-topic";
    case SplitMode::cross_generator: return "cross-generator";
  }
  return "unknown";
}

SplitMode parse_split_mode(std::string_view text) {
  std::string t(text);
  std::replace(t.begin(), t.end(), '_', '-');
  if (t == "in-domain") return SplitMode::in_domain;
  if (t == "cross-topic") return SplitMode::cross_topic;
  if (t == "cross-generator") return SplitMode::cross_generator;
  throw ValidationError("unknown mode '" + std::string(text) + "' (expected in-domain, cross-topic or cross-generator)");
}

std::uint64_t fold_seed(std::uint64_t seed, std::size_t fold_index) {
  return splitmix64(seed ^ splitmix64(fold_index + 1));
}

SplitPlan make_splits(const Corpus& corpus, SplitMode mode, std::uint64_t seed) {
  SplitPlan plan;
  plan.mode = mode;
  plan.seed = seed;
  const std::size_t n = corpus.samples.size();
  if (n == 0) throw ValidationError("cannot split an empty corpus");

  if (mode == SplitMode::in_domain) {
    Fold fold;
    fold.tag = "in_domain";
    std::vector<std::size_t> all(n);
    for (std::size_t i = 0; i < n; ++i) all[i] = i;
    stratified_split(corpus, all, fold_seed(seed, 0), fold, plan.warnings);
    plan.folds.push_back(std::move(fold));
    return plan;
  }

  std::vector<std::string> groups;
  std::vector<std::string> group_of(n);
  for (std::size_t i = 0; i < n; ++i) {
    group_of[i] = mode == SplitMode::cross_topic ? std::string(to_string(corpus.samples[i].topic))
                                                 : corpus.samples[i].generator;
  }
  if (mode == SplitMode::cross_topic) {
    for (Topic t : kAllTopics) {
      const std::string name(to_string(t));
      if (std::find(group_of.begin(), group_of.end(), name) != group_of.end()) groups.push_back(name);
    }
  } else {
    const std::set<std::string> distinct(group_of.begin(), group_of.end());
    groups.assign(distinct.begin(), distinct.end());
  }
  if (groups.size() < 2)
    throw ValidationError(std::string(to_string(mode)) + " needs at least 2 distinct " +
                          (mode == SplitMode::cross_topic ? "topics" : "generators") + ", found " +
                          std::to_string(groups.size()));

  for (std::size_t g = 0; g < groups.size(); ++g) {
    Fold fold;
    fold.tag = groups[g];
    std::vector<std::size_t> rest;
    for (std::size_t i = 0; i < n; ++i) {
      if (group_of[i] == groups[g]) fold.test_out.push_back(i);
      else rest.push_back(i);
    }
    stratified_split(corpus, rest, fold_seed(seed, g), fold, plan.warnings);
    plan.folds.push_back(std::move(fold));
  }
  return plan;
}

bool fold_is_leak_free(const Fold& fold) {
  std::map<std::size_t, int> seen;
  for (const auto* set : {&fold.train, &fold.val, &fold.test_in, &fold.test_out}) {
    for (std::size_t i : *set) {
      if (++seen[i] > 1) return false;
    }
  }
  return true;
}

}  // namespace textseam
