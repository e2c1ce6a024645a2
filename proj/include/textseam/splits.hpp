#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "textseam/corpus.hpp"

namespace textseam {

enum class SplitMode { in_domain, cross_topic, cross_generator };

std::string_view to_string(SplitMode mode);
// Accepts in-domain, cross-topic, cross-generator (underscores also accepted).
SplitMode parse_split_mode(std::string_view text);

struct Fold {
  std::string tag;              // "in_domain", the held-out topic, or the held-out generator
  std::vector<std::size_t> train;  // indices into the corpus
  std::vector<std::size_t> val;
  std::vector<std::size_t> test_in;
  std::vector<std::size_t> test_out;  // held-out domain; empty in-domain
};

struct SplitPlan {
  SplitMode mode = SplitMode::in_domain;
  std::uint64_t seed = 0;
  std::vector<Fold> folds;
  std::vector<std::string> warnings;
};

// Label-stratified 60/20/20: each label's indices are shuffled, strata are
// concatenated in label order and position p goes to train when p % 5 < 3,
// val when p % 5 == 3, test otherwise. Labels with fewer than 5 samples are
// pooled, shuffled and appended last (with a warning). Cross modes emit one
// fold per topic (kAllTopics order) or generator (sorted), holding it out
// entirely. Throws ValidationError when a cross mode sees fewer than 2 groups.
SplitPlan make_splits(const Corpus& corpus, SplitMode mode, std::uint64_t seed);

// Seed for fold-local randomness.
std::uint64_t fold_seed(std::uint64_t seed, std::size_t fold_index);

// True when no held-out index appears in train or val and the fold's sets are disjoint.
bool fold_is_leak_free(const Fold& fold);

}  // namespace textseam
