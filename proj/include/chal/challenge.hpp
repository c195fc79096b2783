#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "chal/lrp.hpp"
#include "chal/rng.hpp"
#include "chal/tensor.hpp"

namespace chal {

// Fractions of each batch receiving the decrease / increase treatment; the
// remainder passes through untouched. Counts are floored per batch.
struct BatchSplit {
  double challenge_a = 0.25;
  double challenge_b = 0.25;
  double unmodified = 0.50;
};

struct ChallengerConfig {
  double alpha = 0.5;  // subtracted from selected features
  double beta = 0.5;   // added to selected features
  // Features modified per sample; unset means ceil(0.05 * input size).
  std::optional<std::size_t> n_features;
  std::size_t top_k = 5;  // rank pool for the attribution class
  BatchSplit split;
  EpsilonRuleConfig epsilon_rule;
  bool clip_to_input_range = false;  // clamp modified samples to [0,1]

  std::size_t resolved_n_features(std::size_t input_size) const;
  // Throws when a field is outside its domain for the given problem size.
  void validate(std::size_t class_count, std::size_t input_size) const;
};

// Which features to perturb in each sample of a batch, and from which end of
// the relevance ranking they came.
struct ModificationSet {
  std::vector<std::vector<std::size_t>> features;
  std::vector<TopMode> modes;

  std::size_t sample_count() const { return features.size(); }
};

// Uniform rank in {1..top_k}, drawn once per batch. The logits only supply
// the class count for validation.
std::size_t choose_rank(const Tensor& logits, std::size_t top_k, Rng& rng);

// Index of each sample's rank-th highest logit (rank counts from 1).
std::vector<std::size_t> rank_classes(const Tensor& logits, std::size_t rank);

// The n most-positive (highest) or most-negative (lowest) relevance entries.
std::vector<std::size_t> select_features(const RelevanceMap& map,
                                         std::size_t n, TopMode mode);

// x with alpha subtracted at the given flat indices (and, when clip is set,
// the result clamped to [0,1]).
Tensor challenge_a(const Tensor& x, const std::vector<std::size_t>& features,
                   double alpha, bool clip = false);

// Mirror image of challenge_a: beta added at the given indices.
Tensor challenge_b(const Tensor& x, const std::vector<std::size_t>& features,
                   double beta, bool clip = false);

// First floor(challenge_a * B) samples decreased, the next
// floor(challenge_b * B) increased, the rest copied through in order.
Tensor apply_challenges(const Tensor& batch, const ModificationSet& mods,
                        const ChallengerConfig& cfg);

}  // namespace chal
