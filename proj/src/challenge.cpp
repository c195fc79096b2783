#include "chal/challenge.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace chal {

std::size_t ChallengerConfig::resolved_n_features(
    std::size_t input_size) const {
  if (n_features.has_value()) return *n_features;
  return static_cast<std::size_t>(
      std::ceil(0.05 * static_cast<double>(input_size)));
}

void ChallengerConfig::validate(std::size_t class_count,
                                std::size_t input_size) const {
  if (alpha < 0.0 || beta < 0.0) {
    throw std::invalid_argument("challenger: alpha and beta must be >= 0");
  }
  if (top_k < 1 || top_k > class_count) {
    throw std::invalid_argument("challenger: top_k " + std::to_string(top_k) +
                                " outside 1.." +
                                std::to_string(class_count));
  }
  if (resolved_n_features(input_size) > input_size) {
    throw std::invalid_argument(
        "challenger: n_features " +
        std::to_string(resolved_n_features(input_size)) + " exceeds the " +
        std::to_string(input_size) + " input features");
  }
  if (split.challenge_a < 0.0 || split.challenge_b < 0.0 ||
      split.unmodified < 0.0 ||
      std::abs(split.challenge_a + split.challenge_b + split.unmodified -
               1.0) > 1e-9) {
    throw std::invalid_argument("challenger: split fractions must be "
                                "nonnegative and sum to 1");
  }
  if (epsilon_rule.epsilon < 0.0) {
    throw std::invalid_argument("challenger: epsilon must be >= 0");
  }
}

std::size_t choose_rank(const Tensor& logits, std::size_t top_k, Rng& rng) {
  if (logits.rank() != 2) {
    throw std::invalid_argument("choose_rank: logits must be [batch x classes]");
  }
  if (top_k < 1 || top_k > logits.dim(1)) {
    throw std::invalid_argument("choose_rank: top_k " + std::to_string(top_k) +
                                " outside 1.." + std::to_string(logits.dim(1)));
  }
  return 1 + rng.below(top_k);
}

std::vector<std::size_t> rank_classes(const Tensor& logits, std::size_t rank) {
  if (logits.rank() != 2) {
    throw std::invalid_argument("rank_classes: logits must be [batch x classes]");
  }
  if (rank < 1 || rank > logits.dim(1)) {
    throw std::invalid_argument("rank_classes: rank " + std::to_string(rank) +
                                " outside 1.." + std::to_string(logits.dim(1)));
  }
  std::vector<std::size_t> classes(logits.dim(0));
  for (std::size_t b = 0; b < logits.dim(0); ++b) {
    classes[b] = topn_indices(logits.row_tensor(b), rank, TopMode::highest)
                     .back();
  }
  return classes;
}

std::vector<std::size_t> select_features(const RelevanceMap& map,
                                         std::size_t n, TopMode mode) {
  if (n > map.relevance.size()) {
    throw std::invalid_argument("select_features: n " + std::to_string(n) +
                                " exceeds " +
                                std::to_string(map.relevance.size()) +
                                " features");
  }
  return topn_indices(map.relevance, n, mode);
}

namespace {

Tensor shift_features(const Tensor& x, const std::vector<std::size_t>& features,
                      double delta, bool clip, const char* who) {
  Tensor out = x;
  for (std::size_t i : features) {
    if (i >= out.size()) {
      throw std::invalid_argument(std::string(who) + ": feature index " +
                                  std::to_string(i) + " out of range for " +
                                  std::to_string(out.size()) + " features");
    }
    out[i] += delta;
    if (clip) out[i] = std::clamp(out[i], 0.0, 1.0);
  }
  return out;
}

}  // namespace

Tensor challenge_a(const Tensor& x, const std::vector<std::size_t>& features,
                   double alpha, bool clip) {
  return shift_features(x, features, -alpha, clip, "challenge_a");
}

Tensor challenge_b(const Tensor& x, const std::vector<std::size_t>& features,
                   double beta, bool clip) {
  return shift_features(x, features, beta, clip, "challenge_b");
}

Tensor apply_challenges(const Tensor& batch, const ModificationSet& mods,
                        const ChallengerConfig& cfg) {
  const std::size_t b = batch.batch();
  if (mods.features.size() != b || mods.modes.size() != b) {
    throw std::invalid_argument("apply_challenges: modification set covers " +
                                std::to_string(mods.features.size()) +
                                " samples, batch has " + std::to_string(b));
  }
  const auto count_a =
      static_cast<std::size_t>(std::floor(cfg.split.challenge_a *
                                          static_cast<double>(b)));
  const auto count_b =
      static_cast<std::size_t>(std::floor(cfg.split.challenge_b *
                                          static_cast<double>(b)));
  Tensor out = batch;
  const std::size_t row = batch.row_size();
  for (std::size_t s = 0; s < count_a + count_b; ++s) {
    const bool decrease = s < count_a;
    const double delta = decrease ? -cfg.alpha : cfg.beta;
    auto r = out.row(s);
    for (std::size_t i : mods.features[s]) {
      if (i >= row) {
        throw std::invalid_argument(
            "apply_challenges: feature index " + std::to_string(i) +
            " out of range for " + std::to_string(row) + " features");
      }
      r[i] += delta;
      if (cfg.clip_to_input_range) r[i] = std::clamp(r[i], 0.0, 1.0);
    }
  }
  return out;
}

}  // namespace chal
