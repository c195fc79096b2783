#pragma once

#include <cstddef>
#include <vector>

#include "chal/network.hpp"
#include "chal/tensor.hpp"

namespace chal {

// Stabilized relevance redistribution. With sign_stabilization the
// denominator gets eps * sign(denom) (sign(0) treated as +1); without it the
// literal +eps is added, which can flip relevance signs near denom = -eps and
// exists for fidelity experiments only. Any output unit whose stabilized
// denominator is exactly zero distributes nothing, keeping results finite.
struct EpsilonRuleConfig {
  double epsilon = 1e-2;
  bool sign_stabilization = true;
  // Seed relevance with the class softmax probability instead of the raw
  // logit. Off by default: logits keep the conservation identity readable.
  bool seed_from_softmax = false;
};

// Per-feature relevance of one input sample toward one class score.
struct RelevanceMap {
  Tensor relevance;          // shaped like one input sample
  std::size_t class_index;   // the class whose score was decomposed
  double epsilon;            // stabilizer used to produce it
};

// Decomposes the class_index logit of the (single-sample) trace into input
// relevance. Dense and conv redistribute proportionally to a_j * w_jk with
// the bias excluded, relu is transparent, maxpool routes to the window
// winner (first occurrence on ties), flatten reshapes.
RelevanceMap lrp_epsilon(const Network& net, const ForwardTrace& trace,
                         std::size_t class_index,
                         const EpsilonRuleConfig& cfg = {});

// Same decomposition across a batched trace, one chosen class per sample.
// Sample results are independent and identical to single-sample calls.
std::vector<RelevanceMap> batch_lrp(const Network& net,
                                    const ForwardTrace& trace,
                                    const std::vector<std::size_t>& classes,
                                    const EpsilonRuleConfig& cfg = {});

}  // namespace chal
