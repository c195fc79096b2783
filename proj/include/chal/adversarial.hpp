#pragma once

#include <cstddef>
#include <vector>

#include "chal/network.hpp"
#include "chal/rng.hpp"
#include "chal/tensor.hpp"

namespace chal {

struct AdversarialConfig {
  double eps = 0.1;         // L-infinity budget around the clean sample
  double pgd_step = 0.025;  // per-iteration step size
  std::size_t pgd_iters = 7;

  void validate() const;
};

// Uniform n-subset of {0..input_size-1} without replacement, sorted.
std::vector<std::size_t> random_select_features(std::size_t input_size,
                                                std::size_t n, Rng& rng);

// x + eps * sign(grad) elementwise, with sign(0) = 0. Works on any shape.
Tensor fgsm_perturb(const Tensor& x, const Tensor& input_grad, double eps);

// Iterated sign ascent on the cross-entropy loss, each step of size
// pgd_step, the offset from x clamped into [-eps, eps] after every step.
// Starts at x itself, so one iteration with pgd_step = eps reproduces
// fgsm_perturb bit for bit.
Tensor pgd_perturb(const Network& net, const Tensor& x,
                   const std::vector<std::size_t>& labels,
                   const AdversarialConfig& cfg);

}  // namespace chal
