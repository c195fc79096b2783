#include "chal/adversarial.hpp"

#include <algorithm>
#include <stdexcept>

namespace chal {

void AdversarialConfig::validate() const {
  if (eps < 0.0) {
    throw std::invalid_argument("adversarial: eps must be >= 0");
  }
  if (pgd_iters < 1) {
    throw std::invalid_argument("adversarial: pgd_iters must be >= 1");
  }
  if (pgd_step <= 0.0) {
    throw std::invalid_argument("adversarial: pgd_step must be > 0");
  }
}

std::vector<std::size_t> random_select_features(std::size_t input_size,
                                                std::size_t n, Rng& rng) {
  if (n > input_size) {
    throw std::invalid_argument("random_select_features: n " +
                                std::to_string(n) + " exceeds " +
                                std::to_string(input_size) + " features");
  }
  std::vector<std::size_t> pool(input_size);
  for (std::size_t i = 0; i < input_size; ++i) pool[i] = i;
  // partial Fisher-Yates: after i swaps the prefix is a uniform i-subset
  for (std::size_t i = 0; i < n; ++i) {
    std::swap(pool[i], pool[i + rng.below(input_size - i)]);
  }
  pool.resize(n);
  std::sort(pool.begin(), pool.end());
  return pool;
}

namespace {

double sign_of(double v) {
  if (v > 0.0) return 1.0;
  if (v < 0.0) return -1.0;
  return 0.0;
}

}  // namespace

Tensor fgsm_perturb(const Tensor& x, const Tensor& input_grad, double eps) {
  if (!x.same_shape(input_grad)) {
    throw std::invalid_argument("fgsm_perturb: gradient shaped " +
                                shape_string(input_grad.shape()) +
                                " does not match input " +
                                shape_string(x.shape()));
  }
  Tensor out = x;
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = x[i] + eps * sign_of(input_grad[i]);
  }
  return out;
}

Tensor pgd_perturb(const Network& net, const Tensor& x,
                   const std::vector<std::size_t>& labels,
                   const AdversarialConfig& cfg) {
  cfg.validate();
  // the offset is tracked separately so the final value is exactly
  // x + clamp(offset), never a re-derived difference
  Tensor offset(x.shape());
  Tensor current = x;
  for (std::size_t it = 0; it < cfg.pgd_iters; ++it) {
    const ForwardTrace trace = forward_traced(net, current);
    const Gradients grads = backward(net, trace, labels);
    for (std::size_t i = 0; i < offset.size(); ++i) {
      offset[i] += cfg.pgd_step * sign_of(grads.input[i]);
      offset[i] = std::clamp(offset[i], -cfg.eps, cfg.eps);
      current[i] = x[i] + offset[i];
    }
  }
  return current;
}

}  // namespace chal
