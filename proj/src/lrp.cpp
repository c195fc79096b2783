#include "chal/lrp.hpp"

#include <cmath>
#include <stdexcept>

namespace chal {

namespace {

double stabilized(double denom, const EpsilonRuleConfig& cfg) {
  if (!cfg.sign_stabilization) return denom + cfg.epsilon;
  return denom + (denom < 0.0 ? -cfg.epsilon : cfg.epsilon);
}

void dense_relevance(const DenseSpec& d, const LayerParams& p,
                     const Tensor& in, const Tensor& r_out, Tensor& r_in,
                     const EpsilonRuleConfig& cfg) {
  const std::size_t batch = in.dim(0);
  const double* w = p.weight.values().data();
  for (std::size_t b = 0; b < batch; ++b) {
    const double* a = in.row(b).data();
    const double* rk = r_out.row(b).data();
    double* rj = r_in.row(b).data();
    for (std::size_t k = 0; k < d.out_features; ++k) {
      if (rk[k] == 0.0) continue;
      double denom = 0.0;
      for (std::size_t j = 0; j < d.in_features; ++j) {
        denom += a[j] * w[j * d.out_features + k];
      }
      const double stab = stabilized(denom, cfg);
      if (stab == 0.0) continue;
      const double factor = rk[k] / stab;
      for (std::size_t j = 0; j < d.in_features; ++j) {
        rj[j] += a[j] * w[j * d.out_features + k] * factor;
      }
    }
  }
}

void conv_relevance(const Conv2DSpec& c, const LayerParams& p,
                    const Tensor& in, const Tensor& r_out, Tensor& r_in,
                    const EpsilonRuleConfig& cfg) {
  const std::size_t batch = in.dim(0);
  const std::size_t h = in.dim(2);
  const std::size_t w_in = in.dim(3);
  const std::size_t oh = r_out.dim(2);
  const std::size_t ow = r_out.dim(3);
  const double* w = p.weight.values().data();
  for (std::size_t b = 0; b < batch; ++b) {
    const double* x = in.row(b).data();
    const double* rk = r_out.row(b).data();
    double* rj = r_in.row(b).data();
    for (std::size_t oc = 0; oc < c.out_channels; ++oc) {
      for (std::size_t oy = 0; oy < oh; ++oy) {
        for (std::size_t ox = 0; ox < ow; ++ox) {
          const double r = rk[(oc * oh + oy) * ow + ox];
          if (r == 0.0) continue;
          double denom = 0.0;
          for (std::size_t ic = 0; ic < c.in_channels; ++ic) {
            const double* xc = x + ic * h * w_in;
            const double* wc =
                w + ((oc * c.in_channels + ic) * c.kernel_h) * c.kernel_w;
            for (std::size_t ky = 0; ky < c.kernel_h; ++ky) {
              const double* xrow =
                  xc + (oy * c.stride + ky) * w_in + ox * c.stride;
              for (std::size_t kx = 0; kx < c.kernel_w; ++kx) {
                denom += xrow[kx] * wc[ky * c.kernel_w + kx];
              }
            }
          }
          const double stab = stabilized(denom, cfg);
          if (stab == 0.0) continue;
          const double factor = r / stab;
          for (std::size_t ic = 0; ic < c.in_channels; ++ic) {
            const double* xc = x + ic * h * w_in;
            double* rc = rj + ic * h * w_in;
            const double* wc =
                w + ((oc * c.in_channels + ic) * c.kernel_h) * c.kernel_w;
            for (std::size_t ky = 0; ky < c.kernel_h; ++ky) {
              const std::size_t row = (oy * c.stride + ky) * w_in + ox * c.stride;
              for (std::size_t kx = 0; kx < c.kernel_w; ++kx) {
                rc[row + kx] += xc[row + kx] * wc[ky * c.kernel_w + kx] * factor;
              }
            }
          }
        }
      }
    }
  }
}

void maxpool_relevance(const Tensor& in, const Tensor& r_out, Tensor& r_in) {
  const std::size_t batch = in.dim(0);
  const std::size_t ch = in.dim(1);
  const std::size_t h = in.dim(2);
  const std::size_t w = in.dim(3);
  const std::size_t oh = r_out.dim(2);
  const std::size_t ow = r_out.dim(3);
  for (std::size_t b = 0; b < batch; ++b) {
    const double* x = in.row(b).data();
    const double* ro = r_out.row(b).data();
    double* ri = r_in.row(b).data();
    for (std::size_t c = 0; c < ch; ++c) {
      const double* xc = x + c * h * w;
      double* rc = ri + c * h * w;
      for (std::size_t oy = 0; oy < oh; ++oy) {
        for (std::size_t ox = 0; ox < ow; ++ox) {
          const std::size_t iy = oy * 2;
          const std::size_t ix = ox * 2;
          std::size_t best = iy * w + ix;
          if (xc[iy * w + ix + 1] > xc[best]) best = iy * w + ix + 1;
          if (xc[(iy + 1) * w + ix] > xc[best]) best = (iy + 1) * w + ix;
          if (xc[(iy + 1) * w + ix + 1] > xc[best]) {
            best = (iy + 1) * w + ix + 1;
          }
          rc[best] += ro[(c * oh + oy) * ow + ox];
        }
      }
    }
  }
}

Tensor propagate(const Network& net, const ForwardTrace& trace, Tensor r,
                 const EpsilonRuleConfig& cfg) {
  for (std::size_t i = net.layer_count(); i-- > 0;) {
    const LayerTrace& lt = trace.layers[i];
    const LayerSpec& spec = net.spec(i);
    if (const auto* d = std::get_if<DenseSpec>(&spec)) {
      Tensor r_in(lt.input.shape());
      dense_relevance(*d, net.params(i), lt.input, r, r_in, cfg);
      r = std::move(r_in);
    } else if (const auto* c = std::get_if<Conv2DSpec>(&spec)) {
      Tensor r_in(lt.input.shape());
      conv_relevance(*c, net.params(i), lt.input, r, r_in, cfg);
      r = std::move(r_in);
    } else if (std::holds_alternative<MaxPool2Spec>(spec)) {
      Tensor r_in(lt.input.shape());
      maxpool_relevance(lt.input, r, r_in);
      r = std::move(r_in);
    } else if (std::holds_alternative<FlattenSpec>(spec)) {
      r = r.reshaped(lt.input.shape());
    }
    // relu: relevance passes through unchanged
  }
  return r;
}

void check_trace(const Network& net, const ForwardTrace& trace) {
  if (trace.layers.size() != net.layer_count()) {
    throw std::invalid_argument("lrp: trace has " +
                                std::to_string(trace.layers.size()) +
                                " layers, network has " +
                                std::to_string(net.layer_count()));
  }
  if (trace.logits.rank() != 2 || trace.logits.dim(1) != net.class_count()) {
    throw std::invalid_argument("lrp: trace logits " +
                                shape_string(trace.logits.shape()) +
                                " do not match the network head");
  }
}

}  // namespace

std::vector<RelevanceMap> batch_lrp(const Network& net,
                                    const ForwardTrace& trace,
                                    const std::vector<std::size_t>& classes,
                                    const EpsilonRuleConfig& cfg) {
  check_trace(net, trace);
  if (cfg.epsilon < 0.0) {
    throw std::invalid_argument("lrp: epsilon must be nonnegative");
  }
  const std::size_t batch = trace.logits.dim(0);
  if (classes.size() != batch) {
    throw std::invalid_argument("lrp: " + std::to_string(classes.size()) +
                                " class choices for batch " +
                                std::to_string(batch));
  }
  for (std::size_t k : classes) {
    if (k >= net.class_count()) {
      throw std::invalid_argument("lrp: class " + std::to_string(k) +
                                  " out of range for " +
                                  std::to_string(net.class_count()) +
                                  " classes");
    }
  }

  Tensor seed(trace.logits.shape());
  const Tensor probs = cfg.seed_from_softmax ? softmax_rows(trace.logits)
                                             : Tensor();
  for (std::size_t b = 0; b < batch; ++b) {
    const double v = cfg.seed_from_softmax ? probs.row(b)[classes[b]]
                                           : trace.logits.row(b)[classes[b]];
    seed.row(b)[classes[b]] = v;
  }

  const Tensor relevance = propagate(net, trace, std::move(seed), cfg);
  std::vector<RelevanceMap> maps;
  maps.reserve(batch);
  for (std::size_t b = 0; b < batch; ++b) {
    maps.push_back(
        RelevanceMap{relevance.row_tensor(b), classes[b], cfg.epsilon});
  }
  return maps;
}

RelevanceMap lrp_epsilon(const Network& net, const ForwardTrace& trace,
                         std::size_t class_index,
                         const EpsilonRuleConfig& cfg) {
  check_trace(net, trace);
  if (trace.logits.dim(0) != 1) {
    throw std::invalid_argument(
        "lrp_epsilon: expected a single-sample trace, got batch " +
        std::to_string(trace.logits.dim(0)));
  }
  return std::move(batch_lrp(net, trace, {class_index}, cfg).front());
}

}  // namespace chal
