#include "chal/network.hpp"

#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "chal/rng.hpp"

namespace chal {

namespace {

std::size_t product(const std::vector<std::size_t>& v) {
  return std::accumulate(v.begin(), v.end(), std::size_t{1},
                         std::multiplies<>());
}

std::vector<std::size_t> with_batch(std::size_t b,
                                    const std::vector<std::size_t>& sample) {
  std::vector<std::size_t> s{b};
  s.insert(s.end(), sample.begin(), sample.end());
  return s;
}

struct ConvGeometry {
  std::size_t channels, in_h, in_w, out_h, out_w;
};

ConvGeometry conv_geometry(const Conv2DSpec& c,
                           const std::vector<std::size_t>& in) {
  return ConvGeometry{c.in_channels, in[1], in[2],
                      (in[1] - c.kernel_h) / c.stride + 1,
                      (in[2] - c.kernel_w) / c.stride + 1};
}

}  // namespace

std::string layer_name(const LayerSpec& spec) {
  std::ostringstream os;
  std::visit(
      [&](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, DenseSpec>) {
          os << "dense(" << s.in_features << "->" << s.out_features << ")";
        } else if constexpr (std::is_same_v<T, Conv2DSpec>) {
          os << "conv(" << s.in_channels << "->" << s.out_channels << ", "
             << s.kernel_h << "x" << s.kernel_w << ", stride " << s.stride
             << ")";
        } else if constexpr (std::is_same_v<T, ReluSpec>) {
          os << "relu";
        } else if constexpr (std::is_same_v<T, MaxPool2Spec>) {
          os << "maxpool2x2";
        } else {
          os << "flatten";
        }
      },
      spec);
  return os.str();
}

bool layer_has_params(const LayerSpec& spec) {
  return std::holds_alternative<DenseSpec>(spec) ||
         std::holds_alternative<Conv2DSpec>(spec);
}

std::vector<std::size_t> layer_output_shape(
    const LayerSpec& spec, const std::vector<std::size_t>& input_shape) {
  const auto fail = [&](const std::string& why) -> std::vector<std::size_t> {
    throw std::invalid_argument("layer " + layer_name(spec) + ": " + why +
                                " (input " +
                                shape_string(input_shape) + ")");
  };
  if (const auto* d = std::get_if<DenseSpec>(&spec)) {
    if (d->in_features == 0 || d->out_features == 0) {
      return fail("zero feature count");
    }
    if (input_shape.size() != 1) return fail("expects a flat input");
    if (input_shape[0] != d->in_features) {
      return fail("expects " + std::to_string(d->in_features) + " features");
    }
    return {d->out_features};
  }
  if (const auto* c = std::get_if<Conv2DSpec>(&spec)) {
    if (c->in_channels == 0 || c->out_channels == 0 || c->kernel_h == 0 ||
        c->kernel_w == 0 || c->stride == 0) {
      return fail("zero-sized geometry");
    }
    if (input_shape.size() != 3) return fail("expects [C x H x W] input");
    if (input_shape[0] != c->in_channels) {
      return fail("expects " + std::to_string(c->in_channels) + " channels");
    }
    if (input_shape[1] < c->kernel_h || input_shape[2] < c->kernel_w) {
      return fail("kernel larger than input");
    }
    const auto g = conv_geometry(*c, input_shape);
    return {c->out_channels, g.out_h, g.out_w};
  }
  if (std::holds_alternative<MaxPool2Spec>(spec)) {
    if (input_shape.size() != 3) return fail("expects [C x H x W] input");
    if (input_shape[1] < 2 || input_shape[2] < 2) {
      return fail("input smaller than the 2x2 window");
    }
    return {input_shape[0], input_shape[1] / 2, input_shape[2] / 2};
  }
  if (std::holds_alternative<FlattenSpec>(spec)) {
    return {product(input_shape)};
  }
  return input_shape;  // relu
}

Network::Network(std::vector<LayerSpec> specs,
                 std::vector<std::size_t> input_shape,
                 std::vector<LayerParams> params)
    : specs_(std::move(specs)),
      params_(std::move(params)),
      input_shape_(std::move(input_shape)) {
  if (specs_.empty()) {
    throw std::invalid_argument("network: no layers");
  }
  if (params_.size() != specs_.size()) {
    throw std::invalid_argument("network: " + std::to_string(params_.size()) +
                                " parameter slots for " +
                                std::to_string(specs_.size()) + " layers");
  }
  shapes_.push_back(input_shape_);
  for (std::size_t i = 0; i < specs_.size(); ++i) {
    std::vector<std::size_t> out;
    try {
      out = layer_output_shape(specs_[i], shapes_.back());
    } catch (const std::invalid_argument& e) {
      const std::string prev =
          i == 0 ? "network input" : "layer " + std::to_string(i - 1) + " (" +
                                         layer_name(specs_[i - 1]) + ")";
      throw std::invalid_argument("network: " + prev + " feeding layer " +
                                  std::to_string(i) + " is incompatible: " +
                                  e.what());
    }
    shapes_.push_back(std::move(out));
  }
  const auto* last = std::get_if<DenseSpec>(&specs_.back());
  if (last == nullptr) {
    throw std::invalid_argument("network: final layer must be dense, got " +
                                layer_name(specs_.back()));
  }
  class_count_ = last->out_features;

  for (std::size_t i = 0; i < specs_.size(); ++i) {
    const LayerParams& p = params_[i];
    if (const auto* d = std::get_if<DenseSpec>(&specs_[i])) {
      const std::vector<std::size_t> w{d->in_features, d->out_features};
      if (p.weight.shape() != w || p.bias.shape() !=
                                       std::vector<std::size_t>{
                                           d->out_features}) {
        throw std::invalid_argument("network: layer " + std::to_string(i) +
                                    " (" + layer_name(specs_[i]) +
                                    ") has mis-shaped parameters");
      }
    } else if (const auto* c = std::get_if<Conv2DSpec>(&specs_[i])) {
      const std::vector<std::size_t> w{c->out_channels, c->in_channels,
                                       c->kernel_h, c->kernel_w};
      if (p.weight.shape() != w || p.bias.shape() !=
                                       std::vector<std::size_t>{
                                           c->out_channels}) {
        throw std::invalid_argument("network: layer " + std::to_string(i) +
                                    " (" + layer_name(specs_[i]) +
                                    ") has mis-shaped parameters");
      }
    } else if (!p.weight.empty() || !p.bias.empty()) {
      throw std::invalid_argument("network: layer " + std::to_string(i) +
                                  " (" + layer_name(specs_[i]) +
                                  ") takes no parameters");
    }
  }
}

std::size_t Network::parameter_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) {
    n += p.weight.size() + p.bias.size();
  }
  return n;
}

Network build_network(std::vector<LayerSpec> specs,
                      std::vector<std::size_t> input_shape,
                      std::uint64_t seed) {
  Rng rng(seed);
  std::vector<LayerParams> params;
  params.reserve(specs.size());
  std::vector<std::size_t> shape = input_shape;
  for (const LayerSpec& spec : specs) {
    LayerParams p;
    if (const auto* d = std::get_if<DenseSpec>(&spec)) {
      const double scale = std::sqrt(2.0 / static_cast<double>(d->in_features));
      p.weight = Tensor({d->in_features, d->out_features});
      for (double& w : p.weight.values()) {
        w = rng.normal(0.0, scale);
      }
      p.bias = Tensor({d->out_features});
    } else if (const auto* c = std::get_if<Conv2DSpec>(&spec)) {
      const double fan_in =
          static_cast<double>(c->in_channels * c->kernel_h * c->kernel_w);
      const double scale = std::sqrt(2.0 / fan_in);
      p.weight = Tensor({c->out_channels, c->in_channels, c->kernel_h,
                         c->kernel_w});
      for (double& w : p.weight.values()) {
        w = rng.normal(0.0, scale);
      }
      p.bias = Tensor({c->out_channels});
    }
    params.push_back(std::move(p));
    shape = layer_output_shape(spec, shape);  // surfaces bad specs early
  }
  return Network(std::move(specs), std::move(input_shape), std::move(params));
}

namespace {

Tensor dense_forward(const DenseSpec& d, const LayerParams& p,
                     const Tensor& in) {
  Tensor out = matmul(in, p.weight);
  const std::size_t b = out.dim(0);
  for (std::size_t i = 0; i < b; ++i) {
    auto r = out.row(i);
    for (std::size_t j = 0; j < d.out_features; ++j) {
      r[j] += p.bias[j];
    }
  }
  return out;
}

Tensor conv_forward(const Conv2DSpec& c, const LayerParams& p,
                    const Tensor& in) {
  const std::size_t batch = in.dim(0);
  const auto g = conv_geometry(c, {in.dim(1), in.dim(2), in.dim(3)});
  Tensor out({batch, c.out_channels, g.out_h, g.out_w});
  const double* w = p.weight.values().data();
  for (std::size_t b = 0; b < batch; ++b) {
    const double* x = in.row(b).data();
    double* y = out.row(b).data();
    for (std::size_t oc = 0; oc < c.out_channels; ++oc) {
      const double bias = p.bias[oc];
      for (std::size_t oy = 0; oy < g.out_h; ++oy) {
        for (std::size_t ox = 0; ox < g.out_w; ++ox) {
          double acc = bias;
          for (std::size_t ic = 0; ic < c.in_channels; ++ic) {
            const double* xc = x + ic * g.in_h * g.in_w;
            const double* wc =
                w + ((oc * c.in_channels + ic) * c.kernel_h) * c.kernel_w;
            for (std::size_t ky = 0; ky < c.kernel_h; ++ky) {
              const double* xrow =
                  xc + (oy * c.stride + ky) * g.in_w + ox * c.stride;
              const double* wrow = wc + ky * c.kernel_w;
              for (std::size_t kx = 0; kx < c.kernel_w; ++kx) {
                acc += xrow[kx] * wrow[kx];
              }
            }
          }
          y[(oc * g.out_h + oy) * g.out_w + ox] = acc;
        }
      }
    }
  }
  return out;
}

Tensor maxpool_forward(const Tensor& in) {
  const std::size_t batch = in.dim(0);
  const std::size_t ch = in.dim(1);
  const std::size_t h = in.dim(2);
  const std::size_t w = in.dim(3);
  const std::size_t oh = h / 2;
  const std::size_t ow = w / 2;
  Tensor out({batch, ch, oh, ow});
  for (std::size_t b = 0; b < batch; ++b) {
    const double* x = in.row(b).data();
    double* y = out.row(b).data();
    for (std::size_t c = 0; c < ch; ++c) {
      const double* xc = x + c * h * w;
      for (std::size_t oy = 0; oy < oh; ++oy) {
        for (std::size_t ox = 0; ox < ow; ++ox) {
          const std::size_t iy = oy * 2;
          const std::size_t ix = ox * 2;
          double best = xc[iy * w + ix];
          if (xc[iy * w + ix + 1] > best) best = xc[iy * w + ix + 1];
          if (xc[(iy + 1) * w + ix] > best) best = xc[(iy + 1) * w + ix];
          if (xc[(iy + 1) * w + ix + 1] > best) best = xc[(iy + 1) * w + ix + 1];
          y[(c * oh + oy) * ow + ox] = best;
        }
      }
    }
  }
  return out;
}

Tensor apply_layer(const LayerSpec& spec, const LayerParams& p,
                   const Tensor& in,
                   const std::vector<std::size_t>& out_sample_shape) {
  if (const auto* d = std::get_if<DenseSpec>(&spec)) {
    return dense_forward(*d, p, in);
  }
  if (const auto* c = std::get_if<Conv2DSpec>(&spec)) {
    return conv_forward(*c, p, in);
  }
  if (std::holds_alternative<MaxPool2Spec>(spec)) {
    return maxpool_forward(in);
  }
  if (std::holds_alternative<FlattenSpec>(spec)) {
    return in.reshaped(with_batch(in.dim(0), out_sample_shape));
  }
  Tensor out = in;  // relu
  for (double& v : out.values()) {
    if (v < 0.0) v = 0.0;
  }
  return out;
}

void check_input(const Network& net, const Tensor& x) {
  const auto& in = net.input_shape();
  const auto& s = x.shape();
  if (s.size() != in.size() + 1 ||
      !std::equal(in.begin(), in.end(), s.begin() + 1)) {
    throw std::invalid_argument("forward: input " + shape_string(s) +
                                " does not match network input " +
                                shape_string(in));
  }
}

}  // namespace

Tensor forward(const Network& net, const Tensor& x) {
  check_input(net, x);
  Tensor a = x;
  for (std::size_t i = 0; i < net.layer_count(); ++i) {
    a = apply_layer(net.spec(i), net.params(i), a, net.shape_before(i + 1));
  }
  return a;
}

ForwardTrace forward_traced(const Network& net, const Tensor& x) {
  check_input(net, x);
  ForwardTrace trace;
  trace.layers.reserve(net.layer_count());
  Tensor a = x;
  for (std::size_t i = 0; i < net.layer_count(); ++i) {
    Tensor out =
        apply_layer(net.spec(i), net.params(i), a, net.shape_before(i + 1));
    trace.layers.push_back(LayerTrace{std::move(a), out});
    a = std::move(out);
  }
  trace.logits = a;
  return trace;
}

Tensor softmax_rows(const Tensor& logits) {
  Tensor probs = logits;
  const std::size_t b = logits.dim(0);
  const std::size_t c = logits.dim(1);
  for (std::size_t i = 0; i < b; ++i) {
    auto r = probs.row(i);
    double mx = r[0];
    for (std::size_t j = 1; j < c; ++j) {
      if (r[j] > mx) mx = r[j];
    }
    double sum = 0.0;
    for (std::size_t j = 0; j < c; ++j) {
      r[j] = std::exp(r[j] - mx);
      sum += r[j];
    }
    for (std::size_t j = 0; j < c; ++j) {
      r[j] /= sum;
    }
  }
  return probs;
}

namespace {

Tensor dense_backward(const DenseSpec&, const LayerParams& p,
                      const Tensor& in, const Tensor& d_out,
                      LayerParams& grad) {
  grad.weight = matmul(transpose(in), d_out);
  grad.bias = Tensor({d_out.dim(1)});
  for (std::size_t b = 0; b < d_out.dim(0); ++b) {
    auto r = d_out.row(b);
    for (std::size_t j = 0; j < d_out.dim(1); ++j) {
      grad.bias[j] += r[j];
    }
  }
  return matmul(d_out, transpose(p.weight));
}

Tensor conv_backward(const Conv2DSpec& c, const LayerParams& p,
                     const Tensor& in, const Tensor& d_out,
                     LayerParams& grad) {
  const std::size_t batch = in.dim(0);
  const auto g = conv_geometry(c, {in.dim(1), in.dim(2), in.dim(3)});
  grad.weight = Tensor(p.weight.shape());
  grad.bias = Tensor(p.bias.shape());
  Tensor d_in(in.shape());
  const double* w = p.weight.values().data();
  double* dw = grad.weight.values().data();
  for (std::size_t b = 0; b < batch; ++b) {
    const double* x = in.row(b).data();
    const double* dy = d_out.row(b).data();
    double* dx = d_in.row(b).data();
    for (std::size_t oc = 0; oc < c.out_channels; ++oc) {
      for (std::size_t oy = 0; oy < g.out_h; ++oy) {
        for (std::size_t ox = 0; ox < g.out_w; ++ox) {
          const double dval = dy[(oc * g.out_h + oy) * g.out_w + ox];
          if (dval == 0.0) continue;
          grad.bias[oc] += dval;
          for (std::size_t ic = 0; ic < c.in_channels; ++ic) {
            const double* xc = x + ic * g.in_h * g.in_w;
            double* dxc = dx + ic * g.in_h * g.in_w;
            const std::size_t base =
                ((oc * c.in_channels + ic) * c.kernel_h) * c.kernel_w;
            for (std::size_t ky = 0; ky < c.kernel_h; ++ky) {
              const std::size_t iy = oy * c.stride + ky;
              for (std::size_t kx = 0; kx < c.kernel_w; ++kx) {
                const std::size_t ix = ox * c.stride + kx;
                dw[base + ky * c.kernel_w + kx] += xc[iy * g.in_w + ix] * dval;
                dxc[iy * g.in_w + ix] += w[base + ky * c.kernel_w + kx] * dval;
              }
            }
          }
        }
      }
    }
  }
  return d_in;
}

Tensor maxpool_backward(const Tensor& in, const Tensor& d_out) {
  const std::size_t batch = in.dim(0);
  const std::size_t ch = in.dim(1);
  const std::size_t h = in.dim(2);
  const std::size_t w = in.dim(3);
  const std::size_t oh = h / 2;
  const std::size_t ow = w / 2;
  Tensor d_in(in.shape());
  for (std::size_t b = 0; b < batch; ++b) {
    const double* x = in.row(b).data();
    const double* dy = d_out.row(b).data();
    double* dx = d_in.row(b).data();
    for (std::size_t c = 0; c < ch; ++c) {
      const double* xc = x + c * h * w;
      double* dxc = dx + c * h * w;
      for (std::size_t oy = 0; oy < oh; ++oy) {
        for (std::size_t ox = 0; ox < ow; ++ox) {
          const std::size_t iy = oy * 2;
          const std::size_t ix = ox * 2;
          // first maximum in row-major scan order wins
          std::size_t best = iy * w + ix;
          if (xc[iy * w + ix + 1] > xc[best]) best = iy * w + ix + 1;
          if (xc[(iy + 1) * w + ix] > xc[best]) best = (iy + 1) * w + ix;
          if (xc[(iy + 1) * w + ix + 1] > xc[best]) {
            best = (iy + 1) * w + ix + 1;
          }
          dxc[best] += dy[(c * oh + oy) * ow + ox];
        }
      }
    }
  }
  return d_in;
}

}  // namespace

Gradients backward(const Network& net, const ForwardTrace& trace,
                   const std::vector<std::size_t>& labels) {
  if (trace.layers.size() != net.layer_count()) {
    throw std::invalid_argument(
        "backward: trace has " + std::to_string(trace.layers.size()) +
        " layers, network has " + std::to_string(net.layer_count()));
  }
  const std::size_t batch = trace.logits.dim(0);
  const std::size_t classes = trace.logits.dim(1);
  if (labels.size() != batch) {
    throw std::invalid_argument("backward: " + std::to_string(labels.size()) +
                                " labels for batch " + std::to_string(batch));
  }
  for (std::size_t label : labels) {
    if (label >= classes) {
      throw std::invalid_argument("backward: label " + std::to_string(label) +
                                  " out of range for " +
                                  std::to_string(classes) + " classes");
    }
  }

  Gradients grads;
  grads.params.resize(net.layer_count());

  // d(mean CE)/d(logits) = (softmax - onehot) / batch
  Tensor delta = softmax_rows(trace.logits);
  double loss = 0.0;
  const double inv_b = 1.0 / static_cast<double>(batch);
  for (std::size_t b = 0; b < batch; ++b) {
    auto r = delta.row(b);
    loss -= std::log(r[labels[b]]);
    for (std::size_t j = 0; j < classes; ++j) {
      r[j] *= inv_b;
    }
    r[labels[b]] -= inv_b;
  }
  grads.loss = loss * inv_b;

  for (std::size_t i = net.layer_count(); i-- > 0;) {
    const LayerTrace& lt = trace.layers[i];
    const LayerSpec& spec = net.spec(i);
    if (const auto* d = std::get_if<DenseSpec>(&spec)) {
      delta = dense_backward(*d, net.params(i), lt.input, delta,
                             grads.params[i]);
    } else if (const auto* c = std::get_if<Conv2DSpec>(&spec)) {
      delta = conv_backward(*c, net.params(i), lt.input, delta,
                            grads.params[i]);
    } else if (std::holds_alternative<MaxPool2Spec>(spec)) {
      delta = maxpool_backward(lt.input, delta);
    } else if (std::holds_alternative<FlattenSpec>(spec)) {
      delta = delta.reshaped(lt.input.shape());
    } else {  // relu: pass gradient where the input was positive
      Tensor d_in = delta;
      const auto& in = lt.input;
      for (std::size_t j = 0; j < d_in.size(); ++j) {
        if (in[j] <= 0.0) d_in[j] = 0.0;
      }
      delta = std::move(d_in);
    }
  }
  grads.input = std::move(delta);
  return grads;
}

AdamState::AdamState(const Network& net, AdamConfig cfg) : cfg_(cfg) {
  m_.resize(net.layer_count());
  v_.resize(net.layer_count());
  for (std::size_t i = 0; i < net.layer_count(); ++i) {
    if (layer_has_params(net.spec(i))) {
      m_[i].weight = Tensor(net.params(i).weight.shape());
      m_[i].bias = Tensor(net.params(i).bias.shape());
      v_[i].weight = Tensor(net.params(i).weight.shape());
      v_[i].bias = Tensor(net.params(i).bias.shape());
    }
  }
}

namespace {

void adam_update_tensor(Tensor& param, const Tensor& grad, Tensor& m,
                        Tensor& v, const AdamConfig& cfg, double bc1,
                        double bc2) {
  if (!param.same_shape(grad)) {
    throw std::invalid_argument("adam_step: gradient shape " +
                                shape_string(grad.shape()) +
                                " does not match parameter " +
                                shape_string(param.shape()));
  }
  for (std::size_t i = 0; i < param.size(); ++i) {
    const double g = grad[i];
    m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g;
    v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g * g;
    const double m_hat = m[i] / bc1;
    const double v_hat = v[i] / bc2;
    param[i] -= cfg.lr * m_hat / (std::sqrt(v_hat) + cfg.eps);
  }
}

}  // namespace

void adam_step(Network& net, const Gradients& grads, AdamState& state) {
  if (grads.params.size() != net.layer_count()) {
    throw std::invalid_argument("adam_step: gradient layer count mismatch");
  }
  state.step_ += 1;
  const double t = static_cast<double>(state.step_);
  const double bc1 = 1.0 - std::pow(state.cfg_.beta1, t);
  const double bc2 = 1.0 - std::pow(state.cfg_.beta2, t);
  for (std::size_t i = 0; i < net.layer_count(); ++i) {
    if (!layer_has_params(net.spec(i))) continue;
    LayerParams& p = net.params(i);
    adam_update_tensor(p.weight, grads.params[i].weight, state.m_[i].weight,
                       state.v_[i].weight, state.cfg_, bc1, bc2);
    adam_update_tensor(p.bias, grads.params[i].bias, state.m_[i].bias,
                       state.v_[i].bias, state.cfg_, bc1, bc2);
  }
}

std::vector<LayerSpec> parse_architecture(
    const std::string& text, const std::vector<std::size_t>& input_shape) {
  std::vector<LayerSpec> specs;
  std::vector<std::size_t> shape = input_shape;
  std::istringstream is(text);
  std::string token;
  const auto parse_sizes = [](const std::string& s, const std::string& tok) {
    std::vector<std::size_t> out;
    std::istringstream fs(s);
    std::string field;
    while (std::getline(fs, field, ',')) {
      std::size_t pos = 0;
      unsigned long long v = 0;
      try {
        v = std::stoull(field, &pos);
      } catch (const std::exception&) {
        pos = 0;
      }
      if (pos != field.size() || field.empty()) {
        throw std::invalid_argument("architecture: bad number '" + field +
                                    "' in token '" + tok + "'");
      }
      out.push_back(static_cast<std::size_t>(v));
    }
    return out;
  };
  while (is >> token) {
    if (token == "relu") {
      specs.emplace_back(ReluSpec{});
    } else if (token == "pool") {
      specs.emplace_back(MaxPool2Spec{});
    } else if (token == "flatten") {
      specs.emplace_back(FlattenSpec{});
    } else if (token.rfind("dense:", 0) == 0) {
      const auto sizes = parse_sizes(token.substr(6), token);
      if (sizes.size() != 1) {
        throw std::invalid_argument("architecture: dense takes one size, got '" +
                                    token + "'");
      }
      if (shape.size() != 1) {
        throw std::invalid_argument(
            "architecture: dense needs a flat input; insert 'flatten' before '" +
            token + "'");
      }
      specs.emplace_back(DenseSpec{shape[0], sizes[0]});
    } else if (token.rfind("conv:", 0) == 0) {
      const auto sizes = parse_sizes(token.substr(5), token);
      if (sizes.size() != 3 && sizes.size() != 4) {
        throw std::invalid_argument(
            "architecture: conv takes OC,KH,KW[,STRIDE], got '" + token + "'");
      }
      if (shape.size() != 3) {
        throw std::invalid_argument(
            "architecture: conv needs a [C x H x W] input at '" + token + "'");
      }
      specs.emplace_back(Conv2DSpec{shape[0], sizes[0], sizes[1], sizes[2],
                                    sizes.size() == 4 ? sizes[3] : 1});
    } else {
      throw std::invalid_argument("architecture: unknown token '" + token +
                                  "'");
    }
    shape = layer_output_shape(specs.back(), shape);
  }
  if (specs.empty()) {
    throw std::invalid_argument("architecture: empty specification");
  }
  return specs;
}

}  // namespace chal
