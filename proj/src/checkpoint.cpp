#include "chal/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

namespace chal {

namespace {

constexpr char kMagic[4] = {'C', 'H', 'L', 'G'};

static_assert(std::endian::native == std::endian::little ||
                  std::endian::native == std::endian::big,
              "mixed-endian platforms are not supported");

template <typename T>
void put(std::vector<std::uint8_t>& out, T value) {
  static_assert(std::is_integral_v<T>);
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out.push_back(static_cast<std::uint8_t>(value >> (8 * i)));
  }
}

void put_f64(std::vector<std::uint8_t>& out, double value) {
  std::uint64_t bits;
  std::memcpy(&bits, &value, sizeof(bits));
  put(out, bits);
}

class Reader {
 public:
  explicit Reader(const std::vector<std::uint8_t>& bytes) : bytes_(bytes) {}

  template <typename T>
  T get(const char* what) {
    static_assert(std::is_integral_v<T>);
    need(sizeof(T), what);
    T value = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      value |= static_cast<T>(static_cast<T>(bytes_[pos_ + i]) << (8 * i));
    }
    pos_ += sizeof(T);
    return value;
  }

  double get_f64(const char* what) {
    const std::uint64_t bits = get<std::uint64_t>(what);
    double value;
    std::memcpy(&value, &bits, sizeof(value));
    return value;
  }

  void need(std::size_t n, const char* what) {
    if (bytes_.size() - pos_ < n) {
      throw CheckpointError(CheckpointError::Kind::truncated,
                            std::string("checkpoint: truncated while reading ") +
                                what);
    }
  }

  std::size_t pos() const { return pos_; }
  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  const std::vector<std::uint8_t>& bytes_;
  std::size_t pos_ = 0;
};

std::uint8_t layer_tag(const LayerSpec& spec) {
  if (std::holds_alternative<DenseSpec>(spec)) return 1;
  if (std::holds_alternative<Conv2DSpec>(spec)) return 2;
  if (std::holds_alternative<ReluSpec>(spec)) return 3;
  if (std::holds_alternative<MaxPool2Spec>(spec)) return 4;
  return 5;
}

}  // namespace

std::vector<std::uint8_t> checkpoint_bytes(const Network& net) {
  std::vector<std::uint8_t> out;
  out.insert(out.end(), kMagic, kMagic + 4);
  put<std::uint16_t>(out, kCheckpointVersion);
  put<std::uint16_t>(out, static_cast<std::uint16_t>(net.layer_count()));
  put<std::uint16_t>(out, static_cast<std::uint16_t>(net.input_shape().size()));
  for (std::size_t d : net.input_shape()) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(d));
  }
  for (std::size_t i = 0; i < net.layer_count(); ++i) {
    const LayerSpec& spec = net.spec(i);
    put<std::uint8_t>(out, layer_tag(spec));
    if (const auto* d = std::get_if<DenseSpec>(&spec)) {
      put<std::uint32_t>(out, static_cast<std::uint32_t>(d->in_features));
      put<std::uint32_t>(out, static_cast<std::uint32_t>(d->out_features));
    } else if (const auto* c = std::get_if<Conv2DSpec>(&spec)) {
      put<std::uint32_t>(out, static_cast<std::uint32_t>(c->in_channels));
      put<std::uint32_t>(out, static_cast<std::uint32_t>(c->out_channels));
      put<std::uint32_t>(out, static_cast<std::uint32_t>(c->kernel_h));
      put<std::uint32_t>(out, static_cast<std::uint32_t>(c->kernel_w));
      put<std::uint32_t>(out, static_cast<std::uint32_t>(c->stride));
    }
  }
  for (std::size_t i = 0; i < net.layer_count(); ++i) {
    if (!layer_has_params(net.spec(i))) continue;
    for (double v : net.params(i).weight.values()) put_f64(out, v);
    for (double v : net.params(i).bias.values()) put_f64(out, v);
  }
  return out;
}

Network network_from_bytes(const std::vector<std::uint8_t>& bytes) {
  Reader r(bytes);
  r.need(4, "magic");
  if (std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw CheckpointError(CheckpointError::Kind::bad_magic,
                          "checkpoint: bad magic, not a model file");
  }
  Reader body(bytes);
  body.get<std::uint32_t>("magic");  // skip, validated above
  const auto version = body.get<std::uint16_t>("version");
  if (version != kCheckpointVersion) {
    throw CheckpointError(CheckpointError::Kind::bad_version,
                          "checkpoint: unsupported version " +
                              std::to_string(version) + ", expected " +
                              std::to_string(kCheckpointVersion));
  }
  const auto layer_count = body.get<std::uint16_t>("layer count");
  const auto rank = body.get<std::uint16_t>("input rank");
  std::vector<std::size_t> input_shape;
  for (std::uint16_t i = 0; i < rank; ++i) {
    input_shape.push_back(body.get<std::uint32_t>("input dims"));
  }
  std::vector<LayerSpec> specs;
  for (std::uint16_t i = 0; i < layer_count; ++i) {
    const auto tag = body.get<std::uint8_t>("layer tag");
    switch (tag) {
      case 1: {
        const std::size_t in = body.get<std::uint32_t>("dense sizes");
        const std::size_t out = body.get<std::uint32_t>("dense sizes");
        specs.emplace_back(DenseSpec{in, out});
        break;
      }
      case 2: {
        Conv2DSpec c;
        c.in_channels = body.get<std::uint32_t>("conv sizes");
        c.out_channels = body.get<std::uint32_t>("conv sizes");
        c.kernel_h = body.get<std::uint32_t>("conv sizes");
        c.kernel_w = body.get<std::uint32_t>("conv sizes");
        c.stride = body.get<std::uint32_t>("conv sizes");
        specs.emplace_back(c);
        break;
      }
      case 3:
        specs.emplace_back(ReluSpec{});
        break;
      case 4:
        specs.emplace_back(MaxPool2Spec{});
        break;
      case 5:
        specs.emplace_back(FlattenSpec{});
        break;
      default:
        throw CheckpointError(
            CheckpointError::Kind::malformed,
            "checkpoint: unknown layer tag " + std::to_string(tag));
    }
  }
  std::vector<LayerParams> params(specs.size());
  for (std::size_t i = 0; i < specs.size(); ++i) {
    Tensor weight, bias;
    if (const auto* d = std::get_if<DenseSpec>(&specs[i])) {
      weight = Tensor({d->in_features, d->out_features});
      bias = Tensor({d->out_features});
    } else if (const auto* c = std::get_if<Conv2DSpec>(&specs[i])) {
      weight = Tensor({c->out_channels, c->in_channels, c->kernel_h,
                       c->kernel_w});
      bias = Tensor({c->out_channels});
    } else {
      continue;
    }
    for (double& v : weight.values()) v = body.get_f64("parameters");
    for (double& v : bias.values()) v = body.get_f64("parameters");
    params[i].weight = std::move(weight);
    params[i].bias = std::move(bias);
  }
  if (body.remaining() != 0) {
    throw CheckpointError(CheckpointError::Kind::malformed,
                          "checkpoint: " + std::to_string(body.remaining()) +
                              " trailing bytes after parameters");
  }
  try {
    return Network(std::move(specs), std::move(input_shape), std::move(params));
  } catch (const std::invalid_argument& e) {
    throw CheckpointError(CheckpointError::Kind::malformed,
                          std::string("checkpoint: ") + e.what());
  }
}

void save_checkpoint(const Network& net, const std::string& path) {
  const auto bytes = checkpoint_bytes(net);
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) {
    throw std::runtime_error("checkpoint: cannot open '" + path +
                             "' for writing");
  }
  f.write(reinterpret_cast<const char*>(bytes.data()),
          static_cast<std::streamsize>(bytes.size()));
  if (!f) {
    throw std::runtime_error("checkpoint: write to '" + path + "' failed");
  }
}

Network load_checkpoint(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) {
    throw std::runtime_error("checkpoint: cannot open '" + path + "'");
  }
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)),
                                  std::istreambuf_iterator<char>());
  return network_from_bytes(bytes);
}

}  // namespace chal
