#include "chal/data.hpp"

#include <zlib.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

namespace chal {

std::vector<std::size_t> Dataset::sample_shape() const {
  if (inputs.rank() == 0) return {};
  return std::vector<std::size_t>(inputs.shape().begin() + 1,
                                  inputs.shape().end());
}

std::size_t Dataset::sample_size() const {
  return size() == 0 ? 0 : inputs.row_size();
}

void Dataset::validate() const {
  if (size() == 0) {
    if (!inputs.empty()) {
      throw std::invalid_argument("dataset: inputs present but no labels");
    }
    return;
  }
  if (inputs.rank() < 2 || inputs.dim(0) != labels.size()) {
    throw std::invalid_argument(
        "dataset: inputs " + shape_string(inputs.shape()) + " vs " +
        std::to_string(labels.size()) + " labels");
  }
  for (std::size_t label : labels) {
    if (label >= classes) {
      throw std::invalid_argument("dataset: label " + std::to_string(label) +
                                  " outside " + std::to_string(classes) +
                                  " classes");
    }
  }
  for (double v : inputs.values()) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw std::invalid_argument("dataset: input value " +
                                  std::to_string(v) + " outside [0,1]");
    }
  }
}

namespace {

constexpr std::uint32_t kImageMagic = 0x00000803;
constexpr std::uint32_t kLabelMagic = 0x00000801;

std::vector<std::uint8_t> read_binary(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) {
    throw std::runtime_error("idx: cannot open '" + path + "'");
  }
  return std::vector<std::uint8_t>((std::istreambuf_iterator<char>(f)),
                                   std::istreambuf_iterator<char>());
}

std::vector<std::uint8_t> gunzip(const std::vector<std::uint8_t>& in,
                                 const std::string& path) {
  z_stream zs{};
  // 15 window bits + 16 selects gzip framing
  if (inflateInit2(&zs, 15 + 16) != Z_OK) {
    throw std::runtime_error("idx: inflate init failed for '" + path + "'");
  }
  std::vector<std::uint8_t> out;
  std::uint8_t buf[1 << 15];
  zs.next_in = const_cast<Bytef*>(in.data());
  zs.avail_in = static_cast<uInt>(in.size());
  int rc = Z_OK;
  do {
    zs.next_out = buf;
    zs.avail_out = sizeof(buf);
    rc = inflate(&zs, Z_NO_FLUSH);
    if (rc != Z_OK && rc != Z_STREAM_END) {
      inflateEnd(&zs);
      throw std::runtime_error("idx: '" + path + "' is not valid gzip data");
    }
    out.insert(out.end(), buf, buf + (sizeof(buf) - zs.avail_out));
  } while (rc != Z_STREAM_END);
  inflateEnd(&zs);
  return out;
}

std::vector<std::uint8_t> gzip_bytes(const std::vector<std::uint8_t>& in) {
  z_stream zs{};
  if (deflateInit2(&zs, Z_DEFAULT_COMPRESSION, Z_DEFLATED, 15 + 16, 8,
                   Z_DEFAULT_STRATEGY) != Z_OK) {
    throw std::runtime_error("idx: deflate init failed");
  }
  std::vector<std::uint8_t> out;
  std::uint8_t buf[1 << 15];
  zs.next_in = const_cast<Bytef*>(in.data());
  zs.avail_in = static_cast<uInt>(in.size());
  int rc = Z_OK;
  do {
    zs.next_out = buf;
    zs.avail_out = sizeof(buf);
    rc = deflate(&zs, Z_FINISH);
    out.insert(out.end(), buf, buf + (sizeof(buf) - zs.avail_out));
  } while (rc != Z_STREAM_END);
  deflateEnd(&zs);
  return out;
}

std::vector<std::uint8_t> read_maybe_gzip(const std::string& path) {
  auto bytes = read_binary(path);
  if (bytes.size() >= 2 && bytes[0] == 0x1f && bytes[1] == 0x8b) {
    return gunzip(bytes, path);
  }
  return bytes;
}

std::uint32_t be32(const std::vector<std::uint8_t>& b, std::size_t at,
                   const std::string& path) {
  if (b.size() < at + 4) {
    throw IdxError(IdxError::Kind::truncated,
                   "idx: '" + path + "' truncated in the header");
  }
  return (std::uint32_t(b[at]) << 24) | (std::uint32_t(b[at + 1]) << 16) |
         (std::uint32_t(b[at + 2]) << 8) | std::uint32_t(b[at + 3]);
}

void put_be32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 24));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

void write_maybe_gzip(const std::string& path,
                      const std::vector<std::uint8_t>& bytes) {
  const bool compress =
      path.size() >= 3 && path.compare(path.size() - 3, 3, ".gz") == 0;
  const auto& payload = compress ? gzip_bytes(bytes) : bytes;
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) {
    throw std::runtime_error("idx: cannot open '" + path + "' for writing");
  }
  f.write(reinterpret_cast<const char*>(payload.data()),
          static_cast<std::streamsize>(payload.size()));
  if (!f) {
    throw std::runtime_error("idx: write to '" + path + "' failed");
  }
}

}  // namespace

Dataset load_idx(const std::string& images_path,
                 const std::string& labels_path) {
  const auto img = read_maybe_gzip(images_path);
  const auto lab = read_maybe_gzip(labels_path);

  if (be32(img, 0, images_path) != kImageMagic) {
    throw IdxError(IdxError::Kind::bad_magic,
                   "idx: '" + images_path + "' lacks the image magic");
  }
  if (be32(lab, 0, labels_path) != kLabelMagic) {
    throw IdxError(IdxError::Kind::bad_magic,
                   "idx: '" + labels_path + "' lacks the label magic");
  }
  const std::size_t n = be32(img, 4, images_path);
  const std::size_t rows = be32(img, 8, images_path);
  const std::size_t cols = be32(img, 12, images_path);
  const std::size_t n_labels = be32(lab, 4, labels_path);
  if (n != n_labels) {
    throw IdxError(IdxError::Kind::count_mismatch,
                   "idx: " + std::to_string(n) + " images vs " +
                       std::to_string(n_labels) + " labels");
  }
  if (img.size() != 16 + n * rows * cols) {
    throw IdxError(IdxError::Kind::truncated,
                   "idx: '" + images_path + "' holds " +
                       std::to_string(img.size() - 16) + " pixel bytes, " +
                       std::to_string(n * rows * cols) + " declared");
  }
  if (lab.size() != 8 + n) {
    throw IdxError(IdxError::Kind::truncated,
                   "idx: '" + labels_path + "' holds " +
                       std::to_string(lab.size() - 8) + " label bytes, " +
                       std::to_string(n) + " declared");
  }

  Dataset ds;
  ds.labels.resize(n);
  std::size_t max_label = 0;
  for (std::size_t i = 0; i < n; ++i) {
    ds.labels[i] = lab[8 + i];
    max_label = std::max<std::size_t>(max_label, ds.labels[i]);
  }
  ds.classes = n == 0 ? 0 : max_label + 1;
  if (n > 0) {
    std::vector<double> pixels(n * rows * cols);
    for (std::size_t i = 0; i < pixels.size(); ++i) {
      pixels[i] = static_cast<double>(img[16 + i]) / 255.0;
    }
    ds.inputs = Tensor({n, 1, rows, cols}, std::move(pixels));
  }
  return ds;
}

void save_idx(const Dataset& ds, const std::string& images_path,
              const std::string& labels_path) {
  if (ds.size() > 0 && ds.inputs.rank() != 4) {
    throw std::invalid_argument("idx: can only write [n x 1 x r x c] images, "
                                "got " + shape_string(ds.inputs.shape()));
  }
  std::vector<std::uint8_t> img;
  put_be32(img, kImageMagic);
  put_be32(img, static_cast<std::uint32_t>(ds.size()));
  put_be32(img, ds.size() == 0 ? 0 : static_cast<std::uint32_t>(ds.inputs.dim(2)));
  put_be32(img, ds.size() == 0 ? 0 : static_cast<std::uint32_t>(ds.inputs.dim(3)));
  for (double v : ds.inputs.values()) {
    img.push_back(static_cast<std::uint8_t>(std::lround(v * 255.0)));
  }
  std::vector<std::uint8_t> lab;
  put_be32(lab, kLabelMagic);
  put_be32(lab, static_cast<std::uint32_t>(ds.size()));
  for (std::size_t label : ds.labels) {
    lab.push_back(static_cast<std::uint8_t>(label));
  }
  write_maybe_gzip(images_path, img);
  write_maybe_gzip(labels_path, lab);
}

Dataset tiny_subset(const Dataset& ds, std::size_t per_class,
                    std::uint64_t seed) {
  std::vector<std::vector<std::size_t>> by_class(ds.classes);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    by_class[ds.labels[i]].push_back(i);
  }
  Rng rng(seed);
  std::vector<std::size_t> chosen;
  for (std::size_t c = 0; c < ds.classes; ++c) {
    if (by_class[c].size() < per_class) {
      throw std::invalid_argument(
          "tiny_subset: class " + std::to_string(c) + " has only " +
          std::to_string(by_class[c].size()) + " samples, need " +
          std::to_string(per_class));
    }
    rng.shuffle(by_class[c]);
    chosen.insert(chosen.end(), by_class[c].begin(),
                  by_class[c].begin() + per_class);
  }
  std::sort(chosen.begin(), chosen.end());

  Dataset out;
  out.classes = ds.classes;
  out.split = ds.split;
  out.labels.reserve(chosen.size());
  if (!chosen.empty()) {
    std::vector<std::size_t> shape = ds.inputs.shape();
    shape[0] = chosen.size();
    Tensor inputs(shape);
    for (std::size_t i = 0; i < chosen.size(); ++i) {
      const auto src = ds.inputs.row(chosen[i]);
      std::copy(src.begin(), src.end(), inputs.row(i).begin());
      out.labels.push_back(ds.labels[chosen[i]]);
    }
    out.inputs = std::move(inputs);
  }
  return out;
}

Dataset synth_blobs(std::size_t classes, std::size_t per_class,
                    std::size_t dim, double separation, std::uint64_t seed) {
  if (classes == 0 || dim == 0) {
    throw std::invalid_argument("synth_blobs: classes and dim must be >= 1");
  }
  if (separation <= 0.0) {
    throw std::invalid_argument("synth_blobs: separation must be > 0");
  }
  // centers sit on a circle in the first two dimensions (a line when 1-D);
  // sigma is the neighbor distance divided by the requested separation
  const double pi = std::acos(-1.0);
  std::vector<std::vector<double>> centers(classes,
                                           std::vector<double>(dim, 0.5));
  double neighbor_dist = 0.0;
  if (classes == 1) {
    neighbor_dist = 0.6;
  } else if (dim == 1) {
    for (std::size_t c = 0; c < classes; ++c) {
      centers[c][0] = (static_cast<double>(c) + 0.5) /
                      static_cast<double>(classes);
    }
    neighbor_dist = 1.0 / static_cast<double>(classes);
  } else {
    for (std::size_t c = 0; c < classes; ++c) {
      const double angle = 2.0 * pi * static_cast<double>(c) /
                           static_cast<double>(classes);
      centers[c][0] = 0.5 + 0.3 * std::cos(angle);
      centers[c][1] = 0.5 + 0.3 * std::sin(angle);
    }
    neighbor_dist = 2.0 * 0.3 * std::sin(pi / static_cast<double>(classes));
  }
  const double sigma = neighbor_dist / separation;

  Rng rng(seed);
  Dataset ds;
  ds.classes = classes;
  const std::size_t n = classes * per_class;
  if (n == 0) return ds;
  Tensor inputs({n, dim});
  ds.labels.resize(n);
  for (std::size_t c = 0; c < classes; ++c) {
    for (std::size_t s = 0; s < per_class; ++s) {
      const std::size_t i = c * per_class + s;
      ds.labels[i] = c;
      auto row = inputs.row(i);
      for (std::size_t d = 0; d < dim; ++d) {
        row[d] = std::clamp(centers[c][d] + rng.normal(0.0, sigma), 0.0, 1.0);
      }
    }
  }
  ds.inputs = std::move(inputs);
  return ds;
}

std::vector<std::vector<std::size_t>> batch_indices(std::size_t n,
                                                    std::size_t batch_size,
                                                    std::uint64_t epoch_seed) {
  if (batch_size == 0) {
    throw std::invalid_argument("batch_indices: batch_size must be >= 1");
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(epoch_seed);
  rng.shuffle(order);
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t at = 0; at < n; at += batch_size) {
    const std::size_t end = std::min(n, at + batch_size);
    out.emplace_back(order.begin() + at, order.begin() + end);
  }
  return out;
}

Batch gather(const Dataset& ds, const std::vector<std::size_t>& indices) {
  if (indices.empty()) {
    throw std::invalid_argument("gather: empty index list");
  }
  std::vector<std::size_t> shape = ds.inputs.shape();
  shape[0] = indices.size();
  Batch batch;
  batch.inputs = Tensor(shape);
  batch.labels.reserve(indices.size());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] >= ds.size()) {
      throw std::invalid_argument("gather: index " +
                                  std::to_string(indices[i]) +
                                  " outside dataset of " +
                                  std::to_string(ds.size()));
    }
    const auto src = ds.inputs.row(indices[i]);
    std::copy(src.begin(), src.end(), batch.inputs.row(i).begin());
    batch.labels.push_back(ds.labels[indices[i]]);
  }
  batch.indices = indices;
  return batch;
}

}  // namespace chal
