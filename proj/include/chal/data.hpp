#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "chal/rng.hpp"
#include "chal/tensor.hpp"

namespace chal {

// Immutable labeled sample collection. Inputs live in [0,1]; an empty
// dataset keeps a default tensor and sizes itself off the label vector.
struct Dataset {
  Tensor inputs;                    // [n x sample shape]
  std::vector<std::size_t> labels;  // one class index per sample
  std::size_t classes = 0;
  std::string split = "train";

  std::size_t size() const { return labels.size(); }
  std::vector<std::size_t> sample_shape() const;
  std::size_t sample_size() const;
  void validate() const;
};

class IdxError : public std::runtime_error {
 public:
  enum class Kind { bad_magic, truncated, count_mismatch };

  IdxError(Kind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

// Reads the big-endian IDX pair (images then labels), accepting gzip
// compressed files by sniffing the 0x1f 0x8b prefix. Pixels are scaled by
// 1/255 and images come out shaped [n x 1 x rows x cols].
Dataset load_idx(const std::string& images_path,
                 const std::string& labels_path);

// Writes the dataset back out as an IDX pair, quantizing each value to
// round(v * 255). Paths ending in ".gz" are gzip compressed.
void save_idx(const Dataset& ds, const std::string& images_path,
              const std::string& labels_path);

// Exactly per_class samples of every class, chosen by seeded shuffle within
// each class, returned in their original dataset order.
Dataset tiny_subset(const Dataset& ds, std::size_t per_class,
                    std::uint64_t seed);

// Gaussian clusters at fixed distinct centers, cluster width chosen so
// neighboring centers sit `separation` standard deviations apart, samples
// clamped to [0,1].
Dataset synth_blobs(std::size_t classes, std::size_t per_class,
                    std::size_t dim, double separation, std::uint64_t seed);

// One training batch materialized from dataset rows.
struct Batch {
  Tensor inputs;
  std::vector<std::size_t> labels;
  std::vector<std::size_t> indices;  // positions in the source dataset
};

// Seeded permutation of the dataset split into batch_size chunks; the final
// short chunk is kept.
std::vector<std::vector<std::size_t>> batch_indices(std::size_t n,
                                                    std::size_t batch_size,
                                                    std::uint64_t epoch_seed);

Batch gather(const Dataset& ds, const std::vector<std::size_t>& indices);

}  // namespace chal
