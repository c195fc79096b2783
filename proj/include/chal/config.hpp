#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "chal/training.hpp"

namespace chal {

// Everything a run needs, serializable as flat "key = value" lines with '#'
// comments and dotted keys. to_text/parse round-trip losslessly: doubles are
// written in shortest exact form and parsed back bit-identically.
struct ExperimentConfig {
  // data.kind chooses the source: "idx" reads the four IDX paths below,
  // "synth" draws Gaussian blobs from the synth.* fields.
  std::string data_kind = "synth";
  std::string idx_train_images;
  std::string idx_train_labels;
  std::string idx_test_images;
  std::string idx_test_labels;
  std::size_t synth_classes = 2;
  std::size_t synth_per_class = 20;
  std::size_t synth_test_per_class = 50;
  std::size_t synth_dim = 2;
  double synth_separation = 6.0;
  std::uint64_t synth_seed = 1;
  // 0 leaves the training split unreduced
  std::size_t tiny_per_class = 0;
  std::uint64_t tiny_seed = 7;

  std::string architecture = "dense:16 relu dense:2";

  TrainOptions train;  // train.seed is replaced by each seed below
  std::vector<std::uint64_t> seeds{1};

  std::size_t ece_bins = 15;
  std::string out_dir = "out";

  void validate() const;
};

// Canonical text form: every key once, fixed order, shortest exact numbers.
std::string to_text(const ExperimentConfig& cfg);

// Parses the format written by to_text. Unknown keys, duplicate keys, and
// malformed values all fail with the offending line number.
ExperimentConfig parse_config(const std::string& text);

ExperimentConfig load_config(const std::string& path);
void save_config(const ExperimentConfig& cfg, const std::string& path);

// FNV-1a of the canonical text; stamped into output files as provenance.
std::uint64_t config_hash(const ExperimentConfig& cfg);

}  // namespace chal
