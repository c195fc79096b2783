#pragma once

#include <string>
#include <vector>

#include "chal/config.hpp"
#include "chal/data.hpp"
#include "chal/metrics.hpp"
#include "chal/training.hpp"

namespace chal {

// Train and test splits materialized from the config's data section.
struct DataBundle {
  Dataset train;
  Dataset test;
  std::vector<std::size_t> input_shape;
};

DataBundle build_data(const ExperimentConfig& cfg);

// One (method, seed) run: fresh seed-derived network, training, evaluation.
// The network init and data order depend only on the seed, so different
// methods on the same seed are paired.
struct RunOutcome {
  TrainResult trained;
  MetricsReport report;
};

RunOutcome run_one(const ExperimentConfig& cfg, const DataBundle& data,
                   TrainMethod method, std::uint64_t seed);

// Each command writes its artifacts under cfg.out_dir (created on demand)
// and returns the paths in write order. Outputs are deterministic functions
// of (config, seed), so reruns produce byte-identical files.
std::vector<std::string> cmd_train(const ExperimentConfig& cfg,
                                   TrainMethod method);

std::vector<std::string> cmd_evaluate(const ExperimentConfig& cfg,
                                      const std::string& checkpoint_path);

std::vector<std::string> cmd_sweep_topk(const ExperimentConfig& cfg,
                                        const std::vector<std::size_t>& ks);

// class_mode is "target" (decompose the true label's score) or "rank:K"
// (decompose the sample's K-th highest prediction).
std::vector<std::string> cmd_attribute(const ExperimentConfig& cfg,
                                       const std::string& checkpoint_path,
                                       const std::vector<std::size_t>& samples,
                                       const std::string& class_mode);

std::vector<std::string> cmd_compare(const ExperimentConfig& cfg,
                                     const std::vector<TrainMethod>& methods);

}  // namespace chal
