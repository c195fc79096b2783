#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "chal/data.hpp"
#include "chal/network.hpp"
#include "chal/tensor.hpp"

namespace chal {

// Fraction of samples whose highest logit (ties to the lowest class index)
// matches the label.
double accuracy(const Tensor& logits, const std::vector<std::size_t>& labels);

// Mean negative log softmax probability of the true class, in nats.
double nll(const Tensor& logits, const std::vector<std::size_t>& labels);

// Mean over samples of the squared probability error averaged over classes,
// which keeps the score inside [0,1].
double brier(const Tensor& logits, const std::vector<std::size_t>& labels);

// Per-bin confidence/accuracy data behind the calibration error.
struct ReliabilityBin {
  std::size_t count = 0;
  double confidence_sum = 0.0;
  double correct = 0.0;
};

std::vector<ReliabilityBin> reliability_bins(
    const Tensor& logits, const std::vector<std::size_t>& labels,
    std::size_t bins = 15);

// Expected calibration error: confidences binned equal-width over (0,1],
// then the count-weighted mean |bin accuracy - bin confidence|.
double ece(const Tensor& logits, const std::vector<std::size_t>& labels,
           std::size_t bins = 15);

struct LayerCosine {
  std::size_t layer_index;
  std::string layer_label;
  double mean = 0.0;
  double stddev = 0.0;  // population std over the filter pairs
  std::size_t pair_count = 0;
};

// Signed cosine similarity over all unordered filter pairs per layer (conv:
// one filter per output channel, dense: one weight column per output unit),
// plus the unweighted mean of the layer means. Layers with fewer than two
// filters are skipped with a note on stderr.
struct CosineReport {
  std::vector<LayerCosine> layers;
  double overall_mean = 0.0;
};

CosineReport filter_cosine_similarity(const Network& net);

struct MetricsReport {
  double accuracy = 0.0;
  double nll = 0.0;
  double brier = 0.0;
  double ece = 0.0;
  CosineReport cosine;
};

// Runs the network over the dataset (chunked) and computes every metric.
MetricsReport evaluate(const Network& net, const Dataset& ds,
                       std::size_t ece_bins = 15);

// CSV row serialization; the header derives from the report's layer list so
// the column order is fixed for a given architecture:
//   accuracy,nll,brier,ece,cosine_overall[,cosine_l<i>_mean,cosine_l<i>_std...]
std::string metrics_csv_header(const MetricsReport& report);
std::string metrics_csv_row(const MetricsReport& report);

}  // namespace chal
