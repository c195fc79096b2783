#include "chal/metrics.hpp"

#include <cmath>
#include <iostream>
#include <sstream>
#include <stdexcept>

#include "chal/ioutil.hpp"

namespace chal {

namespace {

void check_batch(const Tensor& logits, const std::vector<std::size_t>& labels,
                 const char* who) {
  if (logits.rank() != 2 || logits.dim(0) == 0) {
    throw std::invalid_argument(std::string(who) +
                                ": need a nonempty [batch x classes] tensor");
  }
  if (labels.size() != logits.dim(0)) {
    throw std::invalid_argument(std::string(who) + ": " +
                                std::to_string(labels.size()) +
                                " labels for batch " +
                                std::to_string(logits.dim(0)));
  }
  for (std::size_t label : labels) {
    if (label >= logits.dim(1)) {
      throw std::invalid_argument(std::string(who) + ": label " +
                                  std::to_string(label) + " outside " +
                                  std::to_string(logits.dim(1)) + " classes");
    }
  }
}

std::size_t argmax_row(std::span<const double> row) {
  std::size_t best = 0;
  for (std::size_t j = 1; j < row.size(); ++j) {
    if (row[j] > row[best]) best = j;
  }
  return best;
}

}  // namespace

double accuracy(const Tensor& logits, const std::vector<std::size_t>& labels) {
  check_batch(logits, labels, "accuracy");
  std::size_t correct = 0;
  for (std::size_t b = 0; b < logits.dim(0); ++b) {
    if (argmax_row(logits.row(b)) == labels[b]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(logits.dim(0));
}

double nll(const Tensor& logits, const std::vector<std::size_t>& labels) {
  check_batch(logits, labels, "nll");
  const Tensor probs = softmax_rows(logits);
  double total = 0.0;
  for (std::size_t b = 0; b < probs.dim(0); ++b) {
    total -= std::log(probs.row(b)[labels[b]]);
  }
  return total / static_cast<double>(probs.dim(0));
}

double brier(const Tensor& logits, const std::vector<std::size_t>& labels) {
  check_batch(logits, labels, "brier");
  const Tensor probs = softmax_rows(logits);
  const std::size_t classes = probs.dim(1);
  double total = 0.0;
  for (std::size_t b = 0; b < probs.dim(0); ++b) {
    const auto row = probs.row(b);
    double sample = 0.0;
    for (std::size_t c = 0; c < classes; ++c) {
      const double target = c == labels[b] ? 1.0 : 0.0;
      sample += (row[c] - target) * (row[c] - target);
    }
    total += sample / static_cast<double>(classes);
  }
  return total / static_cast<double>(probs.dim(0));
}

std::vector<ReliabilityBin> reliability_bins(
    const Tensor& logits, const std::vector<std::size_t>& labels,
    std::size_t bins) {
  check_batch(logits, labels, "ece");
  if (bins < 1) {
    throw std::invalid_argument("ece: bins must be >= 1");
  }
  const Tensor probs = softmax_rows(logits);
  std::vector<ReliabilityBin> out(bins);
  for (std::size_t b = 0; b < probs.dim(0); ++b) {
    const auto row = probs.row(b);
    const std::size_t pred = argmax_row(row);
    const double conf = row[pred];
    // bin i covers (i/bins, (i+1)/bins]; confidence is always > 0
    std::size_t idx = static_cast<std::size_t>(
        std::ceil(conf * static_cast<double>(bins)));
    idx = idx == 0 ? 0 : idx - 1;
    if (idx >= bins) idx = bins - 1;
    out[idx].count += 1;
    out[idx].confidence_sum += conf;
    if (pred == labels[b]) out[idx].correct += 1.0;
  }
  return out;
}

double ece(const Tensor& logits, const std::vector<std::size_t>& labels,
           std::size_t bins) {
  const auto table = reliability_bins(logits, labels, bins);
  const double n = static_cast<double>(logits.dim(0));
  double total = 0.0;
  for (const ReliabilityBin& bin : table) {
    if (bin.count == 0) continue;
    const double cnt = static_cast<double>(bin.count);
    total += (cnt / n) * std::abs(bin.correct / cnt -
                                  bin.confidence_sum / cnt);
  }
  return total;
}

namespace {

// conv filters are the weight rows (one per output channel); dense filters
// are the columns of the [in x out] matrix
std::vector<std::vector<double>> layer_filters(const LayerSpec& spec,
                                               const LayerParams& p) {
  std::vector<std::vector<double>> filters;
  if (std::holds_alternative<Conv2DSpec>(spec)) {
    const std::size_t count = p.weight.dim(0);
    const std::size_t len = p.weight.size() / count;
    for (std::size_t f = 0; f < count; ++f) {
      const auto vals = p.weight.values().subspan(f * len, len);
      filters.emplace_back(vals.begin(), vals.end());
    }
  } else if (std::holds_alternative<DenseSpec>(spec)) {
    const std::size_t in = p.weight.dim(0);
    const std::size_t out = p.weight.dim(1);
    for (std::size_t f = 0; f < out; ++f) {
      std::vector<double> column(in);
      for (std::size_t i = 0; i < in; ++i) {
        column[i] = p.weight[i * out + f];
      }
      filters.push_back(std::move(column));
    }
  }
  return filters;
}

double cosine(const std::vector<double>& a, const std::vector<double>& b) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

}  // namespace

CosineReport filter_cosine_similarity(const Network& net) {
  CosineReport report;
  double mean_sum = 0.0;
  for (std::size_t i = 0; i < net.layer_count(); ++i) {
    if (!layer_has_params(net.spec(i))) continue;
    const auto filters = layer_filters(net.spec(i), net.params(i));
    if (filters.size() < 2) {
      std::cerr << "note: layer " << i << " (" << layer_name(net.spec(i))
                << ") has fewer than two filters, skipped\n";
      continue;
    }
    double sum = 0.0, sum2 = 0.0;
    std::size_t pairs = 0;
    for (std::size_t a = 0; a < filters.size(); ++a) {
      for (std::size_t b = a + 1; b < filters.size(); ++b) {
        const double c = cosine(filters[a], filters[b]);
        sum += c;
        sum2 += c * c;
        ++pairs;
      }
    }
    LayerCosine lc;
    lc.layer_index = i;
    lc.layer_label = layer_name(net.spec(i));
    lc.pair_count = pairs;
    lc.mean = sum / static_cast<double>(pairs);
    const double var = sum2 / static_cast<double>(pairs) - lc.mean * lc.mean;
    lc.stddev = std::sqrt(std::max(0.0, var));
    mean_sum += lc.mean;
    report.layers.push_back(std::move(lc));
  }
  if (report.layers.empty()) {
    throw std::invalid_argument(
        "filter_cosine_similarity: no layer with at least two filters");
  }
  report.overall_mean = mean_sum / static_cast<double>(report.layers.size());
  return report;
}

MetricsReport evaluate(const Network& net, const Dataset& ds,
                       std::size_t ece_bins) {
  if (ds.size() == 0) {
    throw std::invalid_argument("evaluate: empty dataset");
  }
  Tensor logits({ds.size(), net.class_count()});
  const std::size_t chunk = 256;
  for (std::size_t at = 0; at < ds.size(); at += chunk) {
    const std::size_t end = std::min(ds.size(), at + chunk);
    std::vector<std::size_t> idx(end - at);
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = at + i;
    const Batch part = gather(ds, idx);
    const Tensor part_logits = forward(net, part.inputs);
    for (std::size_t i = 0; i < idx.size(); ++i) {
      const auto src = part_logits.row(i);
      std::copy(src.begin(), src.end(), logits.row(at + i).begin());
    }
  }
  MetricsReport report;
  report.accuracy = accuracy(logits, ds.labels);
  report.nll = nll(logits, ds.labels);
  report.brier = brier(logits, ds.labels);
  report.ece = ece(logits, ds.labels, ece_bins);
  report.cosine = filter_cosine_similarity(net);
  return report;
}

std::string metrics_csv_header(const MetricsReport& report) {
  std::ostringstream os;
  os << "accuracy,nll,brier,ece,cosine_overall";
  for (const LayerCosine& lc : report.cosine.layers) {
    os << ",cosine_l" << lc.layer_index << "_mean,cosine_l" << lc.layer_index
       << "_std";
  }
  return os.str();
}

std::string metrics_csv_row(const MetricsReport& report) {
  std::ostringstream os;
  os << format_double(report.accuracy) << "," << format_double(report.nll)
     << "," << format_double(report.brier) << "," << format_double(report.ece)
     << "," << format_double(report.cosine.overall_mean);
  for (const LayerCosine& lc : report.cosine.layers) {
    os << "," << format_double(lc.mean) << "," << format_double(lc.stddev);
  }
  return os.str();
}

}  // namespace chal
