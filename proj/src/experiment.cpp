#include "chal/experiment.hpp"

#include <cmath>
#include <filesystem>
#include <sstream>
#include <stdexcept>

#include "chal/checkpoint.hpp"
#include "chal/heatmap.hpp"
#include "chal/ioutil.hpp"
#include "chal/lrp.hpp"

namespace chal {

namespace {

std::string out_path(const ExperimentConfig& cfg, const std::string& name) {
  std::filesystem::create_directories(cfg.out_dir);
  return (std::filesystem::path(cfg.out_dir) / name).string();
}

std::string provenance(const ExperimentConfig& cfg) {
  std::ostringstream os;
  os << "# config=" << std::hex << config_hash(cfg) << std::dec
     << " seeds=";
  for (std::size_t i = 0; i < cfg.seeds.size(); ++i) {
    os << (i == 0 ? "" : ",") << cfg.seeds[i];
  }
  return os.str();
}

}  // namespace

DataBundle build_data(const ExperimentConfig& cfg) {
  cfg.validate();
  DataBundle bundle;
  if (cfg.data_kind == "idx") {
    bundle.train = load_idx(cfg.idx_train_images, cfg.idx_train_labels);
    bundle.test = load_idx(cfg.idx_test_images, cfg.idx_test_labels);
    bundle.test.split = "test";
    // the two splits must agree on the label alphabet
    bundle.train.classes = bundle.test.classes =
        std::max(bundle.train.classes, bundle.test.classes);
  } else {
    bundle.train = synth_blobs(cfg.synth_classes, cfg.synth_per_class,
                               cfg.synth_dim, cfg.synth_separation,
                               cfg.synth_seed);
    bundle.test = synth_blobs(cfg.synth_classes, cfg.synth_test_per_class,
                              cfg.synth_dim, cfg.synth_separation,
                              derive_seed(cfg.synth_seed, 1));
    bundle.test.split = "test";
  }
  if (cfg.tiny_per_class > 0) {
    bundle.train = tiny_subset(bundle.train, cfg.tiny_per_class,
                               cfg.tiny_seed);
  }
  if (bundle.train.size() == 0 || bundle.test.size() == 0) {
    throw std::invalid_argument("config: produced an empty train or test split");
  }
  bundle.train.validate();
  bundle.test.validate();
  bundle.input_shape = bundle.train.sample_shape();
  return bundle;
}

RunOutcome run_one(const ExperimentConfig& cfg, const DataBundle& data,
                   TrainMethod method, std::uint64_t seed) {
  const auto specs = parse_architecture(cfg.architecture, data.input_shape);
  // stream 2 feeds initialization; streams 0 and 1 are used inside training
  Network net = build_network(specs, data.input_shape, derive_seed(seed, 2));
  TrainOptions opt = cfg.train;
  opt.seed = seed;
  RunOutcome outcome{train_method(std::move(net), data.train, method, opt),
                     {}};
  outcome.report = evaluate(outcome.trained.net, data.test, cfg.ece_bins);
  return outcome;
}

std::vector<std::string> cmd_train(const ExperimentConfig& cfg,
                                   TrainMethod method) {
  const DataBundle data = build_data(cfg);
  std::vector<std::string> written;
  std::ostringstream metrics;
  bool header_done = false;
  for (const std::uint64_t seed : cfg.seeds) {
    const RunOutcome outcome = run_one(cfg, data, method, seed);
    const std::string stem =
        method_name(method) + "_seed" + std::to_string(seed);

    const std::string ckpt = out_path(cfg, stem + ".net");
    save_checkpoint(outcome.trained.net, ckpt);
    written.push_back(ckpt);

    const std::string steps = out_path(cfg, stem + "_steps.csv");
    write_text_file(steps, step_log_csv(outcome.trained.log));
    written.push_back(steps);

    if (!header_done) {
      metrics << provenance(cfg) << " method=" << method_name(method) << "\n"
              << "seed," << metrics_csv_header(outcome.report) << "\n";
      header_done = true;
    }
    metrics << seed << "," << metrics_csv_row(outcome.report) << "\n";
  }
  const std::string metrics_path =
      out_path(cfg, method_name(method) + "_metrics.csv");
  write_text_file(metrics_path, metrics.str());
  written.push_back(metrics_path);
  return written;
}

std::vector<std::string> cmd_evaluate(const ExperimentConfig& cfg,
                                      const std::string& checkpoint_path) {
  const DataBundle data = build_data(cfg);
  const Network net = load_checkpoint(checkpoint_path);
  if (net.input_shape() != data.input_shape) {
    throw std::invalid_argument(
        "evaluate: checkpoint expects input " +
        shape_string(net.input_shape()) + ", dataset provides " +
        shape_string(data.input_shape));
  }
  const MetricsReport report = evaluate(net, data.test, cfg.ece_bins);
  std::ostringstream os;
  os << provenance(cfg) << " checkpoint=" <<
      std::filesystem::path(checkpoint_path).filename().string() << "\n"
     << metrics_csv_header(report) << "\n"
     << metrics_csv_row(report) << "\n";
  const std::string path = out_path(cfg, "evaluate_metrics.csv");
  write_text_file(path, os.str());
  return {path};
}

std::vector<std::string> cmd_sweep_topk(const ExperimentConfig& cfg,
                                        const std::vector<std::size_t>& ks) {
  if (ks.empty()) {
    throw std::invalid_argument("sweep-topk: no k values");
  }
  const DataBundle data = build_data(cfg);
  const auto specs = parse_architecture(cfg.architecture, data.input_shape);
  const std::size_t classes =
      std::get<DenseSpec>(specs.back()).out_features;
  for (const std::size_t k : ks) {
    if (k < 1 || k > classes) {
      throw std::invalid_argument("sweep-topk: k " + std::to_string(k) +
                                  " outside 1.." + std::to_string(classes));
    }
  }

  std::ostringstream os;
  bool header_done = false;
  for (const std::size_t k : ks) {
    ExperimentConfig variant = cfg;
    variant.train.challenger.top_k = k;
    for (const std::uint64_t seed : cfg.seeds) {
      const RunOutcome outcome =
          run_one(variant, data, TrainMethod::challenger, seed);
      if (!header_done) {
        os << provenance(cfg) << "\n"
           << "top_k,seed," << metrics_csv_header(outcome.report) << "\n";
        header_done = true;
      }
      os << k << "," << seed << "," << metrics_csv_row(outcome.report)
         << "\n";
    }
  }
  const std::string path = out_path(cfg, "sweep_topk.csv");
  write_text_file(path, os.str());
  return {path};
}

std::vector<std::string> cmd_attribute(const ExperimentConfig& cfg,
                                       const std::string& checkpoint_path,
                                       const std::vector<std::size_t>& samples,
                                       const std::string& class_mode) {
  if (samples.empty()) {
    throw std::invalid_argument("attribute: no sample indices");
  }
  std::size_t rank = 0;  // 0 means target mode
  if (class_mode != "target") {
    if (class_mode.rfind("rank:", 0) != 0) {
      throw std::invalid_argument("attribute: class mode '" + class_mode +
                                  "' is neither 'target' nor 'rank:K'");
    }
    rank = std::stoul(class_mode.substr(5));
    if (rank == 0) {
      throw std::invalid_argument("attribute: rank must be >= 1");
    }
  }

  const DataBundle data = build_data(cfg);
  const Network net = load_checkpoint(checkpoint_path);
  if (net.input_shape() != data.input_shape) {
    throw std::invalid_argument(
        "attribute: checkpoint expects input " +
        shape_string(net.input_shape()) + ", dataset provides " +
        shape_string(data.input_shape));
  }
  std::vector<std::string> written;
  for (const std::size_t index : samples) {
    if (index >= data.test.size()) {
      throw std::invalid_argument("attribute: sample " +
                                  std::to_string(index) +
                                  " outside the test split of " +
                                  std::to_string(data.test.size()));
    }
    const Batch one = gather(data.test, {index});
    const ForwardTrace trace = forward_traced(net, one.inputs);
    const std::size_t k =
        rank == 0 ? one.labels[0] : rank_classes(trace.logits, rank)[0];
    const RelevanceMap map =
        lrp_epsilon(net, trace, k, cfg.train.challenger.epsilon_rule);
    const std::string base =
        out_path(cfg, "attribution_sample" + std::to_string(index));
    export_heatmap(map, base);
    written.push_back(base + ".pgm");
    written.push_back(base + ".csv");
  }
  return written;
}

std::vector<std::string> cmd_compare(const ExperimentConfig& cfg,
                                     const std::vector<TrainMethod>& methods) {
  if (methods.size() < 2) {
    throw std::invalid_argument("compare: need at least two methods");
  }
  const DataBundle data = build_data(cfg);
  std::ostringstream os;
  os << provenance(cfg) << "\n"
     << "method,accuracy_mean,accuracy_std,nll_mean,nll_std,brier_mean,"
        "brier_std,ece_mean,ece_std,cosine_mean,cosine_std\n";
  for (const TrainMethod method : methods) {
    std::vector<MetricsReport> reports;
    for (const std::uint64_t seed : cfg.seeds) {
      reports.push_back(run_one(cfg, data, method, seed).report);
    }
    const auto stat = [&](auto pick) {
      double sum = 0.0, sum2 = 0.0;
      for (const MetricsReport& r : reports) {
        const double v = pick(r);
        sum += v;
        sum2 += v * v;
      }
      const double n = static_cast<double>(reports.size());
      const double mean = sum / n;
      const double var = sum2 / n - mean * mean;
      return std::pair<double, double>(mean, std::sqrt(std::max(0.0, var)));
    };
    const auto acc = stat([](const MetricsReport& r) { return r.accuracy; });
    const auto nl = stat([](const MetricsReport& r) { return r.nll; });
    const auto br = stat([](const MetricsReport& r) { return r.brier; });
    const auto ec = stat([](const MetricsReport& r) { return r.ece; });
    const auto cs =
        stat([](const MetricsReport& r) { return r.cosine.overall_mean; });
    os << method_name(method) << "," << format_double(acc.first) << ","
       << format_double(acc.second) << "," << format_double(nl.first) << ","
       << format_double(nl.second) << "," << format_double(br.first) << ","
       << format_double(br.second) << "," << format_double(ec.first) << ","
       << format_double(ec.second) << "," << format_double(cs.first) << ","
       << format_double(cs.second) << "\n";
  }
  const std::string path = out_path(cfg, "compare.csv");
  write_text_file(path, os.str());
  return {path};
}

}  // namespace chal
