#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include "chal/experiment.hpp"

namespace {

// shared --config/--out/--seeds handling; overrides land on the parsed file
struct CommonArgs {
  std::string config_path;
  std::string out_dir;
  std::vector<std::uint64_t> seeds;

  void attach(CLI::App* cmd) {
    cmd->add_option("--config", config_path, "experiment config file")
        ->required();
    cmd->add_option("--out", out_dir, "output directory (overrides config)");
    cmd->add_option("--seeds", seeds, "seed list (overrides config)")
        ->delimiter(',');
  }

  chal::ExperimentConfig load() const {
    chal::ExperimentConfig cfg = chal::load_config(config_path);
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    if (!seeds.empty()) cfg.seeds = seeds;
    cfg.validate();
    return cfg;
  }
};

void report(const std::vector<std::string>& files) {
  for (const std::string& f : files) {
    std::cout << f << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"relevance-guided perturbation training experiments"};
  app.require_subcommand(1);

  CommonArgs train_args;
  std::string train_method;
  CLI::App* train = app.add_subcommand("train", "train one method");
  train_args.attach(train);
  train->add_option("--method", train_method,
                    "base, challenger, random, fgsm, or pgd")
      ->required();

  CommonArgs eval_args;
  std::string eval_checkpoint;
  CLI::App* evaluate =
      app.add_subcommand("evaluate", "score a checkpoint on the test split");
  eval_args.attach(evaluate);
  evaluate->add_option("--checkpoint", eval_checkpoint, "model file")
      ->required();

  CommonArgs attr_args;
  std::string attr_checkpoint;
  std::vector<std::size_t> attr_samples;
  std::string attr_mode = "target";
  CLI::App* attribute =
      app.add_subcommand("attribute", "export relevance heatmaps");
  attr_args.attach(attribute);
  attribute->add_option("--checkpoint", attr_checkpoint, "model file")
      ->required();
  attribute->add_option("--samples", attr_samples, "test sample indices")
      ->required()
      ->delimiter(',');
  attribute->add_option("--class-mode", attr_mode, "target or rank:K");

  CommonArgs sweep_args;
  std::vector<std::size_t> k_values;
  CLI::App* sweep =
      app.add_subcommand("sweep-topk", "train the challenger across K values");
  sweep_args.attach(sweep);
  sweep->add_option("--k-values", k_values, "K values to sweep")
      ->required()
      ->delimiter(',');

  CommonArgs compare_args;
  std::vector<std::string> compare_methods;
  CLI::App* compare =
      app.add_subcommand("compare", "paired multi-method comparison");
  compare_args.attach(compare);
  compare->add_option("--methods", compare_methods, "two or more methods")
      ->required()
      ->delimiter(',');

  CLI11_PARSE(app, argc, argv);

  try {
    if (train->parsed()) {
      report(chal::cmd_train(train_args.load(),
                             chal::parse_method(train_method)));
    } else if (evaluate->parsed()) {
      report(chal::cmd_evaluate(eval_args.load(), eval_checkpoint));
    } else if (attribute->parsed()) {
      report(chal::cmd_attribute(attr_args.load(), attr_checkpoint,
                                 attr_samples, attr_mode));
    } else if (sweep->parsed()) {
      report(chal::cmd_sweep_topk(sweep_args.load(), k_values));
    } else if (compare->parsed()) {
      std::vector<chal::TrainMethod> methods;
      for (const std::string& name : compare_methods) {
        methods.push_back(chal::parse_method(name));
      }
      report(chal::cmd_compare(compare_args.load(), methods));
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
