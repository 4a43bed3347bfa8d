// rebol: Bayesian-optimization retrieval sessions, baselines and evaluation
// from one JSON config. See README.md for the config schema.

#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rebol/experiment.hpp"

namespace {

struct CommonArgs {
  std::string config_path;
  std::vector<std::string> overrides;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("-c,--config", args.config_path, "JSON experiment config")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("--set", args.overrides,
                  "override a config value, e.g. --set method.budget=50 "
                  "(flag wins over file)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian-optimization retrieval engine"};
  app.require_subcommand(1);

  CommonArgs validate_args;
  CLI::App* validate = app.add_subcommand("validate", "cross-check dataset files");
  add_common(validate, validate_args);

  CommonArgs run_args;
  CLI::App* run = app.add_subcommand("run", "execute the configured method over all queries");
  add_common(run, run_args);

  CommonArgs sweep_args;
  CLI::App* sweep = app.add_subcommand(
      "sweep", "run the cartesian product of the config's sweep section");
  add_common(sweep, sweep_args);

  rebol::experiment::EvalOptions eval_options;
  CLI::App* eval = app.add_subcommand("eval", "evaluate run files against qrels");
  eval->add_option("runs", eval_options.run_paths, "TREC run files")
      ->required()
      ->check(CLI::ExistingFile);
  eval->add_option("--qrels", eval_options.qrels_path, "qrels file")->required();
  eval->add_option("--qrels-format", eval_options.qrels_format, "beir-tsv or trec")
      ->check(CLI::IsMember({"beir-tsv", "trec"}));
  eval->add_option("--recall-k", eval_options.recall_ks,
                   "recall cutoffs (NDCG@10 is always included)");
  eval->add_option("--dataset", eval_options.dataset, "dataset label for the JSON report");
  eval->add_option("--json-out", eval_options.json_out, "write machine-readable report here");
  eval->add_flag("--linear-gain", eval_options.linear_gain,
                 "use linear NDCG gain instead of 2^g - 1");

  CLI11_PARSE(app, argc, argv);

  try {
    if (validate->parsed()) {
      auto config = rebol::experiment::load_experiment_config(validate_args.config_path,
                                                              validate_args.overrides);
      return rebol::experiment::cmd_validate(config, std::cout, std::cerr);
    }
    if (run->parsed()) {
      auto config = rebol::experiment::load_experiment_config(run_args.config_path,
                                                              run_args.overrides);
      return rebol::experiment::cmd_run(config, std::cout, std::cerr);
    }
    if (sweep->parsed()) {
      return rebol::experiment::cmd_sweep(sweep_args.config_path, sweep_args.overrides,
                                          std::cout, std::cerr);
    }
    if (eval->parsed()) {
      return rebol::experiment::cmd_eval(eval_options, std::cout, std::cerr);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
