#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "rebol/baselines.hpp"
#include "rebol/engine.hpp"
#include "rebol/eval.hpp"
#include "rebol/oracle.hpp"

namespace rebol::experiment {

struct DatasetPaths {
  std::string corpus;
  std::string queries;
  std::string qrels;
  std::string qrels_format = "beir-tsv";
  std::string doc_embeddings;
  std::string doc_manifest;
  std::string query_embeddings;
  std::string query_manifest;
  // optional: the QR seeding path
  std::string reformulations;
  std::string reformulation_embeddings;
  std::string reformulation_manifest;
};

struct MethodConfig {
  std::string kind = "rebol";  // rebol | rebol_topk | dense | dense_mmr | dense_qr | pointwise
  engine::SessionConfig session;
  baselines::BaselineConfig baseline;
  int output_k = 100;
};

struct ExperimentConfig {
  DatasetPaths dataset;
  MethodConfig method;
  oracle::OracleConfig oracle;
  std::string output_dir = "out";
  std::string run_tag = "run";
  std::uint64_t seed = 0;
  int threads = 0;  // 0 = hardware concurrency
  int oracle_concurrency = 4;
};

/// Parses the JSON config file, then applies `key.path=value` overrides
/// (flag wins over file). Values are parsed as JSON scalars, falling back
/// to strings.
ExperimentConfig load_experiment_config(const std::string& path,
                                        const std::vector<std::string>& overrides = {});

/// Cross-checks corpus, embeddings, queries and qrels; prints dataset
/// stats. Returns 0 when consistent, 1 when any inconsistency was found.
int cmd_validate(const ExperimentConfig& config, std::ostream& out,
                 std::ostream& err);

/// Executes the configured method over all queries with a worker pool,
/// writing `<run_tag>.run` (TREC), `<run_tag>.traces.jsonl` and
/// `<run_tag>.timings.json` into output_dir. Per-query failures are
/// logged and the run continues; the exit code reflects any failure.
int cmd_run(const ExperimentConfig& config, std::ostream& out,
            std::ostream& err);

struct EvalOptions {
  std::vector<std::string> run_paths;
  std::string qrels_path;
  std::string qrels_format = "beir-tsv";
  std::vector<int> recall_ks = {50, 100, 200};
  std::string dataset = "dataset";
  std::string json_out;  // optional path for the machine-readable report
  bool linear_gain = false;
};

/// Evaluates one or more run files against qrels and prints the
/// comparison table. Timing sidecars (`<run>.timings.json` next to each
/// run, or `X.timings.json` for `X.run`) are picked up when present.
int cmd_eval(const EvalOptions& options, std::ostream& out, std::ostream& err);

/// Runs the cartesian product of the config's `sweep` section (a map of
/// override path -> list of values), one cmd_run per combination with a
/// distinguishing run_tag suffix.
int cmd_sweep(const std::string& config_path,
              const std::vector<std::string>& overrides, std::ostream& out,
              std::ostream& err);

}  // namespace rebol::experiment
