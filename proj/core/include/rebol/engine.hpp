#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rebol/acquisition.hpp"
#include "rebol/corpus.hpp"
#include "rebol/embedding.hpp"
#include "rebol/gp.hpp"
#include "rebol/oracle.hpp"
#include "rebol/reformulation.hpp"

namespace rebol::engine {

enum class Variant { iq, qr };

Variant variant_from_string(const std::string& s);
const char* to_string(Variant v);

struct SessionConfig {
  Variant variant = Variant::qr;
  int budget = 100;      // oracle observations per session (N)
  int batch_size = 10;   // docs per oracle call (B)
  acq::AcquisitionConfig acquisition;
  gp::KernelParams kernel;
  int s_max = 3;
  int output_k = 100;

  void validate() const;
};

struct BatchRecord {
  int step = 0;  // 0-based batch index
  std::vector<std::string> doc_ids;
  std::vector<int> grades;
  std::string acquisition_kind;
  // wall-clock seconds per stage; reported via the timing sidecar, never
  // serialized into the trace stream (reruns must be byte-identical)
  double acquire_seconds = 0.0;
  double oracle_seconds = 0.0;
  double insert_seconds = 0.0;
};

struct SessionTrace {
  std::string query_id;
  std::string status = "ok";  // ok | failed
  std::string error;          // set when status == failed
  std::vector<BatchRecord> batches;
  std::vector<std::pair<std::string, double>> ranking;  // doc id, score, desc
  double oracle_seconds = 0.0;
  double total_seconds = 0.0;

  std::size_t observed_count() const;
  /// Structural events only (no timings): one JSON object per line.
  std::string to_jsonl() const;
};

/// Initial posterior: the query embedding observed at value s_max, plus
/// one such observation per reformulation under the QR variant.
gp::GpPosterior seed_posterior(const QueryRecord& query,
                               const ReformulationSet& refs,
                               const SessionConfig& config);

/// The full loop: seed, then repeat {select batch, oracle-score, insert}
/// until `budget` documents are observed or no eligible documents remain,
/// then rank the whole corpus by posterior mean. An oracle failure aborts
/// the session; the partial trace comes back with status "failed".
/// `corpus`, when given, supplies titles/texts for oracle requests
/// (LLM scoring needs them; the simulated oracles do not).
SessionTrace run_session(const QueryRecord& query, const ReformulationSet& refs,
                         const EmbeddingStore& store,
                         oracle::RelevanceOracle& oracle,
                         const SessionConfig& config,
                         const Corpus* corpus = nullptr);

/// Same loop, but documents are taken from a fixed pre-ranked list
/// instead of the acquisition function (top-k ablation et al.).
SessionTrace run_session_fixed_order(const QueryRecord& query,
                                     const ReformulationSet& refs,
                                     const EmbeddingStore& store,
                                     oracle::RelevanceOracle& oracle,
                                     const SessionConfig& config,
                                     const std::vector<std::string>& order);

/// Top-k of the full corpus (observed and unobserved alike) by posterior
/// mean, descending, ties broken by smaller doc id. Callable after any
/// batch. k larger than the corpus ranks everything.
std::vector<std::pair<std::string, double>> rank(const gp::GpPosterior& posterior,
                                                 const EmbeddingStore& store,
                                                 int k);

}  // namespace rebol::engine
