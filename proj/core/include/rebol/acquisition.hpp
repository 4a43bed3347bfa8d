#pragma once

#include <cstdint>
#include <string>
#include <unordered_set>
#include <vector>

#include "rebol/embedding.hpp"
#include "rebol/gp.hpp"

namespace rebol::acq {

enum class Kind { greedy, ucb, random };
enum class BatchStrategy { top_b, kriging_believer, mmr };

Kind kind_from_string(const std::string& s);
BatchStrategy strategy_from_string(const std::string& s);
const char* to_string(Kind k);
const char* to_string(BatchStrategy s);

struct AcquisitionConfig {
  Kind kind = Kind::ucb;
  double beta = 1.0;  // UCB exploration weight, >= 0
  BatchStrategy batch_strategy = BatchStrategy::top_b;
  int batch_size = 10;
  double lambda = 0.7;  // MMR relevance/diversity tradeoff, in [0,1]
  std::uint64_t rng_seed = 0;

  void validate() const;
};

/// Scores for every eligible (not excluded) document, parallel arrays of
/// store row index and acquisition value.
struct CandidateSet {
  std::vector<std::size_t> indices;
  std::vector<double> scores;

  std::size_t size() const { return indices.size(); }
};

using IdSet = std::unordered_set<std::string>;

/// greedy: posterior mean. ucb: mean + sqrt(beta)*stddev. random:
/// i.i.d. uniform(0,1) drawn from rng_seed (same seed, same scores).
/// Throws if every document is excluded.
CandidateSet score_candidates(const gp::GpPosterior& posterior,
                              const EmbeddingStore& store,
                              const IdSet& excluded,
                              const AcquisitionConfig& config);

/// The B highest-scoring candidates, descending score, ties broken by
/// lexicographically smaller doc id. Returns all when fewer than B.
std::vector<std::string> select_top_b(const CandidateSet& cands,
                                      const EmbeddingStore& store, int b);

/// Sequential selection against a scratch posterior: after each pick the
/// posterior mean at the pick is inserted as a pretend observation
/// (clamped into the observation bounds), so uncertainty-aware scores
/// steer later picks elsewhere. The real posterior is untouched.
std::vector<std::string> select_kriging_believer(const gp::GpPosterior& posterior,
                                                 const EmbeddingStore& store,
                                                 const IdSet& excluded,
                                                 const AcquisitionConfig& config);

/// MMR-style batch diversification: first pick is argmax score; each next
/// pick maximizes lambda*score(d) - (1-lambda)*max_similarity(d, selected),
/// with cosine similarity over store embeddings. Scores are computed once
/// and never refreshed within the batch.
std::vector<std::string> select_mmr(const CandidateSet& cands,
                                    const EmbeddingStore& store,
                                    const AcquisitionConfig& config);

/// Dispatch on config.batch_strategy.
std::vector<std::string> select_batch(const gp::GpPosterior& posterior,
                                      const EmbeddingStore& store,
                                      const IdSet& excluded,
                                      const AcquisitionConfig& config);

}  // namespace rebol::acq
