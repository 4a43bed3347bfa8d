#pragma once

#include <string>
#include <vector>

#include "rebol/corpus.hpp"
#include "rebol/embedding.hpp"
#include "rebol/engine.hpp"
#include "rebol/oracle.hpp"
#include "rebol/reformulation.hpp"

namespace rebol::baselines {

using Ranking = std::vector<std::pair<std::string, double>>;

struct BaselineConfig {
  std::string kind = "dense";  // dense | dense_mmr | dense_qr | pointwise | rebol_topk
  int k = 100;                 // rerank depth / output depth
  double lambda = 0.7;         // dense_mmr
  int batch_size = 10;         // pointwise oracle batch

  void validate() const;
};

/// Top-k by dot(query, doc), descending, ties by smaller doc id.
Ranking dense_rank(const QueryRecord& query, const EmbeddingStore& store, int k);

/// Scores each doc by the arithmetic mean of its dot products with the
/// query and every reformulation, then takes the top-k.
Ranking dense_qr_rank(const QueryRecord& query, const ReformulationSet& refs,
                      const EmbeddingStore& store, int k);

/// Classic MMR over dot-product relevance with cosine redundancy. Scores
/// in the result are synthesized as 1/rank (the MMR objective itself is
/// not monotone across picks).
Ranking dense_mmr_rank(const QueryRecord& query, const EmbeddingStore& store,
                       int k, double lambda);

/// Oracle-grades the dense top-k in ceil(k/B) batches, reorders the head
/// by descending grade (ties keep dense order), and splices the remaining
/// corpus after it in dense order. Scores are 1/rank. `out_k` caps the
/// returned list; 0 means the full corpus. `corpus` supplies doc texts
/// for LLM oracles.
Ranking pointwise_rerank(const QueryRecord& query, const EmbeddingStore& store,
                         oracle::RelevanceOracle& oracle, int k, int batch_size,
                         int out_k = 0, const Corpus* corpus = nullptr);

/// The engine loop with acquisition replaced by the fixed dense top-N
/// list; posterior updates and the final posterior-mean ranking are
/// unchanged.
engine::SessionTrace rebol_topk_ablation(const QueryRecord& query,
                                         const ReformulationSet& refs,
                                         const EmbeddingStore& store,
                                         oracle::RelevanceOracle& oracle,
                                         const engine::SessionConfig& config);

}  // namespace rebol::baselines
