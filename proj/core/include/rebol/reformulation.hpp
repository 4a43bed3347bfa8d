#pragma once

#include <map>
#include <string>
#include <vector>

#include "rebol/common.hpp"
#include "rebol/embedding.hpp"
#include "rebol/oracle.hpp"

namespace rebol {

/// Alternative phrasings of one query, used as extra max-relevance seed
/// locations. Embeddings are attached after loading (same binary format
/// as documents, manifest ids `<query_id>#r<i>`).
struct ReformulationSet {
  std::string query_id;
  std::vector<std::string> texts;
  std::vector<std::vector<float>> embeddings;  // one per text once attached

  std::size_t size() const { return texts.size(); }
};

struct ReformulationLoad {
  std::map<std::string, ReformulationSet> sets;
  Warnings warnings;
};

/// JSONL rows {"query_id": ..., "reformulations": [...]}. Entries equal
/// to the original query text are dropped later, at attach time, when the
/// query text is known. Throws on empty reformulation strings.
ReformulationLoad load_reformulations(const std::string& path);

/// Joins embeddings from a store whose ids follow `<query_id>#r<i>` and
/// drops any reformulation that duplicates the query text verbatim.
void attach_reformulation_embeddings(ReformulationSet& set,
                                     const std::string& query_text,
                                     const EmbeddingStore& ref_store,
                                     Warnings& warnings);

/// Asks an LLM endpoint for `count` distinct rephrasings as a JSON array
/// of strings. Retries once on malformed output; deduplicates and tops up
/// with one more call if needed; proceeds with fewer (and a warning) when
/// the model will not cooperate.
ReformulationSet generate_reformulations(const oracle::OracleConfig& llm_config,
                                         const std::string& query_id,
                                         const std::string& query_text,
                                         int count, Warnings& warnings);

}  // namespace rebol
