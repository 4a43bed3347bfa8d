#pragma once

// A second, naively written metric evaluator kept independent of the
// production implementation (membership by linear scan, grades gathered
// from scratch).

#include <string>
#include <vector>

#include "rebol/corpus.hpp"
#include "rebol/run_file.hpp"

namespace rebol_test {

double naive_recall(const rebol::RunFile::Ranking& ranking, const rebol::Qrels& qrels,
                    const std::string& query_id, int k);

double naive_ndcg(const rebol::RunFile::Ranking& ranking, const rebol::Qrels& qrels,
                  const std::string& query_id, int k, bool exponential_gain = true);

}  // namespace rebol_test
