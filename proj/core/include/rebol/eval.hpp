#pragma once

#include <map>
#include <string>
#include <vector>

#include "rebol/corpus.hpp"
#include "rebol/run_file.hpp"

namespace rebol::eval {

enum class Gain { exponential, linear };

/// Fraction of the query's relevant docs (grade > 0) appearing in the
/// top k. Precondition: k >= 1 and the query has at least one relevant doc.
double recall_at_k(const RunFile::Ranking& ranking, const Qrels& qrels,
                   const std::string& query_id, int k);

/// DCG@k = sum_{i=1..k} gain(grade_i) / log2(i+1), NDCG = DCG / IDCG with
/// the ideal ranking by descending grade. Exponential gain is 2^g - 1;
/// linear gain is g.
double ndcg_at_k(const RunFile::Ranking& ranking, const Qrels& qrels,
                 const std::string& query_id, int k,
                 Gain gain = Gain::exponential);

struct QueryTiming {
  double llm_seconds = 0.0;
  double total_seconds = 0.0;
};

struct MetricReport {
  std::vector<int> recall_ks;
  std::vector<int> ndcg_ks;
  // per metric name ("R@100", "N@10"): query id -> value
  std::map<std::string, std::map<std::string, double>> per_query;
  std::map<std::string, double> means;
  double mean_llm_seconds = 0.0;
  double mean_total_seconds = 0.0;
  std::size_t evaluated_queries = 0;
  std::size_t skipped_no_qrels = 0;     // run queries absent from qrels
  std::size_t skipped_no_relevant = 0;  // queries with zero relevant docs
};

/// Per-query metrics and arithmetic means over queries that have at least
/// one relevant doc. Queries missing from qrels are skipped and counted.
MetricReport aggregate(const RunFile& run, const Qrels& qrels,
                       const std::vector<int>& recall_ks,
                       const std::vector<int>& ndcg_ks,
                       const std::map<std::string, QueryTiming>& timings = {},
                       Gain gain = Gain::exponential);

/// Aligned-column text table for several methods side by side.
std::string format_report_table(const std::vector<std::pair<std::string, MetricReport>>& rows);

/// Machine-readable JSON keyed method -> dataset -> metric -> value.
std::string report_to_json(const std::vector<std::pair<std::string, MetricReport>>& rows,
                           const std::string& dataset);

}  // namespace rebol::eval
