#include "rebol/eval.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

#include <json.hpp>

namespace rebol::eval {

using nlohmann::json;

namespace {

double gain_of(int grade, Gain gain) {
  if (gain == Gain::exponential) return std::pow(2.0, grade) - 1.0;
  return static_cast<double>(grade);
}

}  // namespace

double recall_at_k(const RunFile::Ranking& ranking, const Qrels& qrels,
                   const std::string& query_id, int k) {
  if (k < 1) throw Error("recall_at_k: k must be >= 1");
  const auto* per_query = qrels.for_query(query_id);
  if (!per_query) throw Error("recall_at_k: query " + query_id + " not in qrels");

  std::size_t relevant = 0;
  for (const auto& [doc, grade] : *per_query) {
    if (grade > 0) ++relevant;
  }
  if (relevant == 0) {
    throw Error("recall_at_k: query " + query_id + " has no relevant docs");
  }

  std::size_t hits = 0;
  std::size_t depth = std::min<std::size_t>(static_cast<std::size_t>(k), ranking.size());
  for (std::size_t i = 0; i < depth; ++i) {
    auto it = per_query->find(ranking[i].first);
    if (it != per_query->end() && it->second > 0) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(relevant);
}

double ndcg_at_k(const RunFile::Ranking& ranking, const Qrels& qrels,
                 const std::string& query_id, int k, Gain gain) {
  if (k < 1) throw Error("ndcg_at_k: k must be >= 1");
  const auto* per_query = qrels.for_query(query_id);
  if (!per_query) throw Error("ndcg_at_k: query " + query_id + " not in qrels");

  std::vector<int> ideal_grades;
  for (const auto& [doc, grade] : *per_query) {
    if (grade > 0) ideal_grades.push_back(grade);
  }
  if (ideal_grades.empty()) {
    throw Error("ndcg_at_k: query " + query_id + " has no relevant docs");
  }
  std::sort(ideal_grades.rbegin(), ideal_grades.rend());

  double dcg = 0.0;
  std::size_t depth = std::min<std::size_t>(static_cast<std::size_t>(k), ranking.size());
  for (std::size_t i = 0; i < depth; ++i) {
    auto it = per_query->find(ranking[i].first);
    int grade = it == per_query->end() ? 0 : it->second;
    dcg += gain_of(grade, gain) / std::log2(static_cast<double>(i) + 2.0);
  }

  double idcg = 0.0;
  std::size_t ideal_depth =
      std::min<std::size_t>(static_cast<std::size_t>(k), ideal_grades.size());
  for (std::size_t i = 0; i < ideal_depth; ++i) {
    idcg += gain_of(ideal_grades[i], gain) / std::log2(static_cast<double>(i) + 2.0);
  }
  return dcg / idcg;
}

MetricReport aggregate(const RunFile& run, const Qrels& qrels,
                       const std::vector<int>& recall_ks, const std::vector<int>& ndcg_ks,
                       const std::map<std::string, QueryTiming>& timings, Gain gain) {
  if (run.all().empty()) throw Error("aggregate: empty run");

  MetricReport report;
  report.recall_ks = recall_ks;
  report.ndcg_ks = ndcg_ks;

  std::vector<std::string> metric_names;
  for (int k : recall_ks) metric_names.push_back("R@" + std::to_string(k));
  for (int k : ndcg_ks) metric_names.push_back("N@" + std::to_string(k));

  double llm_sum = 0.0, total_sum = 0.0;
  std::size_t timing_count = 0;

  for (const auto& [qid, ranking] : run.all()) {
    if (!qrels.has_query(qid)) {
      ++report.skipped_no_qrels;
      continue;
    }
    if (qrels.relevant_count(qid) == 0) {
      ++report.skipped_no_relevant;
      continue;
    }
    for (int k : recall_ks) {
      report.per_query["R@" + std::to_string(k)][qid] = recall_at_k(ranking, qrels, qid, k);
    }
    for (int k : ndcg_ks) {
      report.per_query["N@" + std::to_string(k)][qid] =
          ndcg_at_k(ranking, qrels, qid, k, gain);
    }
    ++report.evaluated_queries;

    if (auto it = timings.find(qid); it != timings.end()) {
      llm_sum += it->second.llm_seconds;
      total_sum += it->second.total_seconds;
      ++timing_count;
    }
  }

  for (const auto& name : metric_names) {
    const auto& values = report.per_query[name];
    double sum = 0.0;
    for (const auto& [qid, v] : values) sum += v;
    report.means[name] = values.empty() ? 0.0 : sum / static_cast<double>(values.size());
  }
  if (timing_count > 0) {
    report.mean_llm_seconds = llm_sum / static_cast<double>(timing_count);
    report.mean_total_seconds = total_sum / static_cast<double>(timing_count);
  }
  return report;
}

std::string format_report_table(const std::vector<std::pair<std::string, MetricReport>>& rows) {
  if (rows.empty()) return "";

  std::vector<std::string> columns;
  for (const auto& [name, report] : rows) {
    for (const auto& [metric, mean] : report.means) {
      if (std::find(columns.begin(), columns.end(), metric) == columns.end()) {
        columns.push_back(metric);
      }
    }
  }
  // recall columns first, then ndcg, each by ascending k
  std::sort(columns.begin(), columns.end(), [](const std::string& a, const std::string& b) {
    if (a[0] != b[0]) return a[0] == 'R';
    return std::stoi(a.substr(2)) < std::stoi(b.substr(2));
  });

  std::size_t method_width = 6;
  for (const auto& [name, report] : rows) method_width = std::max(method_width, name.size());

  std::ostringstream out;
  out << std::left << std::setw(static_cast<int>(method_width) + 2) << "method";
  for (const auto& c : columns) out << std::right << std::setw(8) << c;
  out << std::right << std::setw(10) << "LLM(s)" << std::setw(10) << "Total(s)" << '\n';

  for (const auto& [name, report] : rows) {
    out << std::left << std::setw(static_cast<int>(method_width) + 2) << name;
    for (const auto& c : columns) {
      auto it = report.means.find(c);
      if (it == report.means.end()) {
        out << std::right << std::setw(8) << "-";
      } else {
        // reported as x100 with one decimal, the usual table convention
        out << std::right << std::setw(8) << std::fixed << std::setprecision(1)
            << it->second * 100.0;
      }
    }
    out << std::right << std::setw(10) << std::fixed << std::setprecision(1)
        << report.mean_llm_seconds;
    out << std::right << std::setw(10) << std::fixed << std::setprecision(1)
        << report.mean_total_seconds << '\n';
  }
  return out.str();
}

std::string report_to_json(const std::vector<std::pair<std::string, MetricReport>>& rows,
                           const std::string& dataset) {
  json out = json::object();
  for (const auto& [method, report] : rows) {
    json metrics = json::object();
    for (const auto& [metric, mean] : report.means) metrics[metric] = mean;
    metrics["llm_seconds"] = report.mean_llm_seconds;
    metrics["total_seconds"] = report.mean_total_seconds;
    metrics["evaluated_queries"] = report.evaluated_queries;
    metrics["skipped_no_qrels"] = report.skipped_no_qrels;
    metrics["skipped_no_relevant"] = report.skipped_no_relevant;
    out[method][dataset] = std::move(metrics);
  }
  return out.dump(2) + "\n";
}

}  // namespace rebol::eval
