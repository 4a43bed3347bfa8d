#include "support/naive_eval.hpp"

#include <algorithm>
#include <cmath>

namespace rebol_test {

double naive_recall(const rebol::RunFile::Ranking& ranking, const rebol::Qrels& qrels,
                    const std::string& query_id, int k) {
  const auto* per_query = qrels.for_query(query_id);
  std::vector<std::string> relevant;
  for (const auto& [doc, grade] : *per_query) {
    if (grade > 0) relevant.push_back(doc);
  }

  int hits = 0;
  for (const auto& doc : relevant) {
    for (int i = 0; i < k && i < static_cast<int>(ranking.size()); ++i) {
      if (ranking[static_cast<std::size_t>(i)].first == doc) {
        ++hits;
        break;
      }
    }
  }
  return static_cast<double>(hits) / static_cast<double>(relevant.size());
}

double naive_ndcg(const rebol::RunFile::Ranking& ranking, const rebol::Qrels& qrels,
                  const std::string& query_id, int k, bool exponential_gain) {
  auto gain = [&](int grade) {
    return exponential_gain ? std::exp2(grade) - 1.0 : static_cast<double>(grade);
  };

  double dcg = 0.0;
  for (int i = 0; i < k && i < static_cast<int>(ranking.size()); ++i) {
    int grade = qrels.grade(query_id, ranking[static_cast<std::size_t>(i)].first);
    dcg += gain(grade) / (std::log(i + 2.0) / std::log(2.0));
  }

  std::vector<int> grades;
  for (const auto& [doc, grade] : *qrels.for_query(query_id)) grades.push_back(grade);
  std::sort(grades.begin(), grades.end(), std::greater<>());
  double idcg = 0.0;
  for (int i = 0; i < k && i < static_cast<int>(grades.size()); ++i) {
    idcg += gain(grades[static_cast<std::size_t>(i)]) / (std::log(i + 2.0) / std::log(2.0));
  }
  return dcg / idcg;
}

}  // namespace rebol_test
