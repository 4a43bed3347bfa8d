#pragma once

#include <map>
#include <string>
#include <vector>

#include "rebol/common.hpp"

namespace rebol {

/// Ranked retrieval output for a set of queries, interchangeable with the
/// six-column TREC format `query_id Q0 doc_id rank score run_tag`.
/// Invariants enforced on load: per query, ranks contiguous from 1 and
/// scores non-increasing.
class RunFile {
 public:
  using Ranking = std::vector<std::pair<std::string, double>>;

  void set(const std::string& query_id, Ranking ranking);
  const Ranking* ranking(const std::string& query_id) const;
  const std::map<std::string, Ranking>& all() const { return rankings_; }
  std::size_t query_count() const { return rankings_.size(); }

 private:
  std::map<std::string, Ranking> rankings_;
};

RunFile load_trec_run(const std::string& path);

/// Scores are printed to 6 decimals; queries in id order. Byte-stable for
/// identical inputs.
void write_trec_run(const RunFile& run, const std::string& path,
                    const std::string& run_tag);

}  // namespace rebol
