#include "rebol/run_file.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <tuple>

namespace rebol {

void RunFile::set(const std::string& query_id, Ranking ranking) {
  rankings_[query_id] = std::move(ranking);
}

const RunFile::Ranking* RunFile::ranking(const std::string& query_id) const {
  auto it = rankings_.find(query_id);
  return it == rankings_.end() ? nullptr : &it->second;
}

RunFile load_trec_run(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open run file: " + path);

  // collect (rank, doc, score) per query, then validate
  std::map<std::string, std::vector<std::tuple<int, std::string, double>>> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string qid, q0, docid, tag;
    int rank = 0;
    double score = 0.0;
    if (!(ss >> qid >> q0 >> docid >> rank >> score >> tag)) {
      throw Error(path + ":" + std::to_string(lineno) +
                  ": expected `qid Q0 docid rank score tag`");
    }
    rows[qid].emplace_back(rank, docid, score);
  }

  RunFile run;
  for (auto& [qid, entries] : rows) {
    std::sort(entries.begin(), entries.end(),
              [](const auto& a, const auto& b) { return std::get<0>(a) < std::get<0>(b); });
    RunFile::Ranking ranking;
    ranking.reserve(entries.size());
    int expected = 1;
    double prev_score = 0.0;
    for (const auto& [rank, docid, score] : entries) {
      if (rank != expected) {
        throw Error(path + ": query " + qid + " has rank " + std::to_string(rank) +
                    " where " + std::to_string(expected) + " was expected");
      }
      if (expected > 1 && score > prev_score) {
        throw Error(path + ": query " + qid + " scores increase at rank " +
                    std::to_string(rank));
      }
      ranking.emplace_back(docid, score);
      prev_score = score;
      ++expected;
    }
    run.set(qid, std::move(ranking));
  }
  return run;
}

void write_trec_run(const RunFile& run, const std::string& path,
                    const std::string& run_tag) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open for writing: " + path);
  char score_buf[64];
  for (const auto& [qid, ranking] : run.all()) {
    for (std::size_t i = 0; i < ranking.size(); ++i) {
      std::snprintf(score_buf, sizeof(score_buf), "%.6f", ranking[i].second);
      out << qid << " Q0 " << ranking[i].first << ' ' << (i + 1) << ' ' << score_buf
          << ' ' << run_tag << '\n';
    }
  }
  if (!out) throw Error("write failed: " + path);
}

}  // namespace rebol
