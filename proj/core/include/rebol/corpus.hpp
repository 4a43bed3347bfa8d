#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "rebol/common.hpp"

namespace rebol {

struct Document {
  std::string id;     // corpus-unique, non-empty
  std::string title;  // may be empty
  std::string text;
};

class Corpus {
 public:
  Corpus() = default;
  explicit Corpus(std::vector<Document> docs);

  const std::vector<Document>& docs() const { return docs_; }
  std::size_t size() const { return docs_.size(); }
  bool contains(const std::string& id) const { return index_.count(id) > 0; }
  const Document& at(const std::string& id) const;

 private:
  std::vector<Document> docs_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Reads a BEIR-style JSONL corpus: one object per line with `_id`,
/// `title`, `text`. Documents come back in file order.
/// Throws on malformed JSON (naming the line), duplicate `_id` (naming
/// both lines) and missing required fields.
Corpus load_corpus(const std::string& path);

struct QueryRecord {
  std::string id;
  std::string text;
  std::vector<float> embedding;  // dimension must match the store
};

/// Reads a queries JSONL file (`_id`, `text`). Embeddings are joined in
/// later from an embedding file; they start out empty here.
std::vector<QueryRecord> load_queries(const std::string& path);

enum class QrelsFormat { beir_tsv, trec };

/// Ground-truth relevance grades keyed by (query id, doc id).
class Qrels {
 public:
  using PerQuery = std::map<std::string, int>;

  void set(const std::string& query_id, const std::string& doc_id, int grade);
  /// Grade for (query, doc); 0 when absent (absence means irrelevant).
  int grade(const std::string& query_id, const std::string& doc_id) const;
  bool has_query(const std::string& query_id) const;
  const PerQuery* for_query(const std::string& query_id) const;
  const std::map<std::string, PerQuery>& all() const { return by_query_; }
  std::size_t size() const;
  /// Number of docs with grade > 0 for a query.
  std::size_t relevant_count(const std::string& query_id) const;

 private:
  std::map<std::string, PerQuery> by_query_;
};

struct QrelsLoad {
  Qrels qrels;
  Warnings warnings;  // one entry per duplicate overwrite
};

/// beir-tsv: header `query-id\tcorpus-id\tscore`, then tab-separated rows.
/// trec: `qid 0 docid rel`, whitespace-separated, no header.
/// Later duplicates overwrite earlier ones and are counted as warnings.
/// Throws on non-integer or negative grades.
QrelsLoad load_qrels(const std::string& path, QrelsFormat format);

}  // namespace rebol
