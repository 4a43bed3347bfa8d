#include "rebol/corpus.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace rebol {

using nlohmann::json;

Corpus::Corpus(std::vector<Document> docs) : docs_(std::move(docs)) {
  index_.reserve(docs_.size());
  for (std::size_t i = 0; i < docs_.size(); ++i) {
    index_.emplace(docs_[i].id, i);
  }
}

const Document& Corpus::at(const std::string& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) throw Error("unknown document id: " + id);
  return docs_[it->second];
}

namespace {

json parse_line(const std::string& line, const std::string& path, std::size_t lineno) {
  json j = json::parse(line, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    throw Error(path + ":" + std::to_string(lineno) + ": malformed JSON line");
  }
  return j;
}

std::string require_string(const json& j, const char* field, const std::string& path,
                           std::size_t lineno) {
  auto it = j.find(field);
  if (it == j.end() || !it->is_string()) {
    throw Error(path + ":" + std::to_string(lineno) + ": missing required field `" +
                field + "`");
  }
  return it->get<std::string>();
}

}  // namespace

Corpus load_corpus(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open corpus file: " + path);

  std::vector<Document> docs;
  std::unordered_map<std::string, std::size_t> first_line;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json j = parse_line(line, path, lineno);

    Document d;
    d.id = require_string(j, "_id", path, lineno);
    if (d.id.empty()) {
      throw Error(path + ":" + std::to_string(lineno) + ": empty `_id`");
    }
    if (auto it = j.find("title"); it != j.end() && it->is_string()) {
      d.title = it->get<std::string>();
    }
    d.text = require_string(j, "text", path, lineno);

    auto [pos, inserted] = first_line.emplace(d.id, lineno);
    if (!inserted) {
      throw Error(path + ": duplicate `_id` \"" + d.id + "\" on lines " +
                  std::to_string(pos->second) + " and " + std::to_string(lineno));
    }
    docs.push_back(std::move(d));
  }
  return Corpus(std::move(docs));
}

std::vector<QueryRecord> load_queries(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open queries file: " + path);

  std::vector<QueryRecord> queries;
  std::unordered_map<std::string, std::size_t> first_line;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json j = parse_line(line, path, lineno);

    QueryRecord q;
    q.id = require_string(j, "_id", path, lineno);
    if (q.id.empty()) {
      throw Error(path + ":" + std::to_string(lineno) + ": empty `_id`");
    }
    q.text = require_string(j, "text", path, lineno);
    auto [pos, inserted] = first_line.emplace(q.id, lineno);
    if (!inserted) {
      throw Error(path + ": duplicate `_id` \"" + q.id + "\" on lines " +
                  std::to_string(pos->second) + " and " + std::to_string(lineno));
    }
    queries.push_back(std::move(q));
  }
  return queries;
}

void Qrels::set(const std::string& query_id, const std::string& doc_id, int grade) {
  by_query_[query_id][doc_id] = grade;
}

int Qrels::grade(const std::string& query_id, const std::string& doc_id) const {
  auto q = by_query_.find(query_id);
  if (q == by_query_.end()) return 0;
  auto d = q->second.find(doc_id);
  return d == q->second.end() ? 0 : d->second;
}

bool Qrels::has_query(const std::string& query_id) const {
  return by_query_.count(query_id) > 0;
}

const Qrels::PerQuery* Qrels::for_query(const std::string& query_id) const {
  auto it = by_query_.find(query_id);
  return it == by_query_.end() ? nullptr : &it->second;
}

std::size_t Qrels::size() const {
  std::size_t n = 0;
  for (const auto& [qid, docs] : by_query_) n += docs.size();
  return n;
}

std::size_t Qrels::relevant_count(const std::string& query_id) const {
  auto it = by_query_.find(query_id);
  if (it == by_query_.end()) return 0;
  std::size_t n = 0;
  for (const auto& [doc, grade] : it->second) {
    if (grade > 0) ++n;
  }
  return n;
}

namespace {

int parse_grade(const std::string& token, const std::string& path, std::size_t lineno) {
  std::size_t consumed = 0;
  int grade = 0;
  try {
    grade = std::stoi(token, &consumed);
  } catch (const std::exception&) {
    throw Error(path + ":" + std::to_string(lineno) + ": non-integer grade `" + token + "`");
  }
  if (consumed != token.size()) {
    throw Error(path + ":" + std::to_string(lineno) + ": non-integer grade `" + token + "`");
  }
  if (grade < 0) {
    throw Error(path + ":" + std::to_string(lineno) + ": negative grade " + token);
  }
  return grade;
}

}  // namespace

QrelsLoad load_qrels(const std::string& path, QrelsFormat format) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open qrels file: " + path);

  QrelsLoad out;
  std::string line;
  std::size_t lineno = 0;
  bool header_skipped = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;

    std::string qid, docid, grade_token;
    if (format == QrelsFormat::beir_tsv) {
      if (!header_skipped) {
        header_skipped = true;
        if (line.rfind("query-id", 0) == 0) continue;  // header row
      }
      std::istringstream ss(line);
      std::string skip;
      if (!std::getline(ss, qid, '\t') || !std::getline(ss, docid, '\t') ||
          !std::getline(ss, grade_token, '\t')) {
        throw Error(path + ":" + std::to_string(lineno) + ": expected 3 tab-separated fields");
      }
    } else {
      std::istringstream ss(line);
      std::string iter;
      if (!(ss >> qid >> iter >> docid >> grade_token)) {
        throw Error(path + ":" + std::to_string(lineno) + ": expected `qid 0 docid rel`");
      }
    }
    // trailing \r from CRLF files
    if (!grade_token.empty() && grade_token.back() == '\r') grade_token.pop_back();

    int grade = parse_grade(grade_token, path, lineno);
    if (auto* per_query = out.qrels.for_query(qid);
        per_query != nullptr && per_query->count(docid) > 0) {
      out.warnings.add(path + ":" + std::to_string(lineno) + ": duplicate (" + qid +
                       ", " + docid + ") overwrites earlier grade");
    }
    out.qrels.set(qid, docid, grade);
  }
  return out;
}

}  // namespace rebol
