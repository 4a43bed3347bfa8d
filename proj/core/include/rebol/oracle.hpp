#pragma once

#include <atomic>
#include <cstdint>
#include <fstream>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "rebol/common.hpp"
#include "rebol/corpus.hpp"
#include "rebol/embedding.hpp"

namespace rebol::oracle {

inline constexpr int kDefaultMaxGrade = 3;

struct ScoreDoc {
  std::string doc_id;
  std::string title;
  std::string text;
};

struct ScoreRequest {
  std::string query_id;
  std::string query_text;
  std::vector<ScoreDoc> docs;  // non-empty, unique ids
};

struct OracleConfig {
  std::string kind = "simulated-qrels";  // llm-http | simulated-qrels | synthetic
  std::string endpoint;                  // llm-http only
  std::string model;
  double noise_flip_prob = 0.0;  // simulated only
  std::uint64_t rng_seed = 0;
  std::string cache_path;  // optional; enables the write-through cache
  int max_grade = kDefaultMaxGrade;

  // llm-http adapter knobs
  std::string api_key_env = "LLM_API_KEY";
  std::string response_text_path = "/choices/0/message/content";
  std::string request_template;  // JSON with {{model}} / {{messages}} slots
  int max_retries = 3;  // transport attempts per call, exponential backoff
  int timeout_seconds = 60;
  int concurrency = 4;  // in-flight HTTP calls across all sessions

  // synthetic landscape: grade(z) = round(max_grade * max_c exp(-||z-c||^2 / (2 w^2)))
  std::vector<std::vector<float>> centers;
  double width = 1.0;

  void validate() const;
};

/// Batched graded-relevance scorer: one integer grade in [0, max_grade]
/// per requested doc, in request order.
class RelevanceOracle {
 public:
  virtual ~RelevanceOracle() = default;

  virtual std::vector<int> score_batch(const ScoreRequest& req) = 0;
  virtual std::string kind() const = 0;
  virtual std::string model() const = 0;

  int max_grade() const { return max_grade_; }
  /// Batches actually scored (cache hits excluded by the caching wrapper).
  std::uint64_t call_count() const { return call_count_.load(); }
  Warnings warnings() const;

 protected:
  explicit RelevanceOracle(int max_grade) : max_grade_(max_grade) {}
  void validate_request(const ScoreRequest& req) const;
  void note_call() { ++call_count_; }
  void warn(std::string msg);
  int clamp_grade(int grade);

  int max_grade_;

 private:
  std::atomic<std::uint64_t> call_count_{0};
  Warnings warnings_;
  mutable std::mutex warnings_mutex_;
};

/// Replays qrels grades: the qrels grade for (query, doc), clamped into
/// [0, max_grade]; 0 for docs absent from qrels. With noise_flip_prob p,
/// each grade is replaced with probability p by a uniform draw over the
/// other grades (per-query RNG stream derived from rng_seed, so results
/// do not depend on scheduling across queries).
class SimulatedQrelsOracle : public RelevanceOracle {
 public:
  SimulatedQrelsOracle(Qrels qrels, double noise_flip_prob = 0.0,
                       std::uint64_t rng_seed = 0,
                       int max_grade = kDefaultMaxGrade);

  std::vector<int> score_batch(const ScoreRequest& req) override;
  std::string kind() const override { return "simulated-qrels"; }
  std::string model() const override { return model_; }

 private:
  Qrels qrels_;
  double noise_flip_prob_;
  std::uint64_t rng_seed_;
  std::string model_;
};

/// Relevance landscape over embedding space:
///   grade(z) = round(max_grade * max_c exp(-||z - c||^2 / (2 width^2))).
/// Looks embeddings up by doc id in the store.
class SyntheticOracle : public RelevanceOracle {
 public:
  SyntheticOracle(const EmbeddingStore& store,
                  std::vector<std::vector<float>> centers, double width = 1.0,
                  int max_grade = kDefaultMaxGrade);

  std::vector<int> score_batch(const ScoreRequest& req) override;
  std::string kind() const override { return "synthetic"; }
  std::string model() const override { return "landscape"; }
  double landscape_value(std::span<const float> z) const;

 private:
  const EmbeddingStore& store_;
  std::vector<std::vector<float>> centers_;
  double width_;
};

/// HTTP client speaking a chat-completions style wire format. POSTs
/// {model, messages, temperature: 0}; the response text is located with a
/// JSON pointer and the first JSON array of integers in it is taken as
/// the grades. Transport failures are retried with exponential backoff;
/// an unparseable reply triggers one reprompt with a stricter format
/// reminder before the batch fails.
class LlmHttpOracle : public RelevanceOracle {
 public:
  explicit LlmHttpOracle(OracleConfig config);

  std::vector<int> score_batch(const ScoreRequest& req) override;
  std::string kind() const override { return "llm-http"; }
  std::string model() const override { return config_.model; }

  /// HTTP round trips attempted (includes retries and reprompts).
  std::uint64_t transport_calls() const { return transport_calls_.load(); }

  static std::string rubric_system_prompt(int max_grade);
  std::string build_user_prompt(const ScoreRequest& req, bool strict) const;

 private:
  std::string post_chat(const std::string& system_text,
                        const std::string& user_text);

  OracleConfig config_;
  std::atomic<std::uint64_t> transport_calls_{0};
  class Limiter;
  std::shared_ptr<Limiter> limiter_;  // caps in-flight HTTP calls
};

/// Append-only JSONL score cache keyed by (query, doc, oracle kind,
/// model). A corrupt file is rebuilt empty with a warning. Writes are
/// serialized; lookups are safe from any thread between writes.
class ScoreCache {
 public:
  explicit ScoreCache(std::string path);

  std::optional<int> lookup(const std::string& query_id,
                            const std::string& doc_id,
                            const std::string& oracle_kind,
                            const std::string& model) const;
  void store(const std::string& query_id, const std::string& doc_id,
             const std::string& oracle_kind, const std::string& model,
             int grade);
  std::size_t size() const;
  const Warnings& warnings() const { return warnings_; }

 private:
  static std::string key(const std::string& query_id, const std::string& doc_id,
                         const std::string& oracle_kind, const std::string& model);

  std::string path_;
  std::unordered_map<std::string, int> entries_;
  std::ofstream append_;
  Warnings warnings_;
  mutable std::mutex mutex_;
};

/// Write-through caching wrapper. A batch is served from the cache only
/// when every doc hits (a partial batch is re-scored whole so batch
/// context stays intact); every scored batch is written through.
class CachingOracle : public RelevanceOracle {
 public:
  CachingOracle(std::shared_ptr<RelevanceOracle> inner,
                std::shared_ptr<ScoreCache> cache);

  std::vector<int> score_batch(const ScoreRequest& req) override;
  std::string kind() const override { return inner_->kind(); }
  std::string model() const override { return inner_->model(); }

 private:
  std::shared_ptr<RelevanceOracle> inner_;
  std::shared_ptr<ScoreCache> cache_;
};

/// One chat round trip against the configured endpoint, with the same
/// transport retry policy as scoring. Returns the extracted response text.
std::string llm_chat(const OracleConfig& config, const std::string& system_text,
                     const std::string& user_text,
                     std::uint64_t* transport_calls = nullptr);

/// Extracts the first JSON array of integers embedded in free text.
std::optional<std::vector<int>> extract_first_int_array(const std::string& text);
/// Extracts the first JSON array of strings embedded in free text.
std::optional<std::vector<std::string>> extract_first_string_array(const std::string& text);

/// Builds an oracle from config. `store` is needed for kind=synthetic,
/// `qrels` for kind=simulated-qrels. Wraps in a CachingOracle when
/// config.cache_path is set.
std::shared_ptr<RelevanceOracle> make_oracle(const OracleConfig& config,
                                             const EmbeddingStore* store,
                                             const Qrels* qrels);

}  // namespace rebol::oracle
