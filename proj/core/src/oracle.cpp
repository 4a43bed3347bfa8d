#include "rebol/oracle.hpp"

#include <chrono>
#include <cmath>
#include <condition_variable>
#include <fstream>
#include <functional>
#include <random>
#include <thread>
#include <unordered_set>

#include <httplib.h>
#include <json.hpp>

namespace rebol::oracle {

using nlohmann::json;

void OracleConfig::validate() const {
  if (kind != "llm-http" && kind != "simulated-qrels" && kind != "synthetic") {
    throw Error("unknown oracle kind: " + kind);
  }
  if ((kind == "llm-http") != !endpoint.empty()) {
    throw Error("oracle endpoint must be set exactly for kind=llm-http");
  }
  if (noise_flip_prob < 0.0 || noise_flip_prob > 1.0) {
    throw Error("noise_flip_prob must be in [0,1]");
  }
  if (max_grade < 1) throw Error("max_grade must be >= 1");
  if (kind == "synthetic" && centers.empty()) {
    throw Error("synthetic oracle needs at least one center");
  }
}

void RelevanceOracle::validate_request(const ScoreRequest& req) const {
  if (req.docs.empty()) throw Error("score_batch: empty doc batch");
  std::unordered_set<std::string> seen;
  for (const auto& d : req.docs) {
    if (!seen.insert(d.doc_id).second) {
      throw Error("score_batch: duplicate doc id " + d.doc_id);
    }
  }
}

Warnings RelevanceOracle::warnings() const {
  std::lock_guard<std::mutex> lock(warnings_mutex_);
  return warnings_;
}

void RelevanceOracle::warn(std::string msg) {
  std::lock_guard<std::mutex> lock(warnings_mutex_);
  warnings_.add(std::move(msg));
}

int RelevanceOracle::clamp_grade(int grade) {
  if (grade < 0) {
    warn("grade " + std::to_string(grade) + " clamped to 0");
    return 0;
  }
  if (grade > max_grade_) {
    warn("grade " + std::to_string(grade) + " clamped to " + std::to_string(max_grade_));
    return max_grade_;
  }
  return grade;
}

// --- simulated-qrels ---

SimulatedQrelsOracle::SimulatedQrelsOracle(Qrels qrels, double noise_flip_prob,
                                           std::uint64_t rng_seed, int max_grade)
    : RelevanceOracle(max_grade),
      qrels_(std::move(qrels)),
      noise_flip_prob_(noise_flip_prob),
      rng_seed_(rng_seed) {
  if (noise_flip_prob < 0.0 || noise_flip_prob > 1.0) {
    throw Error("noise_flip_prob must be in [0,1]");
  }
  model_ = "qrels";
  if (noise_flip_prob_ > 0.0) {
    model_ += "+noise" + std::to_string(noise_flip_prob_);
  }
}

std::vector<int> SimulatedQrelsOracle::score_batch(const ScoreRequest& req) {
  validate_request(req);
  note_call();

  std::vector<int> grades;
  grades.reserve(req.docs.size());
  for (const auto& d : req.docs) {
    grades.push_back(clamp_grade(qrels_.grade(req.query_id, d.doc_id)));
  }

  if (noise_flip_prob_ > 0.0) {
    // Stream keyed by (seed, query, doc): scheduling across queries and
    // the position of a doc within a batch cannot change its draw.
    for (std::size_t i = 0; i < grades.size(); ++i) {
      std::uint64_t k = splitmix64(derive_seed(rng_seed_, req.query_id) ^
                                   fnv1a64(req.docs[i].doc_id));
      std::mt19937_64 rng(k);
      if (uniform01(rng()) < noise_flip_prob_) {
        int offset = 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(max_grade_));
        grades[i] = (grades[i] + offset) % (max_grade_ + 1);
      }
    }
  }
  return grades;
}

// --- synthetic landscape ---

SyntheticOracle::SyntheticOracle(const EmbeddingStore& store,
                                 std::vector<std::vector<float>> centers,
                                 double width, int max_grade)
    : RelevanceOracle(max_grade), store_(store), centers_(std::move(centers)), width_(width) {
  if (centers_.empty()) throw Error("synthetic oracle needs at least one center");
  if (!(width_ > 0.0)) throw Error("synthetic width must be positive");
  for (const auto& c : centers_) {
    if (c.size() != store_.dim()) {
      throw Error("synthetic center dimension " + std::to_string(c.size()) +
                  " does not match store dim " + std::to_string(store_.dim()));
    }
  }
}

double SyntheticOracle::landscape_value(std::span<const float> z) const {
  double best = 0.0;
  for (const auto& c : centers_) {
    double sq = 0.0;
    for (std::size_t j = 0; j < z.size(); ++j) {
      double d = static_cast<double>(z[j]) - c[j];
      sq += d * d;
    }
    best = std::max(best, std::exp(-sq / (2.0 * width_ * width_)));
  }
  return max_grade_ * best;
}

std::vector<int> SyntheticOracle::score_batch(const ScoreRequest& req) {
  validate_request(req);
  note_call();
  std::vector<int> grades;
  grades.reserve(req.docs.size());
  for (const auto& d : req.docs) {
    auto row = store_.find(d.doc_id);
    if (!row) throw Error("synthetic oracle: unknown doc id " + d.doc_id);
    grades.push_back(clamp_grade(
        static_cast<int>(std::lround(landscape_value(store_.row(*row))))));
  }
  return grades;
}

// --- free-text array extraction ---

namespace {

std::optional<json> first_json_array(const std::string& text) {
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] != '[') continue;
    int depth = 0;
    for (std::size_t j = i; j < text.size(); ++j) {
      if (text[j] == '[') ++depth;
      if (text[j] == ']') {
        --depth;
        if (depth == 0) {
          json j2 = json::parse(text.substr(i, j - i + 1), nullptr, false);
          if (!j2.is_discarded() && j2.is_array()) return j2;
          break;  // not valid here, keep scanning from the next '['
        }
      }
    }
  }
  return std::nullopt;
}

}  // namespace

std::optional<std::vector<int>> extract_first_int_array(const std::string& text) {
  for (std::size_t from = 0; from < text.size();) {
    std::size_t at = text.find('[', from);
    if (at == std::string::npos) break;
    auto arr = first_json_array(text.substr(at));
    if (arr) {
      std::vector<int> out;
      bool all_int = true;
      for (const auto& v : *arr) {
        if (v.is_number_integer()) {
          out.push_back(v.get<int>());
        } else if (v.is_number_float() &&
                   std::floor(v.get<double>()) == v.get<double>()) {
          out.push_back(static_cast<int>(v.get<double>()));
        } else {
          all_int = false;
          break;
        }
      }
      if (all_int && !out.empty()) return out;
    }
    from = at + 1;
  }
  return std::nullopt;
}

std::optional<std::vector<std::string>> extract_first_string_array(const std::string& text) {
  for (std::size_t from = 0; from < text.size();) {
    std::size_t at = text.find('[', from);
    if (at == std::string::npos) break;
    auto arr = first_json_array(text.substr(at));
    if (arr) {
      std::vector<std::string> out;
      bool all_str = true;
      for (const auto& v : *arr) {
        if (v.is_string()) {
          out.push_back(v.get<std::string>());
        } else {
          all_str = false;
          break;
        }
      }
      if (all_str && !out.empty()) return out;
    }
    from = at + 1;
  }
  return std::nullopt;
}

// --- llm-http ---

namespace {

/// Splits "http://host:port/some/path" into (scheme://host:port, /some/path).
std::pair<std::string, std::string> split_endpoint(const std::string& endpoint) {
  auto scheme_end = endpoint.find("://");
  std::size_t path_start =
      endpoint.find('/', scheme_end == std::string::npos ? 0 : scheme_end + 3);
  if (path_start == std::string::npos) return {endpoint, "/"};
  return {endpoint.substr(0, path_start), endpoint.substr(path_start)};
}

}  // namespace

/// Counting limiter for in-flight HTTP calls (rate-limit courtesy).
class LlmHttpOracle::Limiter {
 public:
  explicit Limiter(int slots) : slots_(slots > 0 ? slots : 1) {}

  void acquire() {
    std::unique_lock<std::mutex> lock(mutex_);
    cv_.wait(lock, [&] { return slots_ > 0; });
    --slots_;
  }
  void release() {
    {
      std::lock_guard<std::mutex> lock(mutex_);
      ++slots_;
    }
    cv_.notify_one();
  }

 private:
  int slots_;
  std::mutex mutex_;
  std::condition_variable cv_;
};

LlmHttpOracle::LlmHttpOracle(OracleConfig config)
    : RelevanceOracle(config.max_grade),
      config_(std::move(config)),
      limiter_(std::make_shared<Limiter>(config_.concurrency)) {
  if (config_.endpoint.empty()) throw Error("llm-http oracle needs an endpoint");
}

std::string LlmHttpOracle::rubric_system_prompt(int max_grade) {
  (void)max_grade;
  return "You judge the relevance of passages to a search query on a 0-3 scale:\n"
         "3: The passage is dedicated to the query and contains the exact answer.\n"
         "2: The passage has some answer for the query, but the answer may be a "
         "bit unclear, or hidden amongst extraneous information.\n"
         "1: The passage seems related to the query but does not answer it.\n"
         "0: The passage has nothing to do with the query.\n";
}

std::string LlmHttpOracle::build_user_prompt(const ScoreRequest& req, bool strict) const {
  std::string prompt = "Query: " + req.query_text + "\n\nPassages:\n";
  for (std::size_t i = 0; i < req.docs.size(); ++i) {
    const auto& d = req.docs[i];
    prompt += std::to_string(i + 1) + ". ";
    if (!d.title.empty()) prompt += d.title + " - ";
    prompt += d.text + "\n";
  }
  prompt += "\nScore each passage against the query using the 0-3 scale. Respond "
            "with a JSON array of " + std::to_string(req.docs.size()) +
            " integers, one per passage in order, and nothing else.";
  if (strict) {
    prompt += "\nYour previous reply could not be parsed. Output ONLY the JSON "
              "array, e.g. [0, 2, 1]. No prose, no code fences.";
  }
  return prompt;
}

std::string llm_chat(const OracleConfig& config, const std::string& system_text,
                     const std::string& user_text, std::uint64_t* transport_calls) {
  auto [host, path] = split_endpoint(config.endpoint);

  json messages = json::array({{{"role", "system"}, {"content", system_text}},
                               {{"role", "user"}, {"content", user_text}}});
  json body;
  if (!config.request_template.empty()) {
    body = json::parse(config.request_template);
    // fill the {{model}} / {{messages}} slots anywhere in the template
    std::function<void(json&)> fill = [&](json& node) {
      if (node.is_string()) {
        const auto& s = node.get_ref<const std::string&>();
        if (s == "{{model}}") node = config.model;
        else if (s == "{{messages}}") node = messages;
      } else if (node.is_object() || node.is_array()) {
        for (auto& child : node) fill(child);
      }
    };
    fill(body);
  } else {
    body = {{"model", config.model}, {"messages", messages}, {"temperature", 0}};
  }

  httplib::Client client(host);
  client.set_connection_timeout(config.timeout_seconds, 0);
  client.set_read_timeout(config.timeout_seconds, 0);
  httplib::Headers headers;
  if (const char* key = std::getenv(config.api_key_env.c_str()); key && *key) {
    headers.emplace("Authorization", std::string("Bearer ") + key);
  }

  int backoff_ms = 250;
  for (int attempt = 0;; ++attempt) {
    if (transport_calls) ++*transport_calls;
    auto res = client.Post(path, headers, body.dump(), "application/json");
    if (res && res->status >= 200 && res->status < 300) {
      json reply = json::parse(res->body, nullptr, false);
      if (reply.is_discarded()) throw Error("llm-http: response is not JSON");
      json text = reply.value(json::json_pointer(config.response_text_path), json());
      if (!text.is_string()) {
        throw Error("llm-http: no text at response pointer " + config.response_text_path);
      }
      return text.get<std::string>();
    }
    if (attempt + 1 >= config.max_retries) {
      std::string detail = res ? "HTTP " + std::to_string(res->status)
                               : "transport error (" + httplib::to_string(res.error()) + ")";
      throw Error("llm-http: " + detail + " after " +
                  std::to_string(config.max_retries) + " attempts: " + config.endpoint);
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(backoff_ms));
    backoff_ms *= 2;
  }
}

std::string LlmHttpOracle::post_chat(const std::string& system_text,
                                     const std::string& user_text) {
  limiter_->acquire();
  std::uint64_t calls = 0;
  std::string text;
  try {
    text = llm_chat(config_, system_text, user_text, &calls);
  } catch (...) {
    transport_calls_ += calls;
    limiter_->release();
    throw;
  }
  transport_calls_ += calls;
  limiter_->release();
  return text;
}

std::vector<int> LlmHttpOracle::score_batch(const ScoreRequest& req) {
  validate_request(req);
  note_call();

  const std::string system_text = rubric_system_prompt(max_grade_);
  for (int round = 0; round < 2; ++round) {
    std::string text = post_chat(system_text, build_user_prompt(req, round > 0));
    auto parsed = extract_first_int_array(text);
    if (parsed && parsed->size() == req.docs.size()) {
      std::vector<int> grades;
      grades.reserve(parsed->size());
      for (int g : *parsed) grades.push_back(clamp_grade(g));
      return grades;
    }
    // fall through to one reprompt with the stricter format reminder
  }
  throw Error("llm-http: unparseable response for query " + req.query_id +
              " (expected a JSON array of " + std::to_string(req.docs.size()) +
              " integers)");
}

// --- cache ---

ScoreCache::ScoreCache(std::string path) : path_(std::move(path)) {
  {
    std::ifstream in(path_);
    if (in) {
      std::string line;
      std::size_t lineno = 0;
      bool corrupt = false;
      std::unordered_map<std::string, int> loaded;
      while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        json j = json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object() || !j.contains("query_id") ||
            !j.contains("doc_id") || !j.contains("oracle_kind") ||
            !j.contains("model") || !j.contains("grade") ||
            !j["grade"].is_number_integer()) {
          corrupt = true;
          break;
        }
        loaded[key(j["query_id"], j["doc_id"], j["oracle_kind"], j["model"])] =
            j["grade"].get<int>();
      }
      if (corrupt) {
        warnings_.add(path_ + ":" + std::to_string(lineno) +
                      ": corrupt cache entry; rebuilding cache from scratch");
        std::ofstream(path_, std::ios::trunc);
      } else {
        entries_ = std::move(loaded);
      }
    }
  }
  append_.open(path_, std::ios::app);
  if (!append_) throw Error("cannot open cache for append: " + path_);
}

std::string ScoreCache::key(const std::string& query_id, const std::string& doc_id,
                            const std::string& oracle_kind, const std::string& model) {
  return query_id + "\x1f" + doc_id + "\x1f" + oracle_kind + "\x1f" + model;
}

std::optional<int> ScoreCache::lookup(const std::string& query_id,
                                      const std::string& doc_id,
                                      const std::string& oracle_kind,
                                      const std::string& model) const {
  std::lock_guard<std::mutex> lock(mutex_);
  auto it = entries_.find(key(query_id, doc_id, oracle_kind, model));
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void ScoreCache::store(const std::string& query_id, const std::string& doc_id,
                       const std::string& oracle_kind, const std::string& model,
                       int grade) {
  std::lock_guard<std::mutex> lock(mutex_);
  entries_[key(query_id, doc_id, oracle_kind, model)] = grade;
  json j = {{"query_id", query_id},
            {"doc_id", doc_id},
            {"oracle_kind", oracle_kind},
            {"model", model},
            {"grade", grade}};
  append_ << j.dump() << '\n';
  append_.flush();
}

std::size_t ScoreCache::size() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return entries_.size();
}

CachingOracle::CachingOracle(std::shared_ptr<RelevanceOracle> inner,
                             std::shared_ptr<ScoreCache> cache)
    : RelevanceOracle(inner->max_grade()), inner_(std::move(inner)), cache_(std::move(cache)) {}

std::vector<int> CachingOracle::score_batch(const ScoreRequest& req) {
  validate_request(req);
  note_call();

  std::vector<int> grades(req.docs.size());
  bool all_hit = true;
  for (std::size_t i = 0; i < req.docs.size(); ++i) {
    auto hit = cache_->lookup(req.query_id, req.docs[i].doc_id, inner_->kind(),
                              inner_->model());
    if (hit) {
      grades[i] = *hit;
    } else {
      all_hit = false;
      break;
    }
  }
  if (all_hit) return grades;

  // Partial hits re-score the whole batch so inter-document context stays
  // identical to a cold run.
  grades = inner_->score_batch(req);
  for (std::size_t i = 0; i < req.docs.size(); ++i) {
    cache_->store(req.query_id, req.docs[i].doc_id, inner_->kind(), inner_->model(),
                  grades[i]);
  }
  return grades;
}

std::shared_ptr<RelevanceOracle> make_oracle(const OracleConfig& config,
                                             const EmbeddingStore* store,
                                             const Qrels* qrels) {
  config.validate();
  std::shared_ptr<RelevanceOracle> inner;
  if (config.kind == "simulated-qrels") {
    if (!qrels) throw Error("simulated-qrels oracle needs qrels");
    inner = std::make_shared<SimulatedQrelsOracle>(*qrels, config.noise_flip_prob,
                                                   config.rng_seed, config.max_grade);
  } else if (config.kind == "synthetic") {
    if (!store) throw Error("synthetic oracle needs an embedding store");
    inner = std::make_shared<SyntheticOracle>(*store, config.centers, config.width,
                                              config.max_grade);
  } else {
    inner = std::make_shared<LlmHttpOracle>(config);
  }
  if (!config.cache_path.empty()) {
    return std::make_shared<CachingOracle>(inner,
                                           std::make_shared<ScoreCache>(config.cache_path));
  }
  return inner;
}

}  // namespace rebol::oracle
