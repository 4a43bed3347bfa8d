#include "rebol/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

namespace rebol::experiment {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config file: " + path);
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    throw Error(path + ": not a JSON object");
  }
  return j;
}

/// `a.b.c=value` into the document; value parsed as a JSON scalar with a
/// string fallback.
void apply_override(json& doc, const std::string& assignment) {
  auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw Error("override must look like key.path=value: " + assignment);
  }
  std::string path = assignment.substr(0, eq);
  std::string raw = assignment.substr(eq + 1);
  json value = json::parse(raw, nullptr, false);
  if (value.is_discarded()) value = raw;

  json* node = &doc;
  std::size_t from = 0;
  while (true) {
    std::size_t dot = path.find('.', from);
    std::string key = path.substr(from, dot == std::string::npos ? dot : dot - from);
    if (key.empty()) throw Error("bad override path: " + path);
    if (dot == std::string::npos) {
      (*node)[key] = std::move(value);
      break;
    }
    node = &(*node)[key];
    from = dot + 1;
  }
}

std::string str_or(const json& j, const char* key, const std::string& fallback) {
  auto it = j.find(key);
  return it != j.end() && it->is_string() ? it->get<std::string>() : fallback;
}

template <typename T>
T num_or(const json& j, const char* key, T fallback) {
  auto it = j.find(key);
  return it != j.end() && it->is_number() ? it->get<T>() : fallback;
}

DatasetPaths parse_dataset(const json& j) {
  DatasetPaths d;
  d.corpus = str_or(j, "corpus", "");
  d.queries = str_or(j, "queries", "");
  d.qrels = str_or(j, "qrels", "");
  d.qrels_format = str_or(j, "qrels_format", "beir-tsv");
  d.doc_embeddings = str_or(j, "doc_embeddings", "");
  d.doc_manifest = str_or(j, "doc_manifest", "");
  d.query_embeddings = str_or(j, "query_embeddings", "");
  d.query_manifest = str_or(j, "query_manifest", "");
  d.reformulations = str_or(j, "reformulations", "");
  d.reformulation_embeddings = str_or(j, "reformulation_embeddings", "");
  d.reformulation_manifest = str_or(j, "reformulation_manifest", "");
  return d;
}

MethodConfig parse_method(const json& j) {
  MethodConfig m;
  m.kind = str_or(j, "kind", "rebol");
  m.output_k = num_or(j, "output_k", 100);

  auto& s = m.session;
  s.variant = engine::variant_from_string(str_or(j, "variant", "QR"));
  s.budget = num_or(j, "budget", 100);
  s.batch_size = num_or(j, "batch_size", 10);
  s.s_max = num_or(j, "s_max", 3);
  s.output_k = m.output_k;
  if (auto it = j.find("acquisition"); it != j.end() && it->is_object()) {
    const json& a = *it;
    s.acquisition.kind = acq::kind_from_string(str_or(a, "kind", "ucb"));
    s.acquisition.beta = num_or(a, "beta", 1.0);
    s.acquisition.batch_strategy =
        acq::strategy_from_string(str_or(a, "batch_strategy", "top_b"));
    s.acquisition.lambda = num_or(a, "lambda", 0.7);
    s.acquisition.rng_seed = num_or<std::uint64_t>(a, "rng_seed", 0);
  }
  s.acquisition.batch_size = s.batch_size;
  if (auto it = j.find("kernel"); it != j.end() && it->is_object()) {
    const json& k = *it;
    s.kernel.signal_variance = num_or(k, "signal_variance", 1.0);
    s.kernel.length_scale = num_or(k, "length_scale", 1.0);
    s.kernel.noise_variance = num_or(k, "noise_variance", 1.0);
    s.kernel.jitter = num_or(k, "jitter", 1e-8);
  }

  auto& b = m.baseline;
  b.kind = m.kind;
  b.k = num_or(j, "k", 100);
  b.lambda = num_or(j, "lambda", 0.7);
  b.batch_size = num_or(j, "batch_size", 10);
  return m;
}

oracle::OracleConfig parse_oracle(const json& j, std::uint64_t global_seed) {
  oracle::OracleConfig o;
  o.kind = str_or(j, "kind", "simulated-qrels");
  o.endpoint = str_or(j, "endpoint", "");
  o.model = str_or(j, "model", "");
  o.noise_flip_prob = num_or(j, "noise_flip_prob", 0.0);
  o.rng_seed = num_or<std::uint64_t>(j, "rng_seed", global_seed);
  o.cache_path = str_or(j, "cache_path", "");
  o.max_grade = num_or(j, "max_grade", oracle::kDefaultMaxGrade);
  o.api_key_env = str_or(j, "api_key_env", "LLM_API_KEY");
  o.response_text_path = str_or(j, "response_text_path", "/choices/0/message/content");
  if (auto it = j.find("request_template"); it != j.end() && !it->is_null()) {
    o.request_template = it->is_string() ? it->get<std::string>() : it->dump();
  }
  o.max_retries = num_or(j, "max_retries", 3);
  o.timeout_seconds = num_or(j, "timeout_seconds", 60);
  o.concurrency = num_or(j, "concurrency", 4);
  if (auto it = j.find("centers"); it != j.end() && it->is_array()) {
    for (const auto& c : *it) o.centers.push_back(c.get<std::vector<float>>());
  }
  o.width = num_or(j, "width", 1.0);
  return o;
}

ExperimentConfig materialize(const json& doc) {
  ExperimentConfig c;
  c.seed = num_or<std::uint64_t>(doc, "seed", 0);
  if (auto it = doc.find("dataset"); it != doc.end()) c.dataset = parse_dataset(*it);
  if (auto it = doc.find("method"); it != doc.end()) c.method = parse_method(*it);
  if (auto it = doc.find("oracle"); it != doc.end()) {
    c.oracle = parse_oracle(*it, c.seed);
  } else {
    c.oracle.rng_seed = c.seed;
  }
  c.output_dir = str_or(doc, "output_dir", "out");
  c.run_tag = str_or(doc, "run_tag", "run");
  if (c.run_tag.empty()) throw Error("run_tag must be nonempty");
  c.threads = num_or(doc, "threads", 0);
  c.oracle_concurrency = num_or(doc, "oracle_concurrency", 4);
  return c;
}

/// Everything cmd_run / cmd_validate need in memory.
struct LoadedDataset {
  Corpus corpus;
  std::vector<QueryRecord> queries;
  Qrels qrels;
  bool have_qrels = false;
  EmbeddingStore docs;
  EmbeddingStore query_embeddings;
  std::map<std::string, ReformulationSet> reformulations;
  EmbeddingStore reformulation_embeddings;
  bool have_reformulation_embeddings = false;
  Warnings warnings;
};

LoadedDataset load_dataset(const ExperimentConfig& config) {
  const DatasetPaths& d = config.dataset;
  LoadedDataset out;
  if (d.corpus.empty()) throw Error("dataset.corpus is required");
  out.corpus = load_corpus(d.corpus);
  if (d.queries.empty()) throw Error("dataset.queries is required");
  out.queries = load_queries(d.queries);

  if (!d.qrels.empty()) {
    QrelsFormat fmt = d.qrels_format == "trec" ? QrelsFormat::trec : QrelsFormat::beir_tsv;
    auto loaded = load_qrels(d.qrels, fmt);
    out.qrels = std::move(loaded.qrels);
    out.have_qrels = true;
    for (auto& w : loaded.warnings.messages) out.warnings.add(std::move(w));
  }

  if (d.doc_embeddings.empty() || d.doc_manifest.empty()) {
    throw Error("dataset.doc_embeddings and dataset.doc_manifest are required");
  }
  out.docs = load_embeddings(d.doc_embeddings, d.doc_manifest);
  if (!out.docs.normalized()) {
    out.warnings.add(d.doc_embeddings + ": rows are not unit-norm; ranking quality "
                     "assumptions may not hold");
  }

  if (!d.query_embeddings.empty() && !d.query_manifest.empty()) {
    out.query_embeddings = load_embeddings(d.query_embeddings, d.query_manifest);
    for (auto& q : out.queries) {
      if (auto row = out.query_embeddings.find(q.id)) {
        auto span = out.query_embeddings.row(*row);
        q.embedding.assign(span.begin(), span.end());
      }
    }
  }

  if (!d.reformulations.empty() && fs::exists(d.reformulations)) {
    auto loaded = load_reformulations(d.reformulations);
    out.reformulations = std::move(loaded.sets);
    for (auto& w : loaded.warnings.messages) out.warnings.add(std::move(w));
  }
  if (!d.reformulation_embeddings.empty() && !d.reformulation_manifest.empty()) {
    out.reformulation_embeddings =
        load_embeddings(d.reformulation_embeddings, d.reformulation_manifest);
    out.have_reformulation_embeddings = true;
  }
  return out;
}

/// Decorator accumulating oracle wall time per query id.
class TimedOracle : public oracle::RelevanceOracle {
 public:
  explicit TimedOracle(std::shared_ptr<oracle::RelevanceOracle> inner)
      : oracle::RelevanceOracle(inner->max_grade()), inner_(std::move(inner)) {}

  std::vector<int> score_batch(const oracle::ScoreRequest& req) override {
    auto t0 = std::chrono::steady_clock::now();
    auto out = inner_->score_batch(req);
    double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::lock_guard<std::mutex> lock(mutex_);
    seconds_[req.query_id] += dt;
    return out;
  }
  std::string kind() const override { return inner_->kind(); }
  std::string model() const override { return inner_->model(); }

  double seconds_for(const std::string& query_id) const {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = seconds_.find(query_id);
    return it == seconds_.end() ? 0.0 : it->second;
  }
  oracle::RelevanceOracle& inner() { return *inner_; }

 private:
  std::shared_ptr<oracle::RelevanceOracle> inner_;
  std::map<std::string, double> seconds_;
  mutable std::mutex mutex_;
};

struct QueryResult {
  std::string query_id;
  RunFile::Ranking ranking;
  std::string trace_jsonl;
  eval::QueryTiming timing;
  bool failed = false;
  std::string error;
};

}  // namespace

ExperimentConfig load_experiment_config(const std::string& path,
                                        const std::vector<std::string>& overrides) {
  json doc = read_json_file(path);
  for (const auto& o : overrides) apply_override(doc, o);
  return materialize(doc);
}

int cmd_validate(const ExperimentConfig& config, std::ostream& out, std::ostream& err) {
  LoadedDataset data;
  try {
    data = load_dataset(config);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }

  std::vector<std::string> errors;
  const DatasetPaths& d = config.dataset;

  if (data.queries.empty()) errors.push_back(d.queries + ": no queries");

  // corpus <-> doc embeddings, both directions
  for (const auto& doc : data.corpus.docs()) {
    if (!data.docs.find(doc.id)) {
      errors.push_back(d.doc_manifest + ": corpus id missing from embeddings: " + doc.id);
    }
  }
  for (const auto& id : data.docs.ids()) {
    if (!data.corpus.contains(id)) {
      errors.push_back(d.doc_manifest + ": embedding id not in corpus: " + id);
    }
  }

  // queries <-> query embeddings
  if (data.query_embeddings.count() > 0) {
    for (const auto& q : data.queries) {
      if (!data.query_embeddings.find(q.id)) {
        errors.push_back(d.query_manifest + ": query id missing from embeddings: " + q.id);
      }
    }
  } else if (!d.query_embeddings.empty()) {
    errors.push_back(d.query_embeddings + ": no query embeddings loaded");
  }

  // qrels ids resolvable
  if (data.have_qrels) {
    std::unordered_set<std::string> query_ids;
    for (const auto& q : data.queries) query_ids.insert(q.id);
    for (const auto& [qid, docs] : data.qrels.all()) {
      if (!query_ids.count(qid)) {
        errors.push_back(d.qrels + ": unknown query id: " + qid);
      }
      for (const auto& [docid, grade] : docs) {
        if (!data.corpus.contains(docid)) {
          errors.push_back(d.qrels + ": unknown doc id: " + docid + " (query " + qid + ")");
        }
      }
    }
  }

  // reformulation embeddings cover the reformulation file
  if (!data.reformulations.empty() && data.have_reformulation_embeddings) {
    for (const auto& [qid, set] : data.reformulations) {
      for (std::size_t i = 0; i < set.texts.size(); ++i) {
        std::string rid = qid + "#r" + std::to_string(i);
        if (!data.reformulation_embeddings.find(rid)) {
          errors.push_back(d.reformulation_manifest + ": missing reformulation embedding: " + rid);
        }
      }
    }
  }

  out << "corpus: " << data.corpus.size() << " documents\n";
  out << "queries: " << data.queries.size() << "\n";
  out << "embeddings: " << data.docs.count() << " x " << data.docs.dim()
      << (data.docs.normalized() ? " (unit-norm)" : " (NOT unit-norm)") << "\n";
  if (data.have_qrels) {
    double relevant_sum = 0.0;
    std::size_t with_qrels = 0;
    for (const auto& q : data.queries) {
      if (data.qrels.has_query(q.id)) {
        relevant_sum += static_cast<double>(data.qrels.relevant_count(q.id));
        ++with_qrels;
      }
    }
    out << "qrels: " << data.qrels.size() << " judgments over " << with_qrels
        << " queries\n";
    if (with_qrels > 0) {
      char buf[32];
      std::snprintf(buf, sizeof(buf), "%.1f", relevant_sum / static_cast<double>(with_qrels));
      out << "mean relevant docs/query: " << buf << "\n";
    }
  }
  if (!data.reformulations.empty()) {
    out << "reformulations: " << data.reformulations.size() << " queries covered\n";
  }
  for (const auto& w : data.warnings.messages) err << "warning: " << w << "\n";
  for (const auto& e : errors) err << "error: " << e << "\n";
  out << (errors.empty() ? "validation OK\n" : "validation FAILED\n");
  return errors.empty() ? 0 : 1;
}

namespace {

QueryResult run_one_query(const ExperimentConfig& config, const LoadedDataset& data,
                          const QueryRecord& query, TimedOracle& oracle) {
  QueryResult result;
  result.query_id = query.id;
  auto t0 = std::chrono::steady_clock::now();

  try {
    if (query.embedding.empty()) {
      throw Error("query " + query.id + " has no embedding");
    }

    // reformulations, when the method wants them
    ReformulationSet refs;
    refs.query_id = query.id;
    bool wants_refs = config.method.kind == "dense_qr" ||
                      ((config.method.kind == "rebol" || config.method.kind == "rebol_topk") &&
                       config.method.session.variant == engine::Variant::qr);
    if (wants_refs) {
      if (auto it = data.reformulations.find(query.id); it != data.reformulations.end()) {
        refs = it->second;
        if (!data.have_reformulation_embeddings) {
          throw Error("reformulations configured without embeddings for query " + query.id);
        }
        Warnings ignored;
        attach_reformulation_embeddings(refs, query.text, data.reformulation_embeddings,
                                        ignored);
      }
    }

    const std::string& kind = config.method.kind;
    if (kind == "rebol" || kind == "rebol_topk") {
      engine::SessionConfig session = config.method.session;
      session.acquisition.rng_seed = derive_seed(config.seed, query.id);
      engine::SessionTrace trace =
          kind == "rebol"
              ? engine::run_session(query, refs, data.docs, oracle, session, &data.corpus)
              : baselines::rebol_topk_ablation(query, refs, data.docs, oracle, session);
      result.ranking = trace.ranking;
      result.trace_jsonl = trace.to_jsonl();
      if (trace.status != "ok") {
        result.failed = true;
        result.error = trace.error;
      }
    } else if (kind == "dense") {
      result.ranking = baselines::dense_rank(query, data.docs, config.method.output_k);
    } else if (kind == "dense_qr") {
      result.ranking = baselines::dense_qr_rank(query, refs, data.docs, config.method.output_k);
    } else if (kind == "dense_mmr") {
      result.ranking = baselines::dense_mmr_rank(query, data.docs, config.method.output_k,
                                                 config.method.baseline.lambda);
    } else if (kind == "pointwise") {
      result.ranking = baselines::pointwise_rerank(
          query, data.docs, oracle, config.method.baseline.k,
          config.method.baseline.batch_size, config.method.output_k, &data.corpus);
    } else {
      throw Error("unknown method kind: " + kind);
    }
  } catch (const std::exception& e) {
    result.failed = true;
    result.error = e.what();
  }

  result.timing.total_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  result.timing.llm_seconds = oracle.seconds_for(query.id);
  return result;
}

}  // namespace

int cmd_run(const ExperimentConfig& config, std::ostream& out, std::ostream& err) {
  LoadedDataset data;
  std::shared_ptr<oracle::RelevanceOracle> base_oracle;
  try {
    data = load_dataset(config);
    oracle::OracleConfig oracle_config = config.oracle;
    oracle_config.concurrency = config.oracle_concurrency;
    base_oracle = oracle::make_oracle(oracle_config, &data.docs,
                                      data.have_qrels ? &data.qrels : nullptr);
    fs::create_directories(config.output_dir);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  for (const auto& w : data.warnings.messages) err << "warning: " << w << "\n";

  TimedOracle oracle(base_oracle);

  // deterministic work order; results merge by query id anyway
  std::vector<const QueryRecord*> queue;
  queue.reserve(data.queries.size());
  for (const auto& q : data.queries) queue.push_back(&q);
  std::sort(queue.begin(), queue.end(),
            [](const QueryRecord* a, const QueryRecord* b) { return a->id < b->id; });

  int threads = config.threads > 0 ? config.threads
                                   : static_cast<int>(std::thread::hardware_concurrency());
  threads = std::clamp(threads, 1, static_cast<int>(std::max<std::size_t>(queue.size(), 1)));

  std::vector<QueryResult> results(queue.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    while (true) {
      std::size_t i = next.fetch_add(1);
      if (i >= queue.size()) break;
      results[i] = run_one_query(config, data, *queue[i], oracle);
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(threads));
  for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  // merge in query-id order (queue is already sorted)
  RunFile run;
  std::string traces;
  json timings = json::object();
  int failures = 0;
  for (const auto& r : results) {
    if (r.failed) {
      ++failures;
      err << "query " << r.query_id << " failed: " << r.error << "\n";
    }
    if (!r.ranking.empty()) run.set(r.query_id, r.ranking);
    traces += r.trace_jsonl;
    timings[r.query_id] = {{"llm", r.timing.llm_seconds},
                           {"total", r.timing.total_seconds}};
  }

  fs::path dir(config.output_dir);
  std::string run_path = (dir / (config.run_tag + ".run")).string();
  try {
    write_trec_run(run, run_path, config.run_tag);
    std::ofstream trace_out(dir / (config.run_tag + ".traces.jsonl"), std::ios::binary);
    trace_out << traces;
    std::ofstream timing_out(dir / (config.run_tag + ".timings.json"), std::ios::binary);
    timing_out << timings.dump(2) << "\n";
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }

  auto oracle_warnings = oracle.inner().warnings();
  for (const auto& w : oracle_warnings.messages) err << "warning: " << w << "\n";
  out << "method " << config.method.kind << ": " << run.query_count() << "/"
      << queue.size() << " queries ranked, " << failures << " failed\n";
  out << "run file: " << run_path << "\n";
  return failures == 0 ? 0 : 1;
}

int cmd_eval(const EvalOptions& options, std::ostream& out, std::ostream& err) {
  if (options.run_paths.empty()) {
    err << "error: no run files given\n";
    return 1;
  }
  Qrels qrels;
  try {
    QrelsFormat fmt =
        options.qrels_format == "trec" ? QrelsFormat::trec : QrelsFormat::beir_tsv;
    qrels = load_qrels(options.qrels_path, fmt).qrels;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }

  std::vector<std::pair<std::string, eval::MetricReport>> rows;
  for (const auto& path : options.run_paths) {
    try {
      RunFile run = load_trec_run(path);

      std::map<std::string, eval::QueryTiming> timings;
      fs::path sidecar(path);
      sidecar.replace_extension(".timings.json");
      if (fs::exists(sidecar)) {
        json j = read_json_file(sidecar.string());
        for (auto& [qid, t] : j.items()) {
          timings[qid] = {t.value("llm", 0.0), t.value("total", 0.0)};
        }
      }

      std::string name = fs::path(path).stem().string();
      rows.emplace_back(name, eval::aggregate(run, qrels, options.recall_ks, {10},
                                              timings,
                                              options.linear_gain
                                                  ? eval::Gain::linear
                                                  : eval::Gain::exponential));
    } catch (const std::exception& e) {
      err << "error: " << path << ": " << e.what() << "\n";
      return 1;
    }
  }

  out << eval::format_report_table(rows);
  for (const auto& [name, report] : rows) {
    if (report.skipped_no_qrels > 0 || report.skipped_no_relevant > 0) {
      err << name << ": skipped " << report.skipped_no_qrels
          << " queries absent from qrels, " << report.skipped_no_relevant
          << " with no relevant docs\n";
    }
  }
  if (!options.json_out.empty()) {
    std::ofstream jf(options.json_out, std::ios::binary);
    jf << eval::report_to_json(rows, options.dataset);
    if (!jf) {
      err << "error: cannot write " << options.json_out << "\n";
      return 1;
    }
  }
  return 0;
}

int cmd_sweep(const std::string& config_path, const std::vector<std::string>& overrides,
              std::ostream& out, std::ostream& err) {
  json doc;
  try {
    doc = read_json_file(config_path);
    for (const auto& o : overrides) apply_override(doc, o);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  auto sweep_it = doc.find("sweep");
  if (sweep_it == doc.end() || !sweep_it->is_object() || sweep_it->empty()) {
    err << "error: config has no sweep section\n";
    return 1;
  }

  std::vector<std::string> keys;
  std::vector<std::vector<json>> values;
  for (auto& [key, list] : sweep_it->items()) {
    if (!list.is_array() || list.empty()) {
      err << "error: sweep." << key << " must be a non-empty array\n";
      return 1;
    }
    keys.push_back(key);
    values.emplace_back(list.begin(), list.end());
  }

  std::string base_tag = str_or(doc, "run_tag", "run");
  json base = doc;
  base.erase("sweep");

  int rc = 0;
  std::vector<std::size_t> cursor(keys.size(), 0);
  while (true) {
    json combo = base;
    std::string tag = base_tag;
    for (std::size_t i = 0; i < keys.size(); ++i) {
      const json& v = values[i][cursor[i]];
      apply_override(combo, keys[i] + "=" + v.dump());
      std::string label = v.is_string() ? v.get<std::string>() : v.dump();
      std::string short_key = keys[i].substr(keys[i].rfind('.') + 1);
      tag += "__" + short_key + "-" + label;
    }
    combo["run_tag"] = tag;
    out << "sweep: " << tag << "\n";
    try {
      rc |= cmd_run(materialize(combo), out, err);
    } catch (const std::exception& e) {
      err << "error: " << tag << ": " << e.what() << "\n";
      rc = 1;
    }

    std::size_t i = 0;
    for (; i < cursor.size(); ++i) {
      if (++cursor[i] < values[i].size()) break;
      cursor[i] = 0;
    }
    if (i == cursor.size()) break;
  }
  return rc;
}

}  // namespace rebol::experiment
