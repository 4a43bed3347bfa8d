#include "rebol/engine.hpp"

#include <algorithm>
#include <chrono>

#include <json.hpp>

namespace rebol::engine {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

Eigen::VectorXd to_vector(std::span<const float> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out[static_cast<Eigen::Index>(i)] = v[i];
  return out;
}

}  // namespace

Variant variant_from_string(const std::string& s) {
  if (s == "IQ" || s == "iq") return Variant::iq;
  if (s == "QR" || s == "qr") return Variant::qr;
  throw Error("unknown variant: " + s);
}

const char* to_string(Variant v) { return v == Variant::iq ? "IQ" : "QR"; }

void SessionConfig::validate() const {
  if (budget < 0) throw Error("budget must be >= 0");
  if (batch_size < 1) throw Error("batch_size must be >= 1");
  if (s_max < 1) throw Error("s_max must be >= 1");
  if (output_k < 1) throw Error("output_k must be >= 1");
  acquisition.validate();
  kernel.validate();
}

std::size_t SessionTrace::observed_count() const {
  std::size_t n = 0;
  for (const auto& b : batches) n += b.doc_ids.size();
  return n;
}

std::string SessionTrace::to_jsonl() const {
  std::string out;
  json start = {{"event", "session_start"}, {"query_id", query_id}};
  out += start.dump() + "\n";
  for (const auto& b : batches) {
    json jb = {{"event", "batch"},
               {"query_id", query_id},
               {"step", b.step},
               {"acquisition", b.acquisition_kind},
               {"doc_ids", b.doc_ids},
               {"grades", b.grades}};
    out += jb.dump() + "\n";
  }
  if (!ranking.empty()) {
    json jr = {{"event", "ranking"}, {"query_id", query_id}};
    json list = json::array();
    for (const auto& [id, score] : ranking) list.push_back(json::array({id, score}));
    jr["ranking"] = std::move(list);
    out += jr.dump() + "\n";
  }
  json end = {{"event", "session_end"},
              {"query_id", query_id},
              {"status", status},
              {"observed", observed_count()}};
  if (!error.empty()) end["error"] = error;
  out += end.dump() + "\n";
  return out;
}

gp::GpPosterior seed_posterior(const QueryRecord& query, const ReformulationSet& refs,
                               const SessionConfig& config) {
  config.validate();
  if (query.embedding.empty()) {
    throw Error("query " + query.id + " has no embedding");
  }

  gp::GpPosterior posterior(config.kernel, static_cast<double>(config.s_max));
  std::vector<gp::Observation> seeds;
  seeds.push_back({to_vector(query.embedding), static_cast<double>(config.s_max),
                   gp::Provenance::initial_query, ""});
  if (config.variant == Variant::qr) {
    if (refs.embeddings.size() != refs.texts.size()) {
      throw Error("reformulations for query " + query.id + " have no embeddings attached");
    }
    for (const auto& emb : refs.embeddings) {
      seeds.push_back({to_vector(std::span<const float>(emb.data(), emb.size())),
                       static_cast<double>(config.s_max), gp::Provenance::reformulation,
                       ""});
    }
  }
  posterior.insert(seeds);
  return posterior;
}

namespace {

/// Shared loop body: `next_batch` yields the doc ids to observe next.
template <typename NextBatch>
SessionTrace run_loop(const QueryRecord& query, const ReformulationSet& refs,
                      const EmbeddingStore& store, oracle::RelevanceOracle& oracle,
                      const SessionConfig& config, const Corpus* corpus,
                      const char* acquisition_label, NextBatch&& next_batch) {
  auto session_start = Clock::now();
  SessionTrace trace;
  trace.query_id = query.id;

  gp::GpPosterior posterior = seed_posterior(query, refs, config);
  acq::IdSet observed;
  int remaining = std::min<int>(config.budget, static_cast<int>(store.count()));
  int step = 0;

  while (remaining > 0 && observed.size() < store.count()) {
    BatchRecord record;
    record.step = step;
    record.acquisition_kind = acquisition_label;

    int want = std::min(config.batch_size, remaining);
    auto t0 = Clock::now();
    std::vector<std::string> ids = next_batch(posterior, observed, want);
    record.acquire_seconds = seconds_since(t0);
    if (ids.empty()) break;  // nothing eligible left to observe

    oracle::ScoreRequest req;
    req.query_id = query.id;
    req.query_text = query.text;
    for (const auto& id : ids) {
      oracle::ScoreDoc doc;
      doc.doc_id = id;
      if (corpus && corpus->contains(id)) {
        const Document& d = corpus->at(id);
        doc.title = d.title;
        doc.text = d.text;
      }
      req.docs.push_back(std::move(doc));
    }

    std::vector<int> grades;
    auto t1 = Clock::now();
    try {
      grades = oracle.score_batch(req);
    } catch (const std::exception& e) {
      record.oracle_seconds = seconds_since(t1);
      trace.batches.push_back(std::move(record));
      trace.status = "failed";
      trace.error = e.what();
      trace.total_seconds = seconds_since(session_start);
      return trace;
    }
    record.oracle_seconds = seconds_since(t1);
    trace.oracle_seconds += record.oracle_seconds;

    auto t2 = Clock::now();
    std::vector<gp::Observation> batch;
    batch.reserve(ids.size());
    for (std::size_t i = 0; i < ids.size(); ++i) {
      auto row = store.find(ids[i]);
      if (!row) throw Error("selected doc id not in store: " + ids[i]);
      double value = std::clamp(static_cast<double>(grades[i]), 0.0,
                                static_cast<double>(config.s_max));
      batch.push_back({to_vector(store.row(*row)), value, gp::Provenance::oracle, ids[i]});
    }
    posterior.insert(batch);
    record.insert_seconds = seconds_since(t2);

    record.doc_ids = ids;
    record.grades = grades;
    trace.batches.push_back(std::move(record));
    for (const auto& id : ids) observed.insert(id);
    remaining -= static_cast<int>(ids.size());
    ++step;
  }

  trace.ranking = rank(posterior, store, config.output_k);
  trace.total_seconds = seconds_since(session_start);
  return trace;
}

}  // namespace

SessionTrace run_session(const QueryRecord& query, const ReformulationSet& refs,
                         const EmbeddingStore& store,
                         oracle::RelevanceOracle& oracle, const SessionConfig& config,
                         const Corpus* corpus) {
  return run_loop(query, refs, store, oracle, config, corpus,
                  acq::to_string(config.acquisition.kind),
                  [&](const gp::GpPosterior& posterior, const acq::IdSet& observed,
                      int want) {
                    acq::AcquisitionConfig acq_config = config.acquisition;
                    acq_config.batch_size = want;
                    return acq::select_batch(posterior, store, observed, acq_config);
                  });
}

SessionTrace run_session_fixed_order(const QueryRecord& query,
                                     const ReformulationSet& refs,
                                     const EmbeddingStore& store,
                                     oracle::RelevanceOracle& oracle,
                                     const SessionConfig& config,
                                     const std::vector<std::string>& order) {
  std::size_t cursor = 0;
  return run_loop(query, refs, store, oracle, config, nullptr, "fixed",
                  [&](const gp::GpPosterior&, const acq::IdSet& observed, int want) {
                    std::vector<std::string> ids;
                    while (static_cast<int>(ids.size()) < want && cursor < order.size()) {
                      const std::string& id = order[cursor++];
                      if (!observed.count(id)) ids.push_back(id);
                    }
                    return ids;
                  });
}

std::vector<std::pair<std::string, double>> rank(const gp::GpPosterior& posterior,
                                                 const EmbeddingStore& store, int k) {
  if (k < 1) throw Error("rank: k must be >= 1");
  std::vector<double> mean = posterior.predict_mean(store);

  std::vector<std::size_t> order(store.count());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  auto cmp = [&](std::size_t a, std::size_t b) {
    if (mean[a] != mean[b]) return mean[a] > mean[b];
    return store.id(a) < store.id(b);
  };
  std::size_t take = std::min<std::size_t>(static_cast<std::size_t>(k), order.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(take),
                    order.end(), cmp);

  std::vector<std::pair<std::string, double>> out;
  out.reserve(take);
  for (std::size_t i = 0; i < take; ++i) out.emplace_back(store.id(order[i]), mean[order[i]]);
  return out;
}

}  // namespace rebol::engine
