#include "rebol/baselines.hpp"

#include <algorithm>
#include <cmath>

namespace rebol::baselines {

void BaselineConfig::validate() const {
  if (k < 1) throw Error("baseline k must be >= 1");
  if (lambda < 0.0 || lambda > 1.0) throw Error("lambda must be in [0,1]");
  if (batch_size < 1) throw Error("batch_size must be >= 1");
}

namespace {

Ranking top_k_by_score(const EmbeddingStore& store, const std::vector<double>& scores,
                       int k) {
  std::vector<std::size_t> order(store.count());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  auto cmp = [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return store.id(a) < store.id(b);
  };
  std::size_t take = std::min<std::size_t>(static_cast<std::size_t>(k), order.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(take),
                    order.end(), cmp);
  Ranking out;
  out.reserve(take);
  for (std::size_t i = 0; i < take; ++i) out.emplace_back(store.id(order[i]), scores[order[i]]);
  return out;
}

std::vector<double> dot_scores(std::span<const float> query, const EmbeddingStore& store) {
  std::vector<double> scores(store.count());
  for (std::size_t i = 0; i < store.count(); ++i) scores[i] = dot(query, store.row(i));
  return scores;
}

}  // namespace

Ranking dense_rank(const QueryRecord& query, const EmbeddingStore& store, int k) {
  if (k < 1) throw Error("dense_rank: k must be >= 1");
  if (query.embedding.size() != store.dim()) {
    throw Error("dense_rank: query dim " + std::to_string(query.embedding.size()) +
                " does not match store dim " + std::to_string(store.dim()));
  }
  return top_k_by_score(store, dot_scores(query.embedding, store), k);
}

Ranking dense_qr_rank(const QueryRecord& query, const ReformulationSet& refs,
                      const EmbeddingStore& store, int k) {
  if (k < 1) throw Error("dense_qr_rank: k must be >= 1");
  std::vector<double> mean_scores = dot_scores(query.embedding, store);
  for (const auto& emb : refs.embeddings) {
    std::vector<double> s = dot_scores(std::span<const float>(emb.data(), emb.size()), store);
    for (std::size_t i = 0; i < s.size(); ++i) mean_scores[i] += s[i];
  }
  double denom = 1.0 + static_cast<double>(refs.embeddings.size());
  for (double& s : mean_scores) s /= denom;
  return top_k_by_score(store, mean_scores, k);
}

Ranking dense_mmr_rank(const QueryRecord& query, const EmbeddingStore& store, int k,
                       double lambda) {
  if (k < 1) throw Error("dense_mmr_rank: k must be >= 1");
  if (lambda < 0.0 || lambda > 1.0) throw Error("lambda must be in [0,1]");

  std::vector<double> scores = dot_scores(query.embedding, store);
  acq::CandidateSet cands;
  cands.indices.resize(store.count());
  for (std::size_t i = 0; i < store.count(); ++i) cands.indices[i] = i;
  cands.scores = std::move(scores);

  acq::AcquisitionConfig config;
  config.lambda = lambda;
  config.batch_size = k;
  std::vector<std::string> ids = acq::select_mmr(cands, store, config);

  Ranking out;
  out.reserve(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    out.emplace_back(ids[i], 1.0 / static_cast<double>(i + 1));
  }
  return out;
}

Ranking pointwise_rerank(const QueryRecord& query, const EmbeddingStore& store,
                         oracle::RelevanceOracle& oracle, int k, int batch_size,
                         int out_k, const Corpus* corpus) {
  if (k < 1) throw Error("pointwise_rerank: k must be >= 1");
  if (batch_size < 1) throw Error("pointwise_rerank: batch_size must be >= 1");

  Ranking dense = dense_rank(query, store, static_cast<int>(store.count()));
  std::size_t head = std::min<std::size_t>(static_cast<std::size_t>(k), dense.size());

  // grade the head in ceil(head/B) batches
  std::vector<int> grades(head, 0);
  for (std::size_t begin = 0; begin < head; begin += static_cast<std::size_t>(batch_size)) {
    std::size_t end = std::min(head, begin + static_cast<std::size_t>(batch_size));
    oracle::ScoreRequest req;
    req.query_id = query.id;
    req.query_text = query.text;
    for (std::size_t i = begin; i < end; ++i) {
      oracle::ScoreDoc doc;
      doc.doc_id = dense[i].first;
      if (corpus && corpus->contains(doc.doc_id)) {
        const Document& d = corpus->at(doc.doc_id);
        doc.title = d.title;
        doc.text = d.text;
      }
      req.docs.push_back(std::move(doc));
    }
    std::vector<int> batch = oracle.score_batch(req);
    for (std::size_t i = begin; i < end; ++i) grades[i] = batch[i - begin];
  }

  // head by descending grade, ties keep dense order; tail keeps dense order
  std::vector<std::size_t> order(head);
  for (std::size_t i = 0; i < head; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return grades[a] > grades[b]; });

  std::size_t total = out_k > 0 ? std::min<std::size_t>(static_cast<std::size_t>(out_k),
                                                        dense.size())
                                : dense.size();
  Ranking out;
  out.reserve(total);
  for (std::size_t i = 0; i < head && out.size() < total; ++i) {
    out.emplace_back(dense[order[i]].first, 1.0 / static_cast<double>(out.size() + 1));
  }
  for (std::size_t i = head; i < dense.size() && out.size() < total; ++i) {
    out.emplace_back(dense[i].first, 1.0 / static_cast<double>(out.size() + 1));
  }
  return out;
}

engine::SessionTrace rebol_topk_ablation(const QueryRecord& query,
                                         const ReformulationSet& refs,
                                         const EmbeddingStore& store,
                                         oracle::RelevanceOracle& oracle,
                                         const engine::SessionConfig& config) {
  int depth = std::min<int>(config.budget, static_cast<int>(store.count()));
  Ranking dense = dense_rank(query, store, std::max(depth, 1));
  std::vector<std::string> order;
  order.reserve(dense.size());
  for (const auto& [id, score] : dense) order.push_back(id);
  return engine::run_session_fixed_order(query, refs, store, oracle, config, order);
}

}  // namespace rebol::baselines
