#include "rebol/acquisition.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace rebol::acq {

Kind kind_from_string(const std::string& s) {
  if (s == "greedy") return Kind::greedy;
  if (s == "ucb") return Kind::ucb;
  if (s == "random") return Kind::random;
  throw Error("unknown acquisition kind: " + s);
}

BatchStrategy strategy_from_string(const std::string& s) {
  if (s == "top_b") return BatchStrategy::top_b;
  if (s == "kriging_believer") return BatchStrategy::kriging_believer;
  if (s == "mmr") return BatchStrategy::mmr;
  throw Error("unknown batch strategy: " + s);
}

const char* to_string(Kind k) {
  switch (k) {
    case Kind::greedy: return "greedy";
    case Kind::ucb: return "ucb";
    case Kind::random: return "random";
  }
  return "?";
}

const char* to_string(BatchStrategy s) {
  switch (s) {
    case BatchStrategy::top_b: return "top_b";
    case BatchStrategy::kriging_believer: return "kriging_believer";
    case BatchStrategy::mmr: return "mmr";
  }
  return "?";
}

void AcquisitionConfig::validate() const {
  if (beta < 0.0 || !std::isfinite(beta)) throw Error("beta must be >= 0");
  if (lambda < 0.0 || lambda > 1.0) throw Error("lambda must be in [0,1]");
  if (batch_size < 1) throw Error("batch_size must be >= 1");
}

CandidateSet score_candidates(const gp::GpPosterior& posterior,
                              const EmbeddingStore& store, const IdSet& excluded,
                              const AcquisitionConfig& config) {
  config.validate();

  CandidateSet cands;
  cands.indices.reserve(store.count());
  for (std::size_t i = 0; i < store.count(); ++i) {
    if (!excluded.count(store.id(i))) cands.indices.push_back(i);
  }
  if (cands.indices.empty()) {
    throw Error("score_candidates: every document is excluded");
  }

  cands.scores.resize(cands.indices.size());
  switch (config.kind) {
    case Kind::greedy: {
      std::vector<double> mean = posterior.predict_mean(store);
      for (std::size_t i = 0; i < cands.indices.size(); ++i) {
        cands.scores[i] = mean[cands.indices[i]];
      }
      break;
    }
    case Kind::ucb: {
      std::vector<double> mean = posterior.predict_mean(store);
      std::vector<double> var = posterior.predict_variance(store);
      double root_beta = std::sqrt(config.beta);
      for (std::size_t i = 0; i < cands.indices.size(); ++i) {
        std::size_t row = cands.indices[i];
        cands.scores[i] = mean[row] + root_beta * std::sqrt(var[row]);
      }
      break;
    }
    case Kind::random: {
      std::mt19937_64 rng(config.rng_seed);
      for (double& s : cands.scores) s = uniform01(rng());
      break;
    }
  }
  return cands;
}

namespace {

/// score desc, then lexicographically smaller doc id
bool better(double score_a, const std::string& id_a, double score_b,
            const std::string& id_b) {
  if (score_a != score_b) return score_a > score_b;
  return id_a < id_b;
}

}  // namespace

std::vector<std::string> select_top_b(const CandidateSet& cands,
                                      const EmbeddingStore& store, int b) {
  if (b < 1) throw Error("select_top_b: B must be >= 1");
  if (cands.indices.empty()) throw Error("select_top_b: empty candidate set");

  std::vector<std::size_t> order(cands.indices.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t c) {
    return better(cands.scores[a], store.id(cands.indices[a]), cands.scores[c],
                  store.id(cands.indices[c]));
  });

  std::size_t take = std::min<std::size_t>(static_cast<std::size_t>(b), order.size());
  std::vector<std::string> out;
  out.reserve(take);
  for (std::size_t i = 0; i < take; ++i) out.push_back(store.id(cands.indices[order[i]]));
  return out;
}

std::vector<std::string> select_kriging_believer(const gp::GpPosterior& posterior,
                                                 const EmbeddingStore& store,
                                                 const IdSet& excluded,
                                                 const AcquisitionConfig& config) {
  config.validate();
  gp::GpPosterior scratch = posterior;  // the real posterior stays untouched
  IdSet taken = excluded;
  std::vector<std::string> out;

  for (int step = 0; step < config.batch_size; ++step) {
    if (taken.size() >= store.count()) break;
    CandidateSet cands = score_candidates(scratch, store, taken, config);

    std::size_t best = 0;
    for (std::size_t i = 1; i < cands.indices.size(); ++i) {
      if (better(cands.scores[i], store.id(cands.indices[i]), cands.scores[best],
                 store.id(cands.indices[best]))) {
        best = i;
      }
    }
    std::size_t row = cands.indices[best];
    const std::string& id = store.id(row);
    out.push_back(id);
    taken.insert(id);

    if (step + 1 == config.batch_size) break;  // last pick needs no hallucination

    auto emb = store.row(row);
    Eigen::VectorXd loc(emb.size());
    for (std::size_t j = 0; j < emb.size(); ++j) loc[static_cast<Eigen::Index>(j)] = emb[j];
    double mu = scratch.predict_mean_at(loc);
    gp::Observation halluc{loc, std::clamp(mu, 0.0, scratch.value_bound()),
                           gp::Provenance::oracle, id};
    scratch.insert({halluc});
  }
  return out;
}

std::vector<std::string> select_mmr(const CandidateSet& cands,
                                    const EmbeddingStore& store,
                                    const AcquisitionConfig& config) {
  config.validate();
  if (cands.indices.empty()) throw Error("select_mmr: empty candidate set");

  const std::size_t n = cands.indices.size();
  const double lambda = config.lambda;
  std::vector<bool> picked(n, false);
  // Running max cosine similarity to the selected set, per candidate.
  // Initialized to -inf but always refreshed before it is read (every
  // remaining candidate is updated after each pick).
  std::vector<double> max_sim(n, -std::numeric_limits<double>::infinity());
  std::vector<std::string> out;

  std::size_t take = std::min<std::size_t>(static_cast<std::size_t>(config.batch_size), n);
  for (std::size_t pick = 0; pick < take; ++pick) {
    std::size_t best = n;
    double best_objective = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (picked[i]) continue;
      // lambda == 1 must reduce to the raw score exactly (0 * -inf is NaN)
      double penalty = (pick == 0 || lambda == 1.0) ? 0.0 : (1.0 - lambda) * max_sim[i];
      double objective = pick == 0 ? cands.scores[i] : lambda * cands.scores[i] - penalty;
      if (best == n || better(objective, store.id(cands.indices[i]), best_objective,
                              store.id(cands.indices[best]))) {
        best = i;
        best_objective = objective;
      }
    }
    picked[best] = true;
    out.push_back(store.id(cands.indices[best]));

    if (pick + 1 < take) {
      auto chosen = store.row(cands.indices[best]);
      for (std::size_t i = 0; i < n; ++i) {
        if (picked[i]) continue;
        max_sim[i] = std::max(max_sim[i], cosine(store.row(cands.indices[i]), chosen));
      }
    }
  }
  return out;
}

std::vector<std::string> select_batch(const gp::GpPosterior& posterior,
                                      const EmbeddingStore& store,
                                      const IdSet& excluded,
                                      const AcquisitionConfig& config) {
  switch (config.batch_strategy) {
    case BatchStrategy::kriging_believer:
      return select_kriging_believer(posterior, store, excluded, config);
    case BatchStrategy::mmr: {
      CandidateSet cands = score_candidates(posterior, store, excluded, config);
      return select_mmr(cands, store, config);
    }
    case BatchStrategy::top_b: {
      CandidateSet cands = score_candidates(posterior, store, excluded, config);
      return select_top_b(cands, store, config.batch_size);
    }
  }
  throw Error("unreachable batch strategy");
}

}  // namespace rebol::acq
