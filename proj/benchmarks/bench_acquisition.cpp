#include <benchmark/benchmark.h>

#include <random>

#include "rebol/acquisition.hpp"

namespace {

using namespace rebol;

EmbeddingStore random_store(int count, int dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> normal(0.f, 1.f);
  std::vector<std::string> ids;
  std::vector<float> data(static_cast<std::size_t>(count) * dim);
  for (int i = 0; i < count; ++i) ids.push_back("d" + std::to_string(i));
  for (auto& v : data) v = normal(rng);
  return EmbeddingStore(std::move(ids), std::move(data), static_cast<std::size_t>(dim));
}

gp::GpPosterior seeded_posterior(const EmbeddingStore& store, int observations) {
  gp::GpPosterior posterior{gp::KernelParams{}};
  std::vector<gp::Observation> batch;
  for (int i = 0; i < observations; ++i) {
    auto row = store.row(static_cast<std::size_t>(i));
    Eigen::VectorXd loc(row.size());
    for (std::size_t j = 0; j < row.size(); ++j) loc[static_cast<Eigen::Index>(j)] = row[j];
    batch.push_back({loc, 2.0, gp::Provenance::oracle, store.id(static_cast<std::size_t>(i))});
  }
  posterior.insert(batch);
  return posterior;
}

void BM_ScoreCandidatesUcb(benchmark::State& state) {
  auto store = random_store(static_cast<int>(state.range(0)), 384, 5);
  auto posterior = seeded_posterior(store, 100);
  acq::AcquisitionConfig config;
  config.kind = acq::Kind::ucb;
  for (auto _ : state) {
    auto cands = acq::score_candidates(posterior, store, {}, config);
    benchmark::DoNotOptimize(cands);
  }
}
BENCHMARK(BM_ScoreCandidatesUcb)->Arg(2000)->Arg(20000);

void BM_SelectMmr(benchmark::State& state) {
  auto store = random_store(static_cast<int>(state.range(0)), 384, 5);
  auto posterior = seeded_posterior(store, 100);
  acq::AcquisitionConfig config;
  config.kind = acq::Kind::greedy;
  config.batch_size = 10;
  config.lambda = 0.7;
  auto cands = acq::score_candidates(posterior, store, {}, config);
  for (auto _ : state) {
    auto picks = acq::select_mmr(cands, store, config);
    benchmark::DoNotOptimize(picks);
  }
}
BENCHMARK(BM_SelectMmr)->Arg(2000)->Arg(20000);

}  // namespace
