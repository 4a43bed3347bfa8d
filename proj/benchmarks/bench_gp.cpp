#include <benchmark/benchmark.h>

#include <random>

#include "rebol/gp.hpp"

namespace {

using rebol::gp::GpPosterior;
using rebol::gp::KernelParams;
using rebol::gp::Observation;
using rebol::gp::Provenance;

std::vector<Observation> random_observations(int count, int dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<Observation> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    Eigen::VectorXd loc(dim);
    for (int j = 0; j < dim; ++j) loc[j] = normal(rng);
    out.push_back({loc, 1.5, Provenance::oracle, "d" + std::to_string(i)});
  }
  return out;
}

void BM_InsertBatches(benchmark::State& state) {
  const int total = static_cast<int>(state.range(0));
  const int batch = 10;
  auto obs = random_observations(total, 384, 7);
  for (auto _ : state) {
    GpPosterior posterior{KernelParams{}};
    for (int at = 0; at < total; at += batch) {
      std::vector<Observation> slice(obs.begin() + at,
                                     obs.begin() + std::min(at + batch, total));
      posterior.insert(slice);
    }
    benchmark::DoNotOptimize(posterior.cholesky_factor());
  }
}
BENCHMARK(BM_InsertBatches)->Arg(50)->Arg(100)->Arg(200);

void BM_PredictMeanCorpus(benchmark::State& state) {
  const int corpus_size = static_cast<int>(state.range(0));
  const int dim = 384;
  GpPosterior posterior{KernelParams{}};
  posterior.insert(random_observations(105, dim, 3));

  std::mt19937_64 rng(11);
  std::normal_distribution<float> normal(0.f, 1.f);
  std::vector<std::string> ids;
  std::vector<float> data(static_cast<std::size_t>(corpus_size) * dim);
  for (int i = 0; i < corpus_size; ++i) ids.push_back("d" + std::to_string(i));
  for (auto& v : data) v = normal(rng);
  rebol::EmbeddingStore store(std::move(ids), std::move(data), dim);

  for (auto _ : state) {
    auto mean = posterior.predict_mean(store);
    benchmark::DoNotOptimize(mean);
  }
}
BENCHMARK(BM_PredictMeanCorpus)->Arg(2000)->Arg(20000);

}  // namespace
