#include <doctest.h>

#include <cmath>
#include <random>

#include "rebol/acquisition.hpp"
#include "support/fixtures.hpp"
#include "support/naive_gp.hpp"

using namespace rebol;
using namespace rebol::acq;
using rebol_test::random_store;
using rebol_test::store_from_rows;
using rebol_test::to_eigen;

namespace {

gp::GpPosterior posterior_with(const std::vector<std::pair<std::vector<float>, double>>& obs,
                               gp::KernelParams params = {}) {
  gp::GpPosterior posterior{params};
  std::vector<gp::Observation> batch;
  int i = 0;
  for (const auto& [loc, value] : obs) {
    batch.push_back({to_eigen(loc), value, gp::Provenance::oracle, "obs" + std::to_string(i++)});
  }
  posterior.insert(batch);
  return posterior;
}

AcquisitionConfig config_of(Kind kind, int batch_size = 5, double beta = 1.0,
                            double lambda = 0.7, std::uint64_t seed = 0) {
  AcquisitionConfig c;
  c.kind = kind;
  c.batch_size = batch_size;
  c.beta = beta;
  c.lambda = lambda;
  c.rng_seed = seed;
  return c;
}

}  // namespace

TEST_SUITE("acquisition") {

TEST_CASE("ucb with zero beta scores exactly like greedy") {
  auto store = random_store(50, 8, 21);
  auto posterior = posterior_with({{std::vector<float>(store.row(0).begin(),
                                                       store.row(0).end()), 3.0}});
  auto greedy = score_candidates(posterior, store, {}, config_of(Kind::greedy));
  auto ucb0 = score_candidates(posterior, store, {}, config_of(Kind::ucb, 5, 0.0));
  REQUIRE(greedy.size() == ucb0.size());
  for (std::size_t i = 0; i < greedy.size(); ++i) {
    CHECK(greedy.scores[i] == ucb0.scores[i]);
  }
}

TEST_CASE("single seed observation: greedy 1.5 and ucb 1.5 + sqrt(0.5) on the seed doc") {
  std::vector<float> seed_doc = {1.f, 0.f, 0.f};
  auto store = store_from_rows({seed_doc, {0.f, 1.f, 0.f}}, {"match", "other"});
  auto posterior = posterior_with({{seed_doc, 3.0}});

  auto greedy = score_candidates(posterior, store, {}, config_of(Kind::greedy));
  CHECK(std::abs(greedy.scores[0] - 1.5) < 1e-12);

  auto ucb = score_candidates(posterior, store, {}, config_of(Kind::ucb, 5, 1.0));
  CHECK(std::abs(ucb.scores[0] - (1.5 + std::sqrt(0.5))) < 1e-12);
}

TEST_CASE("random scores are deterministic in the seed") {
  auto store = random_store(30, 4, 22);
  gp::GpPosterior posterior{gp::KernelParams{}};
  auto a = score_candidates(posterior, store, {}, config_of(Kind::random, 5, 1.0, 0.7, 99));
  auto b = score_candidates(posterior, store, {}, config_of(Kind::random, 5, 1.0, 0.7, 99));
  CHECK(a.scores == b.scores);
  auto c = score_candidates(posterior, store, {}, config_of(Kind::random, 5, 1.0, 0.7, 100));
  CHECK(a.scores != c.scores);
  for (double s : a.scores) {
    CHECK(s >= 0.0);
    CHECK(s < 1.0);
  }
}

TEST_CASE("excluded docs never appear; excluding everything throws") {
  auto store = random_store(10, 4, 23);
  gp::GpPosterior posterior{gp::KernelParams{}};
  IdSet excluded;
  for (std::size_t i = 0; i < 9; ++i) excluded.insert(store.id(i));
  auto cands = score_candidates(posterior, store, excluded, config_of(Kind::greedy));
  REQUIRE(cands.size() == 1);
  CHECK(store.id(cands.indices[0]) == store.id(9));

  excluded.insert(store.id(9));
  CHECK_THROWS_AS(score_candidates(posterior, store, excluded, config_of(Kind::greedy)),
                  Error);
}

TEST_CASE("select_top_b ordering, ties and short pools") {
  auto store = store_from_rows({{1.f, 0.f}, {0.f, 1.f}, {.5f, .5f}}, {"d1", "d2", "d3"});
  CandidateSet cands;
  cands.indices = {0, 1, 2};

  SUBCASE("descending scores") {
    cands.scores = {0.9, 0.8, 0.7};
    CHECK(select_top_b(cands, store, 2) == std::vector<std::string>{"d1", "d2"});
  }
  SUBCASE("tie broken by smaller doc id") {
    cands.scores = {0.5, 0.5, 0.1};
    CHECK(select_top_b(cands, store, 1) == std::vector<std::string>{"d1"});
  }
  SUBCASE("pool smaller than B returns everything") {
    cands.scores = {0.9, 0.8, 0.7};
    CHECK(select_top_b(cands, store, 5).size() == 3);
  }
  SUBCASE("empty candidate set throws") {
    CandidateSet empty;
    CHECK_THROWS_AS(select_top_b(empty, store, 1), Error);
  }
}

TEST_CASE("select_mmr hand fixture picks the diverse doc") {
  // unit vectors with cosines S(d1,d2)=0.95, S(d1,d3)=0.1, S(d2,d3)=0.2
  float y2 = std::sqrt(1.f - 0.95f * 0.95f);
  float y3 = (0.2f - 0.1f * 0.95f) / y2;
  float z3 = std::sqrt(1.f - 0.1f * 0.1f - y3 * y3);
  auto store = store_from_rows({{1.f, 0.f, 0.f}, {0.95f, y2, 0.f}, {0.1f, y3, z3}},
                               {"d1", "d2", "d3"});
  CandidateSet cands;
  cands.indices = {0, 1, 2};
  cands.scores = {0.9, 0.8, 0.7};

  // lambda 0.5: d2 objective 0.5*0.8-0.5*0.95 = -0.075, d3 0.35-0.05 = 0.30
  auto picks = select_mmr(cands, store, config_of(Kind::greedy, 2, 1.0, 0.5));
  CHECK(picks == std::vector<std::string>{"d1", "d3"});

  SUBCASE("B=1 is just the argmax") {
    auto one = select_mmr(cands, store, config_of(Kind::greedy, 1, 1.0, 0.0));
    CHECK(one == std::vector<std::string>{"d1"});
  }
}

TEST_CASE("select_mmr with lambda 1 equals select_top_b on random fixtures") {
  std::mt19937_64 rng(24);
  for (int round = 0; round < 20; ++round) {
    auto store = random_store(40, 6, rng());
    CandidateSet cands;
    std::uniform_real_distribution<double> score(-1.0, 3.0);
    for (std::size_t i = 0; i < store.count(); ++i) {
      cands.indices.push_back(i);
      cands.scores.push_back(score(rng));
    }
    auto mmr = select_mmr(cands, store, config_of(Kind::greedy, 10, 1.0, 1.0));
    auto top = select_top_b(cands, store, 10);
    CHECK(mmr == top);
  }
}

TEST_CASE("ucb dominates greedy pointwise when beta > 0") {
  auto store = random_store(60, 8, 25);
  auto posterior = posterior_with(
      {{std::vector<float>(store.row(0).begin(), store.row(0).end()), 2.0},
       {std::vector<float>(store.row(1).begin(), store.row(1).end()), 1.0}});
  auto greedy = score_candidates(posterior, store, {}, config_of(Kind::greedy));
  auto ucb = score_candidates(posterior, store, {}, config_of(Kind::ucb, 5, 2.0));
  for (std::size_t i = 0; i < greedy.size(); ++i) {
    CHECK(ucb.scores[i] >= greedy.scores[i]);
  }
}

TEST_CASE("kriging believer with B=1 equals top-B with B=1") {
  std::mt19937_64 rng(26);
  for (int round = 0; round < 10; ++round) {
    auto store = random_store(30, 5, rng());
    auto posterior = posterior_with(
        {{std::vector<float>(store.row(static_cast<std::size_t>(round)).begin(),
                             store.row(static_cast<std::size_t>(round)).end()), 3.0}});
    auto config = config_of(Kind::ucb, 1);
    auto kb = select_kriging_believer(posterior, store, {}, config);
    auto cands = score_candidates(posterior, store, {}, config);
    auto top = select_top_b(cands, store, 1);
    CHECK(kb == top);
  }
}

TEST_CASE("kriging believer equals top-B greedy on an orthogonal fixture") {
  // orthogonal, mutually distant docs: hallucinating at the posterior mean
  // leaves every other mean unchanged, so greedy KB degenerates to top-B
  std::vector<std::vector<float>> rows;
  const std::size_t dim = 8;
  for (std::size_t i = 0; i < dim; ++i) {
    std::vector<float> row(dim, 0.f);
    row[i] = 1.f;
    rows.push_back(row);
  }
  auto store = store_from_rows(rows);
  auto posterior = posterior_with({{rows[0], 3.0}, {rows[1], 2.0}});

  auto config = config_of(Kind::greedy, 4);
  auto kb = select_kriging_believer(posterior, store, {}, config);
  auto top = select_top_b(score_candidates(posterior, store, {}, config), store, 4);
  CHECK(kb == top);
}

TEST_CASE("kriging believer ucb avoids the near-duplicate, takes the distant doc") {
  // Two near-duplicates at squared distance 1.6 from the seed and one
  // orthogonal doc. With low observation noise the first pick pins the
  // duplicate region (sigma collapses to ~0.1), so UCB turns to the
  // distant doc; top-B would take both duplicates.
  std::vector<float> seed = {1.f, 0.f, 0.f, 0.f};
  std::vector<float> dup_a = {0.2f, 0.9798f, 0.f, 0.f};
  std::vector<float> dup_b = {0.2f, 0.9798f, 0.001f, 0.f};
  std::vector<float> distant = {0.f, 0.f, 0.f, 1.f};
  auto store = store_from_rows({dup_a, dup_b, distant}, {"dupA", "dupB", "far"});
  gp::KernelParams params;
  params.noise_variance = 0.01;
  auto posterior = posterior_with({{seed, 3.0}}, params);

  auto config = config_of(Kind::ucb, 2, 1.0);
  auto kb = select_kriging_believer(posterior, store, {}, config);
  REQUIRE(kb.size() == 2);
  CHECK(kb[0] == "dupA");
  CHECK(kb[1] == "far");

  // top-B by contrast takes both duplicates
  auto top = select_top_b(score_candidates(posterior, store, {}, config), store, 2);
  CHECK(top == std::vector<std::string>{"dupA", "dupB"});

  // and the full-refactorization reference agrees
  rebol_test::NaiveGp naive{params};
  naive.add(to_eigen(seed), 3.0);
  CHECK(rebol_test::naive_kriging_believer(naive, store, {}, config, 3.0) == kb);
}

TEST_CASE("kriging believer matches the full-refactorization reference") {
  std::mt19937_64 rng(27);
  for (int round = 0; round < 6; ++round) {
    auto store = random_store(20, 6, rng());
    gp::KernelParams params;
    auto seed_row = std::vector<float>(store.row(0).begin(), store.row(0).end());
    auto posterior = posterior_with({{seed_row, 3.0}}, params);
    rebol_test::NaiveGp naive{params};
    naive.add(to_eigen(seed_row), 3.0);

    for (Kind kind : {Kind::greedy, Kind::ucb}) {
      for (int b : {2, 3, 5}) {
        auto config = config_of(kind, b, 1.0);
        IdSet excluded = {store.id(0)};
        auto fast = select_kriging_believer(posterior, store, excluded, config);
        auto slow = rebol_test::naive_kriging_believer(naive, store, excluded, config, 3.0);
        CHECK(fast == slow);
      }
    }
  }
}

TEST_CASE("selectors are deterministic given identical inputs") {
  auto store = random_store(40, 6, 28);
  auto posterior = posterior_with(
      {{std::vector<float>(store.row(3).begin(), store.row(3).end()), 3.0}});
  for (auto strategy : {BatchStrategy::top_b, BatchStrategy::mmr,
                        BatchStrategy::kriging_believer}) {
    auto config = config_of(Kind::ucb, 5);
    config.batch_strategy = strategy;
    auto first = select_batch(posterior, store, {}, config);
    auto second = select_batch(posterior, store, {}, config);
    CHECK(first == second);
    CHECK(first.size() == 5);
  }
}

TEST_CASE("config validation") {
  AcquisitionConfig config;
  config.beta = -0.5;
  CHECK_THROWS_AS(config.validate(), Error);
  config.beta = 1.0;
  config.lambda = 1.5;
  CHECK_THROWS_AS(config.validate(), Error);
  config.lambda = 0.5;
  config.batch_size = 0;
  CHECK_THROWS_AS(config.validate(), Error);
}

}  // TEST_SUITE
