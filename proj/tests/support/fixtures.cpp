#include "support/fixtures.hpp"

#include <atomic>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unistd.h>

#include "rebol/common.hpp"

namespace rebol_test {

namespace fs = std::filesystem;

TempDir::TempDir() {
  static std::atomic<unsigned> counter{0};
  auto base = fs::temp_directory_path();
  for (int attempt = 0; attempt < 64; ++attempt) {
    auto candidate = base / ("rebol_test_" + std::to_string(::getpid()) + "_" +
                             std::to_string(counter.fetch_add(1)));
    std::error_code ec;
    if (fs::create_directory(candidate, ec)) {
      path_ = candidate;
      return;
    }
  }
  throw std::runtime_error("could not create temp dir");
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

void write_text(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

namespace {

std::string doc_id_for(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "d%04zu", i);
  return buf;
}

void normalize_in_place(std::vector<float>& v) {
  double sq = 0.0;
  for (float x : v) sq += static_cast<double>(x) * x;
  double norm = std::sqrt(sq);
  if (norm > 0.0) {
    for (float& x : v) x = static_cast<float>(x / norm);
  }
}

}  // namespace

rebol::EmbeddingStore random_store(std::size_t count, std::size_t dim,
                                   std::uint64_t seed, bool normalize) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<std::string> ids;
  std::vector<float> data;
  data.reserve(count * dim);
  for (std::size_t i = 0; i < count; ++i) {
    ids.push_back(doc_id_for(i));
    std::vector<float> row(dim);
    for (auto& x : row) x = static_cast<float>(normal(rng));
    if (normalize) normalize_in_place(row);
    data.insert(data.end(), row.begin(), row.end());
  }
  return rebol::EmbeddingStore(std::move(ids), std::move(data), dim);
}

rebol::EmbeddingStore store_from_rows(const std::vector<std::vector<float>>& rows,
                                      std::vector<std::string> ids) {
  if (ids.empty()) {
    for (std::size_t i = 0; i < rows.size(); ++i) ids.push_back("d" + std::to_string(i));
  }
  std::vector<float> data;
  for (const auto& r : rows) data.insert(data.end(), r.begin(), r.end());
  return rebol::EmbeddingStore(std::move(ids), std::move(data),
                               rows.empty() ? 1 : rows.front().size());
}

std::vector<float> random_unit_vector(std::size_t dim, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<float> v(dim);
  for (auto& x : v) x = static_cast<float>(normal(rng));
  normalize_in_place(v);
  return v;
}

std::vector<float> jitter_around(const std::vector<float>& center, double spread,
                                 std::mt19937_64& rng) {
  std::vector<float> direction = random_unit_vector(center.size(), rng);
  std::vector<float> v(center.size());
  for (std::size_t i = 0; i < center.size(); ++i) {
    v[i] = static_cast<float>(center[i] + spread * direction[i]);
  }
  normalize_in_place(v);
  return v;
}

Eigen::VectorXd to_eigen(const std::vector<float>& v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out[static_cast<Eigen::Index>(i)] = v[i];
  return out;
}

TwoClusterFixture make_two_cluster_fixture(std::uint64_t seed, std::size_t total,
                                           std::size_t dim) {
  std::mt19937_64 rng(rebol::splitmix64(seed));
  TwoClusterFixture fx;

  fx.center_a = random_unit_vector(dim, rng);
  // center B: a controlled small overlap with A (dot 0.15), so the far
  // cluster is invisible to dense top-k but not adversarially hidden
  {
    std::vector<float> ortho = random_unit_vector(dim, rng);
    double along = 0.0;
    for (std::size_t i = 0; i < dim; ++i) along += static_cast<double>(ortho[i]) * fx.center_a[i];
    for (std::size_t i = 0; i < dim; ++i) {
      ortho[i] = static_cast<float>(ortho[i] - along * fx.center_a[i]);
    }
    normalize_in_place(ortho);
    fx.center_b.resize(dim);
    const double overlap = 0.15;
    double rest = std::sqrt(1.0 - overlap * overlap);
    for (std::size_t i = 0; i < dim; ++i) {
      fx.center_b[i] = static_cast<float>(overlap * fx.center_a[i] + rest * ortho[i]);
    }
  }

  std::uniform_real_distribution<double> cluster_spread(0.05, 0.40);
  std::vector<std::vector<float>> rows;
  std::vector<std::string> ids;
  rows.reserve(total);
  for (std::size_t i = 0; i < 20; ++i) {
    rows.push_back(jitter_around(fx.center_a, cluster_spread(rng), rng));
  }
  for (std::size_t i = 0; i < 20; ++i) {
    rows.push_back(jitter_around(fx.center_b, cluster_spread(rng), rng));
  }
  while (rows.size() < total) rows.push_back(random_unit_vector(dim, rng));
  for (std::size_t i = 0; i < total; ++i) ids.push_back(doc_id_for(i));
  for (std::size_t i = 0; i < 40; ++i) fx.cluster_doc_ids.push_back(ids[i]);

  fx.query = jitter_around(fx.center_a, 0.25, rng);
  fx.reformulation = jitter_around(fx.center_b, 0.25, rng);
  fx.store = store_from_rows(rows, std::move(ids));
  return fx;
}

}  // namespace rebol_test
