#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "rebol/corpus.hpp"
#include "rebol/embedding.hpp"

namespace rebol_test {

/// Unique scratch directory, removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

void write_text(const std::string& path, const std::string& content);
std::string read_text(const std::string& path);

/// Store with ids d0000..d{n-1}, rows drawn i.i.d. standard normal and
/// optionally normalized to unit length.
rebol::EmbeddingStore random_store(std::size_t count, std::size_t dim,
                                   std::uint64_t seed, bool normalize = true);

/// Store built from explicit rows; ids supplied or defaulted to d<i>.
rebol::EmbeddingStore store_from_rows(const std::vector<std::vector<float>>& rows,
                                      std::vector<std::string> ids = {});

std::vector<float> random_unit_vector(std::size_t dim, std::mt19937_64& rng);

/// Unit vector near `center`: normalize(center + spread * gaussian).
std::vector<float> jitter_around(const std::vector<float>& center, double spread,
                                 std::mt19937_64& rng);

Eigen::VectorXd to_eigen(const std::vector<float>& v);

/// The two-cluster landscape used by the recall experiments: `total` unit
/// vectors in R^dim, the first 20 around center_a, the next 20 around
/// center_b, the rest random; query placed inside cluster A.
struct TwoClusterFixture {
  rebol::EmbeddingStore store;
  std::vector<float> query;          // inside cluster A
  std::vector<float> reformulation;  // inside cluster B
  std::vector<float> center_a;
  std::vector<float> center_b;
  std::vector<std::string> cluster_doc_ids;  // the 40 relevant docs
};

TwoClusterFixture make_two_cluster_fixture(std::uint64_t seed, std::size_t total = 2000,
                                           std::size_t dim = 32);

}  // namespace rebol_test
