#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "rebol/common.hpp"

namespace rebol {

/// Row-major matrix of document (or query) embeddings plus their ids.
/// Immutable after construction; safe for concurrent reads.
class EmbeddingStore {
 public:
  EmbeddingStore() = default;
  EmbeddingStore(std::vector<std::string> ids, std::vector<float> data,
                 std::size_t dim);

  std::size_t count() const { return ids_.size(); }
  std::size_t dim() const { return dim_; }
  bool normalized() const { return normalized_; }
  const std::vector<std::string>& ids() const { return ids_; }
  const std::string& id(std::size_t row) const { return ids_[row]; }
  std::span<const float> row(std::size_t i) const {
    return {data_.data() + i * dim_, dim_};
  }
  const std::vector<float>& data() const { return data_; }
  double row_norm(std::size_t i) const { return norms_[i]; }
  std::optional<std::size_t> find(const std::string& id) const;

 private:
  std::vector<std::string> ids_;
  std::vector<float> data_;  // count × dim, row-major
  std::size_t dim_ = 0;
  std::vector<double> norms_;
  bool normalized_ = false;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Binary layout: magic `EMB1`, little-endian u32 count, little-endian
/// u32 dim, then count×dim IEEE-754 little-endian f32, row-major. The
/// manifest is UTF-8 text, one id per line, LF-terminated, count lines.
EmbeddingStore load_embeddings(const std::string& path,
                               const std::string& manifest_path);

void write_embeddings(const EmbeddingStore& store, const std::string& path,
                      const std::string& manifest_path);

/// Standard inner product with double accumulation. Throws on dimension
/// mismatch. Equals cosine similarity when both inputs are unit-norm.
double dot(std::span<const float> a, std::span<const float> b);

/// Cosine similarity; 0 when either vector has zero norm.
double cosine(std::span<const float> a, std::span<const float> b);

}  // namespace rebol
