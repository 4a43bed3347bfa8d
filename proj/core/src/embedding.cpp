#include "rebol/embedding.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

namespace rebol {

namespace {

constexpr char kMagic[4] = {'E', 'M', 'B', '1'};
constexpr double kUnitNormTolerance = 1e-4;

static_assert(std::endian::native == std::endian::little,
              "embedding binary i/o assumes a little-endian host");

}  // namespace

EmbeddingStore::EmbeddingStore(std::vector<std::string> ids, std::vector<float> data,
                               std::size_t dim)
    : ids_(std::move(ids)), data_(std::move(data)), dim_(dim) {
  if (dim_ == 0) throw Error("embedding dim must be positive");
  if (data_.size() != ids_.size() * dim_) {
    throw Error("embedding row count (" + std::to_string(data_.size() / dim_) +
                ") does not match id count (" + std::to_string(ids_.size()) + ")");
  }
  norms_.resize(ids_.size());
  normalized_ = !ids_.empty();
  for (std::size_t i = 0; i < ids_.size(); ++i) {
    double sq = 0.0;
    for (std::size_t j = 0; j < dim_; ++j) {
      float v = data_[i * dim_ + j];
      if (!std::isfinite(v)) {
        throw Error("non-finite value in embedding row " + std::to_string(i) +
                    " (id " + ids_[i] + ")");
      }
      sq += static_cast<double>(v) * v;
    }
    norms_[i] = std::sqrt(sq);
    if (std::abs(norms_[i] - 1.0) > kUnitNormTolerance) normalized_ = false;
  }
  index_.reserve(ids_.size());
  for (std::size_t i = 0; i < ids_.size(); ++i) index_.emplace(ids_[i], i);
}

std::optional<std::size_t> EmbeddingStore::find(const std::string& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

EmbeddingStore load_embeddings(const std::string& path, const std::string& manifest_path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open embedding file: " + path);

  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) {
    throw Error(path + ": bad magic, expected EMB1");
  }
  std::uint32_t count = 0, dim = 0;
  if (!in.read(reinterpret_cast<char*>(&count), 4) ||
      !in.read(reinterpret_cast<char*>(&dim), 4)) {
    throw Error(path + ": truncated header");
  }
  if (dim == 0) throw Error(path + ": dim must be positive");

  std::vector<float> data(static_cast<std::size_t>(count) * dim);
  if (!data.empty() &&
      !in.read(reinterpret_cast<char*>(data.data()),
               static_cast<std::streamsize>(data.size() * sizeof(float)))) {
    throw Error(path + ": truncated payload, expected " +
                std::to_string(data.size() * sizeof(float)) + " bytes of f32");
  }

  std::ifstream manifest(manifest_path);
  if (!manifest) throw Error("cannot open manifest: " + manifest_path);
  std::vector<std::string> ids;
  ids.reserve(count);
  std::string line;
  while (std::getline(manifest, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    ids.push_back(line);
  }
  if (ids.size() != count) {
    throw Error(manifest_path + ": " + std::to_string(ids.size()) +
                " ids but header says " + std::to_string(count) + " rows");
  }
  return EmbeddingStore(std::move(ids), std::move(data), dim);
}

void write_embeddings(const EmbeddingStore& store, const std::string& path,
                      const std::string& manifest_path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open for writing: " + path);
  std::uint32_t count = static_cast<std::uint32_t>(store.count());
  std::uint32_t dim = static_cast<std::uint32_t>(store.dim());
  out.write(kMagic, 4);
  out.write(reinterpret_cast<const char*>(&count), 4);
  out.write(reinterpret_cast<const char*>(&dim), 4);
  out.write(reinterpret_cast<const char*>(store.data().data()),
            static_cast<std::streamsize>(store.data().size() * sizeof(float)));
  if (!out) throw Error("write failed: " + path);

  std::ofstream mf(manifest_path, std::ios::binary);
  if (!mf) throw Error("cannot open for writing: " + manifest_path);
  for (const auto& id : store.ids()) mf << id << '\n';
  if (!mf) throw Error("write failed: " + manifest_path);
}

double dot(std::span<const float> a, std::span<const float> b) {
  if (a.size() != b.size()) {
    throw Error("dot: dimension mismatch (" + std::to_string(a.size()) + " vs " +
                std::to_string(b.size()) + ")");
  }
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    s += static_cast<double>(a[i]) * b[i];
  }
  return s;
}

double cosine(std::span<const float> a, std::span<const float> b) {
  double ab = dot(a, b);
  double na = 0.0, nb = 0.0;
  for (float v : a) na += static_cast<double>(v) * v;
  for (float v : b) nb += static_cast<double>(v) * v;
  if (na == 0.0 || nb == 0.0) return 0.0;
  return ab / (std::sqrt(na) * std::sqrt(nb));
}

}  // namespace rebol
