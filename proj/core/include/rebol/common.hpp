#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace rebol {

/// Error type thrown across the library. Messages are intended to be
/// actionable (they carry file paths, line numbers, ids).
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Warnings are collected rather than thrown: loaders and oracles keep
/// going but report how often they had to patch something up.
struct Warnings {
  std::vector<std::string> messages;

  void add(std::string msg) { messages.push_back(std::move(msg)); }
  std::size_t count() const { return messages.size(); }
  bool empty() const { return messages.empty(); }
};

/// FNV-1a 64-bit. Used to derive per-query RNG streams from a global seed
/// so results do not depend on thread scheduling.
inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

/// Seed for the RNG stream owned by one query's session.
inline std::uint64_t derive_seed(std::uint64_t base, std::string_view query_id) {
  return splitmix64(base ^ fnv1a64(query_id));
}

/// Uniform double in [0,1) from a raw 64-bit draw. Hand-rolled so the
/// stream is identical across standard library implementations.
inline double uniform01(std::uint64_t raw) {
  return static_cast<double>(raw >> 11) * 0x1.0p-53;
}

}  // namespace rebol
