#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace fkdyn {

class Lattice;

// Open/closed state per edge index (1 = open).
struct FkConfig {
  std::vector<uint8_t> bits;

  FkConfig() = default;
  explicit FkConfig(int num_edges, bool open = false) : bits(num_edges, open ? 1 : 0) {}
  static FkConfig from_mask(int num_edges, uint64_t mask);
  uint64_t to_mask() const;

  int size() const { return static_cast<int>(bits.size()); }
  bool open(int e) const { return bits[e] != 0; }
  void set(int e, bool v) { bits[e] = v ? 1 : 0; }
  int count_open() const;
  bool operator==(const FkConfig&) const = default;
  // Pointwise order: every edge open in *this is open in other.
  bool subset_of(const FkConfig& other) const;
};

// "n l variant hexbits" where hexbits packs edges little-endian in nibbles.
std::string serialize_config(const Lattice& lat, const FkConfig& cfg);
FkConfig deserialize_config(const Lattice& lat, const std::string& text);

}  // namespace fkdyn
