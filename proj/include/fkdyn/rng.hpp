#pragma once

#include <cstdint>

namespace fkdyn {

// Counter-based stream (Philox4x32-10). The variate at a given counter is a pure
// function of (key, stream id, counter), so streams can be replayed and split.
class RngStream {
 public:
  explicit RngStream(uint64_t seed = 0, uint64_t stream = 0) : key_(mix(seed)), stream_(stream) {}

  RngStream split(uint64_t child) const;

  double uniform() { return uniform_at(counter_++); }
  uint64_t next_u64() { return bits_at(counter_++); }
  // Uniform integer in [0, bound).
  uint64_t below(uint64_t bound);

  double uniform_at(uint64_t counter) const {
    return static_cast<double>(bits_at(counter) >> 11) * 0x1.0p-53;
  }
  uint64_t bits_at(uint64_t counter) const;

  uint64_t counter() const { return counter_; }
  void seek(uint64_t c) { counter_ = c; }
  uint64_t key() const { return key_; }
  uint64_t stream_id() const { return stream_; }

  static uint64_t mix(uint64_t z);

 private:
  RngStream(uint64_t key, uint64_t stream, int) : key_(key), stream_(stream) {}
  uint64_t key_;
  uint64_t stream_;
  uint64_t counter_ = 0;
};

}  // namespace fkdyn
