#include "fkdyn/rng.hpp"

#include <array>

namespace fkdyn {

namespace {

constexpr uint32_t kMul0 = 0xD2511F53u;
constexpr uint32_t kMul1 = 0xCD9E8D57u;
constexpr uint32_t kWeyl0 = 0x9E3779B9u;
constexpr uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(uint32_t a, uint32_t b, uint32_t& hi, uint32_t& lo) {
  const uint64_t prod = static_cast<uint64_t>(a) * b;
  hi = static_cast<uint32_t>(prod >> 32);
  lo = static_cast<uint32_t>(prod);
}

std::array<uint32_t, 4> philox(std::array<uint32_t, 4> ctr, std::array<uint32_t, 2> key) {
  for (int round = 0; round < 10; ++round) {
    uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kMul0, ctr[0], hi0, lo0);
    mulhilo(kMul1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kWeyl0;
    key[1] += kWeyl1;
  }
  return ctr;
}

}  // namespace

uint64_t RngStream::mix(uint64_t z) {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

RngStream RngStream::split(uint64_t child) const {
  return RngStream(mix(key_ ^ mix(stream_ + 0x632BE59BD9B4E019ull) ^ mix(child)), child, 0);
}

uint64_t RngStream::bits_at(uint64_t counter) const {
  const auto out = philox({static_cast<uint32_t>(counter), static_cast<uint32_t>(counter >> 32),
                           static_cast<uint32_t>(stream_), static_cast<uint32_t>(stream_ >> 32)},
                          {static_cast<uint32_t>(key_), static_cast<uint32_t>(key_ >> 32)});
  return (static_cast<uint64_t>(out[0]) << 32) | out[1];
}

uint64_t RngStream::below(uint64_t bound) {
  // Lemire's multiply-shift; the bias is below 2^-64 * bound, irrelevant here.
  const unsigned __int128 prod = static_cast<unsigned __int128>(next_u64()) * bound;
  return static_cast<uint64_t>(prod >> 64);
}

}  // namespace fkdyn
