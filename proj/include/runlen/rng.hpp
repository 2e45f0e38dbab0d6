#pragma once

#include <array>
#include <cstdint>

#include "runlen/normal.hpp"

namespace runlen {

/// Philox4x64-10 counter-based block cipher. A (key, counter) pair maps to
/// four 64-bit words; distinct counters give independent outputs, so random
/// streams can be indexed rather than iterated.
struct Philox4x64 {
  static constexpr std::uint64_t kMul0 = 0xD2E7470EE14C6C93ull;
  static constexpr std::uint64_t kMul1 = 0xCA5A826395121157ull;
  static constexpr std::uint64_t kWeyl0 = 0x9E3779B97F4A7C15ull;
  static constexpr std::uint64_t kWeyl1 = 0xBB67AE8584CAA73Bull;

  static std::array<std::uint64_t, 4> block(std::array<std::uint64_t, 4> ctr,
                                            std::array<std::uint64_t, 2> key) {
    for (int round = 0; round < 10; ++round) {
      const unsigned __int128 p0 = static_cast<unsigned __int128>(kMul0) * ctr[0];
      const unsigned __int128 p1 = static_cast<unsigned __int128>(kMul1) * ctr[2];
      const std::uint64_t hi0 = static_cast<std::uint64_t>(p0 >> 64);
      const std::uint64_t lo0 = static_cast<std::uint64_t>(p0);
      const std::uint64_t hi1 = static_cast<std::uint64_t>(p1 >> 64);
      const std::uint64_t lo1 = static_cast<std::uint64_t>(p1);
      ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
      key[0] += kWeyl0;
      key[1] += kWeyl1;
    }
    return ctr;
  }
};

/// Maps a 64-bit word to the open interval (0,1).
inline double uniform_open(std::uint64_t x) {
  return (static_cast<double>(x >> 11) + 0.5) * 0x1.0p-53;
}

/// One reproducible substream of standard normal variates, identified by
/// (master seed, stream index). Consumption order within a stream is the only
/// state; streams never overlap.
class NormalStream {
 public:
  NormalStream(std::uint64_t master_seed, std::uint64_t stream_index)
      : key_{master_seed, 0x243F6A8885A308D3ull}, stream_(stream_index) {}

  double uniform() {
    if (pos_ == 4) refill();
    return buf_[pos_++];
  }

  double normal() { return norm_quantile(uniform()); }

 private:
  void refill() {
    const auto words = Philox4x64::block({block_++, stream_, 0, 0}, key_);
    for (int i = 0; i < 4; ++i) buf_[i] = uniform_open(words[i]);
    pos_ = 0;
  }

  std::array<std::uint64_t, 2> key_;
  std::uint64_t stream_;
  std::uint64_t block_ = 0;
  double buf_[4] = {0, 0, 0, 0};
  int pos_ = 4;
};

/// Reproducibility contract for a Monte-Carlo study: one master seed, one
/// substream per replication. Scheduling and thread count cannot change what
/// any replication observes.
struct SeedPlan {
  std::uint64_t master_seed = 0;

  NormalStream stream(std::uint64_t replication) const {
    return NormalStream(master_seed, replication);
  }
};

}  // namespace runlen
