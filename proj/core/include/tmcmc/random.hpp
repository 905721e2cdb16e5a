#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace tmcmc {

/// Philox4x32-10 counter-based generator. Each seed selects an independent
/// stream, so replicate chains never share state. Satisfies
/// UniformRandomBitGenerator and works with the <random> distributions.
class Philox4x32 {
 public:
  using result_type = std::uint32_t;
  using Block = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  explicit Philox4x32(std::uint64_t seed = 0) noexcept
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)} {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept {
    if (used_ == 4) {
      block_ = encrypt(counter_, key_);
      increment();
      used_ = 0;
    }
    return block_[used_++];
  }

  /// Skips ahead by whole 4-word blocks.
  void discard_blocks(std::uint64_t n) noexcept {
    for (std::uint64_t i = 0; i < n; ++i) increment();
    used_ = 4;
  }

  /// The raw bijection: ten Philox rounds of `counter` under `key`.
  static constexpr Block encrypt(Block ctr, Key key) noexcept {
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        key[0] += kWeyl0;
        key[1] += kWeyl1;
      }
      const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * ctr[0];
      const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * ctr[2];
      ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0], static_cast<std::uint32_t>(p1),
             static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1], static_cast<std::uint32_t>(p0)};
    }
    return ctr;
  }

 private:
  static constexpr std::uint32_t kMul0 = 0xD2511F53u;
  static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

  void increment() noexcept {
    for (auto& word : counter_) {
      if (++word != 0) break;
    }
  }

  Key key_;
  Block counter_{};
  Block block_{};
  int used_ = 4;
};

using Rng = Philox4x32;

}  // namespace tmcmc
