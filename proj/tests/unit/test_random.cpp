#include <cmath>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "tmcmc/random.hpp"

using tmcmc::Philox4x32;

// Known-answer vectors published with the Random123 reference implementation.
TEST(Philox, KnownAnswers) {
  EXPECT_EQ(Philox4x32::encrypt({0, 0, 0, 0}, {0, 0}),
            (Philox4x32::Block{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u}));
  EXPECT_EQ(Philox4x32::encrypt({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu}),
            (Philox4x32::Block{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu}));
  EXPECT_EQ(Philox4x32::encrypt({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u}),
            (Philox4x32::Block{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u}));
}

TEST(Philox, StreamIsCounterSequence) {
  Philox4x32 g(0x0000000500000003ull);
  for (std::uint32_t c = 0; c < 3; ++c) {
    const auto b = Philox4x32::encrypt({c, 0, 0, 0}, {3u, 5u});
    for (auto w : b) EXPECT_EQ(g(), w);
  }
}

TEST(Philox, DiscardSkipsBlocks) {
  Philox4x32 a(9), b(9);
  for (int i = 0; i < 4 * 7; ++i) a();
  b.discard_blocks(7);
  for (int i = 0; i < 16; ++i) EXPECT_EQ(a(), b());
}

TEST(Philox, DeterministicAndSeedSensitive) {
  Philox4x32 a(42), b(42), c(43);
  int same = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto x = a();
    EXPECT_EQ(x, b());
    same += x == c();
  }
  EXPECT_LT(same, 3);
}

TEST(Philox, UniformMoments) {
  Philox4x32 g(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const int n = 200000;
  double s = 0, s2 = 0;
  for (int i = 0; i < n; ++i) {
    const double x = u(g);
    s += x;
    s2 += x * x;
  }
  const double mean = s / n, var = s2 / n - mean * mean;
  EXPECT_NEAR(mean, 0.5, 4 * std::sqrt(1.0 / 12 / n));
  EXPECT_NEAR(var, 1.0 / 12, 0.002);
}
