#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <stdexcept>

#include "hetcomm/model.hpp"
#include "hetcomm/paths.hpp"
#include "hetcomm/topology.hpp"
#include "oracle.hpp"

using namespace hetcomm;

namespace {

const ProtocolTable kOffNodeCpu({1.38e-6, 3.82e-10}, {1.85e-6, 3.93e-10}, {6.56e-6, 8.51e-11});

TEST(PostalTime, ZeroBytesIsLatency) {
  EXPECT_EQ(postal_time({4.96e-6, 1.69e-10}, 0.0), 4.96e-6);
}

TEST(PostalTime, HandEvaluated) {
  EXPECT_DOUBLE_EQ(postal_time({4.96e-6, 1.69e-10}, 1e6), 1.7396e-4);
  EXPECT_DOUBLE_EQ(postal_time({1.68e-5, 1.86e-11}, 8), 1.68001488e-5);
}

TEST(PostalParams, RejectsNegativeAndNonFinite) {
  EXPECT_THROW(PostalParams(-1e-6, 1e-10), std::invalid_argument);
  EXPECT_THROW(PostalParams(1e-6, -1e-10), std::invalid_argument);
  EXPECT_THROW(PostalParams(NAN, 1e-10), std::invalid_argument);
  EXPECT_THROW(PostalParams(1e-6, INFINITY), std::invalid_argument);
  EXPECT_NO_THROW(PostalParams(0.0, 0.0));
}

TEST(PostalTime, RejectsNegativeSize) {
  EXPECT_THROW((void)postal_time({1e-6, 1e-10}, -1.0), std::invalid_argument);
}

TEST(ProtocolTable, RejectsUnorderedThresholds) {
  EXPECT_THROW(ProtocolTable({1, 1}, {1, 1}, {1, 1}, 1000, 500), std::invalid_argument);
  EXPECT_THROW(ProtocolTable({1, 1}, {1, 1}, {1, 1}, 500, 500), std::invalid_argument);
  EXPECT_THROW(ProtocolTable({1, 1}, {1, 1}, {1, 1}, 0, 500), std::invalid_argument);
  EXPECT_NO_THROW(ProtocolTable({1, 1}, {1, 1}, {1, 1}, 500, 501));
}

TEST(SelectProtocol, BoundariesAreInclusive) {
  EXPECT_EQ(select_tier(kOffNodeCpu, 0), ProtocolTier::Short);
  EXPECT_EQ(select_tier(kOffNodeCpu, 512), ProtocolTier::Short);
  EXPECT_EQ(select_tier(kOffNodeCpu, 513), ProtocolTier::Eager);
  EXPECT_EQ(select_tier(kOffNodeCpu, 65536), ProtocolTier::Eager);
  EXPECT_EQ(select_tier(kOffNodeCpu, 65537), ProtocolTier::Rendezvous);
  EXPECT_EQ(select_protocol(kOffNodeCpu, 65537), kOffNodeCpu.rendezvous_tier());
  EXPECT_EQ(select_protocol(kOffNodeCpu, 0), kOffNodeCpu.short_tier());
}

TEST(BestProtocolTime, PicksCheapestTier) {
  EXPECT_DOUBLE_EQ(best_protocol_time(kOffNodeCpu, 1), 1.380382e-6);
  EXPECT_DOUBLE_EQ(best_protocol_time(kOffNodeCpu, 1e6), 9.166e-5);
  const PostalParams p{3e-6, 2e-10};
  EXPECT_EQ(best_protocol_time(ProtocolTable::uniform(p), 12345), postal_time(p, 12345));
}

TEST(MaxrateTime, ReducesToPostalBelowInjectionLimit) {
  const PostalParams p{6.56e-6, 8.51e-11};
  EXPECT_EQ(maxrate_time(p, InjectionParams(3.0e-11), 1, 1e6), postal_time(p, 1e6));
}

TEST(MaxrateTime, InjectionLimitedBranch) {
  EXPECT_DOUBLE_EQ(maxrate_time({6.56e-6, 8.51e-11}, InjectionParams(3.0e-11), 40, 1e6), 1.20656e-3);
}

TEST(MaxrateTime, ZeroBytesIsLatencyAndPpnZeroRejected) {
  EXPECT_EQ(maxrate_time({2e-6, 1e-10}, InjectionParams(1e-9), 1, 0), 2e-6);
  EXPECT_THROW((void)maxrate_time({2e-6, 1e-10}, InjectionParams(1e-9), 0, 10), std::invalid_argument);
}

TEST(InjectionParams, MustBePositive) {
  EXPECT_THROW(InjectionParams(0.0), std::invalid_argument);
  EXPECT_THROW(InjectionParams(-1e-11), std::invalid_argument);
}

TEST(MultiMessageTime, HandEvaluated) {
  EXPECT_DOUBLE_EQ(multi_message_time({4.96e-6, 1.69e-10}, InjectionParams(5.1e-11), 1, 10, 1e3), 5.129e-5);
}

TEST(MultiMessageTime, EmptyWorkloadIsFree) {
  EXPECT_EQ(multi_message_time({4.96e-6, 1.69e-10}, InjectionParams(5.1e-11), 7, 0, 1e9), 0.0);
  EXPECT_EQ(multi_message_time({4.96e-6, 1.69e-10}, 0, 1e9), 0.0);
}

TEST(MultiMessageTime, WithoutInjectionIsRepeatedPostal) {
  const PostalParams p{1.68e-5, 1.86e-11};
  EXPECT_DOUBLE_EQ(multi_message_time(p, 3, 100), 3 * postal_time(p, 100));
}

TEST(MemcpyTime, HandEvaluated) {
  using enum CopyDirection;
  using enum SocketLocality;
  EXPECT_EQ(memcpy_time({HostToDevice, OnSocket, {1.09e-5, 2.38e-11}}, 0), 1.09e-5);
  EXPECT_DOUBLE_EQ(memcpy_time({DeviceToHost, OnSocket, {1.09e-5, 2.36e-11}}, 1e7), 2.469e-4);
  EXPECT_DOUBLE_EQ(memcpy_time({HostToDevice, OffSocket, {1.26e-5, 2.71e-11}}, 1e6), 3.97e-5);
}

TEST(StagedBytes, DedupExtremes) {
  EXPECT_EQ(staged_bytes({50, 100, 1, 0.0}), 5000);
  EXPECT_EQ(staged_bytes({50, 100, 1, 1.0}), 100);
  EXPECT_EQ(staged_bytes({1, 100, 1, 0.5}), 100);
  EXPECT_EQ(staged_bytes({0, 100, 1, 0.5}), 0);
}

TEST(TransferSpec, Validation) {
  EXPECT_THROW((TransferSpec{1, 10, 1, 1.5}).validate(), std::invalid_argument);
  EXPECT_THROW((TransferSpec{1, 10, 1, -0.1}).validate(), std::invalid_argument);
  EXPECT_THROW((TransferSpec{1, -10, 1, 0}).validate(), std::invalid_argument);
  EXPECT_THROW((TransferSpec{1, 10, 0, 0}).validate(), std::invalid_argument);
  EXPECT_NO_THROW((TransferSpec{0, 0, 1, 1}).validate());
}

TEST(CostBreakdown, TotalsAndLookup) {
  CostBreakdown b;
  b.add("a", 1e-6);
  b.add("b", 2e-6);
  CostBreakdown c;
  c.add("c", 3e-6);
  b.append(c);
  ASSERT_EQ(b.phases().size(), 3u);
  EXPECT_DOUBLE_EQ(b.total(), 6e-6);
  EXPECT_EQ(b.phase("c"), 3e-6);
  EXPECT_FALSE(b.phase("zzz").has_value());
}

TEST(Locality, StringRoundTrip) {
  for (auto l : kAllLocalities) EXPECT_EQ(parse_locality(to_string(l)), l);
  EXPECT_FALSE(parse_locality("elsewhere").has_value());
}

// Path compositions on the Summit preset.

TEST(GpudirectPath, Examples) {
  const auto m = builtin_machine("summit");
  const auto off = gpudirect_path_time(m, LocalityClass::OffNode, {1, 1e6, 1, 0});
  ASSERT_EQ(off.phases().size(), 1u);
  EXPECT_EQ(off.phases()[0].label, "gpu-direct");
  EXPECT_DOUBLE_EQ(off.total(), 1.7396e-4);
  EXPECT_EQ(gpudirect_path_time(m, LocalityClass::OnSocket, {1, 0, 1, 0}).total(), 1.68e-5);
  EXPECT_EQ(gpudirect_path_time(m, LocalityClass::OffNode, {0, 1e6, 1, 0}).total(), 0.0);
}

TEST(GpudirectPath, OnNodeIgnoresInjection) {
  const auto m = builtin_machine("summit");
  // 6 * 5.1e-11 exceeds the on-node beta but must not apply inside a node.
  EXPECT_DOUBLE_EQ(gpudirect_path_time(m, LocalityClass::OnNode, {1, 1e6, 6, 0}).total(), 1.80e-5 + 2.09e-11 * 1e6);
  EXPECT_DOUBLE_EQ(gpudirect_path_time(m, LocalityClass::OffNode, {1, 1e6, 6, 0}).total(), 4.96e-6 + 6 * 5.1e-11 * 1e6);
}

TEST(ThreeStep, SingleCpuPhases) {
  const auto m = builtin_machine("summit");
  const auto b = three_step_time(m, {1, 1e6, 1, 0}, Distribution::SingleCpu);
  EXPECT_DOUBLE_EQ(*b.phase("d2h"), 3.45e-5);
  EXPECT_DOUBLE_EQ(*b.phase("inter-cpu"), 9.166e-5);
  EXPECT_DOUBLE_EQ(*b.phase("h2d"), 3.47e-5);
  EXPECT_DOUBLE_EQ(b.total(), 1.6086e-4);
  EXPECT_FALSE(b.phase("redistribute").has_value());
}

TEST(ThreeStep, ExtraMsgPhases) {
  const auto m = builtin_machine("summit");
  const auto b = three_step_time(m, {1, 6e6, 1, 0}, Distribution::ExtraMsg);
  EXPECT_DOUBLE_EQ(*b.phase("d2h"), 1.525e-4);
  EXPECT_DOUBLE_EQ(*b.phase("redistribute"), 7.3581e-4);
  EXPECT_DOUBLE_EQ(*b.phase("inter-cpu"), 1.8656e-4);
  EXPECT_DOUBLE_EQ(*b.phase("gather"), 7.3581e-4);
  EXPECT_DOUBLE_EQ(*b.phase("h2d"), 1.537e-4);
  EXPECT_NEAR(b.total(), 1.96438e-3, 1e-15);
}

TEST(ThreeStep, DupDevptrCopiesOneShare) {
  const auto m = builtin_machine("summit");
  const auto b = three_step_time(m, {1, 6e6, 1, 0}, Distribution::DupDevptr);
  EXPECT_DOUBLE_EQ(*b.phase("d2h"), 3.45e-5);
  EXPECT_DOUBLE_EQ(*b.phase("inter-cpu"), 1.8656e-4);
  EXPECT_DOUBLE_EQ(*b.phase("h2d"), 3.47e-5);
  EXPECT_DOUBLE_EQ(b.total(), 2.5576e-4);
}

TEST(ThreeStep, EmptyWorkloadIsFree) {
  const auto m = builtin_machine("summit");
  for (auto d : {Distribution::SingleCpu, Distribution::ExtraMsg, Distribution::DupDevptr}) {
    EXPECT_EQ(three_step_time(m, {0, 1e6, 1, 0}, d).total(), 0.0);
  }
}

TEST(ThreeStep, RejectsPpnBeyondCores) {
  const auto m = builtin_machine("summit");
  EXPECT_THROW((void)three_step_time(m, {1, 100, 41, 0}, Distribution::SingleCpu), std::invalid_argument);
  EXPECT_THROW((void)three_step_time(m, {1, 100, 7, 0}, Distribution::DupDevptr), std::invalid_argument);
  EXPECT_NO_THROW((void)three_step_time(m, {1, 100, 6, 0}, Distribution::DupDevptr));
}

TEST(ThreeStep, ContentionScalesDupCopies) {
  auto m = builtin_machine("summit");
  const double base = *three_step_time(m, {1, 6e6, 1, 0}, Distribution::DupDevptr).phase("d2h");
  m.contention_factor = 2.5;
  EXPECT_DOUBLE_EQ(*three_step_time(m, {1, 6e6, 1, 0}, Distribution::DupDevptr).phase("d2h"), 2.5 * base);
}

// Properties with fixed-seed generators.

struct Rng {
  std::mt19937_64 gen;
  explicit Rng(std::uint64_t seed) : gen(seed) {}
  double log_uniform(double lo, double hi) {
    return std::exp(std::uniform_real_distribution<double>(std::log(lo), std::log(hi))(gen));
  }
  Count count(Count lo, Count hi) { return std::uniform_int_distribution<Count>(lo, hi)(gen); }
  double unit() { return std::uniform_real_distribution<double>(0.0, 1.0)(gen); }
};

TEST(ModelProperties, PostalAffineAndMonotone) {
  Rng r(11);
  for (int i = 0; i < 2000; ++i) {
    const PostalParams p{r.log_uniform(1e-8, 1e-4), r.log_uniform(1e-13, 1e-8)};
    const double s1 = r.log_uniform(1, 1e9), s2 = s1 + r.log_uniform(1, 1e9);
    EXPECT_LE(postal_time(p, s1), postal_time(p, s2));
    EXPECT_EQ(postal_time(p, 0), p.alpha());
  }
}

TEST(ModelProperties, MultiOfOneEqualsMaxrate) {
  Rng r(12);
  for (int i = 0; i < 2000; ++i) {
    const PostalParams p{r.log_uniform(1e-8, 1e-4), r.log_uniform(1e-13, 1e-8)};
    const InjectionParams inj(r.log_uniform(1e-13, 1e-9));
    const Count ppn = r.count(1, 64);
    const double s = r.log_uniform(1, 1e9);
    EXPECT_EQ(multi_message_time(p, inj, ppn, 1, s), maxrate_time(p, inj, ppn, s));
  }
}

TEST(ModelProperties, SlowdownBounds) {
  Rng r(13);
  for (int i = 0; i < 500; ++i) {
    const PostalParams p{r.log_uniform(1e-8, 1e-4), r.log_uniform(1e-13, 1e-8)};
    const InjectionParams inj(r.log_uniform(1e-13, 1e-9));
    const Count ppn = r.count(1, 40);
    const double total = r.log_uniform(1, 1e10);
    const double one = multi_message_time(p, inj, ppn, 1, total);
    double prev = 1.0;
    for (Count n = 1; n <= 64; ++n) {
      const double sd = multi_message_time(p, inj, ppn, n, total / double(n)) / one;
      EXPECT_GE(sd, 1.0 - 1e-12);
      EXPECT_LE(sd, double(n) * (1 + 1e-12));
      EXPECT_GE(sd, prev - 1e-12);
      prev = sd;
    }
  }
}

TEST(ModelProperties, StagedBytesMonotoneInDedup) {
  Rng r(14);
  for (int i = 0; i < 2000; ++i) {
    const Count n = r.count(1, 100);
    const double s = r.log_uniform(1, 1e8);
    const double d1 = r.unit(), d2 = r.unit();
    const double lo = std::min(d1, d2), hi = std::max(d1, d2);
    const double a = staged_bytes({n, s, 1, lo}), b = staged_bytes({n, s, 1, hi});
    EXPECT_GE(a, b);
    EXPECT_GE(b, s * (1 - 1e-12));
    EXPECT_LE(a, double(n) * s * (1 + 1e-12));
  }
}

TEST(ModelProperties, BreakdownTotalsMatchPhaseSums) {
  const auto m = builtin_machine("summit");
  Rng r(15);
  for (int i = 0; i < 500; ++i) {
    const TransferSpec spec{r.count(0, 64), r.log_uniform(1, 1e8), r.count(1, 6), r.unit()};
    for (auto d : {Distribution::SingleCpu, Distribution::ExtraMsg, Distribution::DupDevptr}) {
      const auto b = three_step_time(m, spec, d);
      double sum = 0;
      for (const auto& ph : b.phases()) sum += ph.seconds;
      EXPECT_TRUE(oracle::rel_close(b.total(), sum, 1e-12));
    }
  }
}

TEST(ModelProperties, PureFunctionsAreBitReproducible) {
  const auto m = builtin_machine("summit");
  Rng r(16);
  for (int i = 0; i < 200; ++i) {
    const TransferSpec spec{r.count(1, 64), r.log_uniform(1, 1e8), 1, r.unit()};
    const auto a = three_step_time(m, spec, Distribution::ExtraMsg);
    const auto b = three_step_time(m, spec, Distribution::ExtraMsg);
    EXPECT_EQ(a.phases(), b.phases());
  }
}

}  // namespace
