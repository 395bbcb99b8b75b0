#pragma once

// Closed-form communication cost models.  The postal model charges latency
// plus a per-byte cost; the max-rate variant adds a per-node injection limit.
// Units are seconds and bytes everywhere.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace hetcomm {

using Seconds = double;
using Bytes = double;
using Count = std::uint64_t;

/// Latency/bandwidth pair for one link class and protocol tier.
class PostalParams {
 public:
  constexpr PostalParams() = default;
  /// Throws std::invalid_argument unless both values are finite and >= 0.
  PostalParams(Seconds alpha, Seconds beta_per_byte);

  [[nodiscard]] constexpr Seconds alpha() const noexcept { return alpha_; }
  [[nodiscard]] constexpr Seconds beta() const noexcept { return beta_; }

  friend bool operator==(const PostalParams&, const PostalParams&) = default;

 private:
  Seconds alpha_ = 0.0;
  Seconds beta_ = 0.0;
};

inline constexpr std::uint64_t kDefaultShortMaxBytes = 512;
inline constexpr std::uint64_t kDefaultEagerMaxBytes = 65536;

enum class ProtocolTier { Short, Eager, Rendezvous };

/// Short/eager/rendezvous parameters with their size thresholds.
/// Thresholds are inclusive upper bounds: s == eager_max_bytes is eager.
class ProtocolTable {
 public:
  ProtocolTable() = default;
  /// Throws std::invalid_argument unless 0 < short_max < eager_max.
  ProtocolTable(PostalParams short_tier, PostalParams eager_tier, PostalParams rendezvous_tier,
                std::uint64_t short_max_bytes = kDefaultShortMaxBytes,
                std::uint64_t eager_max_bytes = kDefaultEagerMaxBytes);

  /// All three tiers share one parameter pair (GPU paths).
  static ProtocolTable uniform(PostalParams params,
                               std::uint64_t short_max_bytes = kDefaultShortMaxBytes,
                               std::uint64_t eager_max_bytes = kDefaultEagerMaxBytes);

  [[nodiscard]] const PostalParams& tier(ProtocolTier t) const noexcept;
  [[nodiscard]] const PostalParams& short_tier() const noexcept { return short_; }
  [[nodiscard]] const PostalParams& eager_tier() const noexcept { return eager_; }
  [[nodiscard]] const PostalParams& rendezvous_tier() const noexcept { return rendezvous_; }
  [[nodiscard]] std::uint64_t short_max_bytes() const noexcept { return short_max_; }
  [[nodiscard]] std::uint64_t eager_max_bytes() const noexcept { return eager_max_; }
  [[nodiscard]] bool is_uniform() const noexcept { return short_ == eager_ && eager_ == rendezvous_; }

  friend bool operator==(const ProtocolTable&, const ProtocolTable&) = default;

 private:
  PostalParams short_;
  PostalParams eager_;
  PostalParams rendezvous_;
  std::uint64_t short_max_ = kDefaultShortMaxBytes;
  std::uint64_t eager_max_ = kDefaultEagerMaxBytes;
};

/// Reported in this order: OnSocket < OnNode < OffNode.
enum class LocalityClass { OnSocket = 0, OnNode = 1, OffNode = 2 };
inline constexpr LocalityClass kAllLocalities[] = {LocalityClass::OnSocket, LocalityClass::OnNode,
                                                   LocalityClass::OffNode};

enum class CopyDirection { HostToDevice, DeviceToHost };
enum class SocketLocality { OnSocket, OffSocket };

struct MemcpyParams {
  CopyDirection direction = CopyDirection::HostToDevice;
  SocketLocality locality = SocketLocality::OnSocket;
  PostalParams params;

  friend bool operator==(const MemcpyParams&, const MemcpyParams&) = default;
};

enum class TrafficKind { InterCpu, InterGpu };

/// Inverse network injection rate, seconds per byte.
class InjectionParams {
 public:
  /// Throws std::invalid_argument unless finite and > 0.
  explicit InjectionParams(Seconds t_inject);
  [[nodiscard]] constexpr Seconds t_inject() const noexcept { return t_inject_; }
  friend bool operator==(const InjectionParams&, const InjectionParams&) = default;

 private:
  Seconds t_inject_;
};

/// One communication workload as seen from a single process.
struct TransferSpec {
  Count n_messages = 1;
  Bytes bytes_per_message = 0.0;
  Count ppn = 1;
  double dedup_fraction = 0.0;

  /// Throws std::invalid_argument on ppn == 0, negative/non-finite bytes, dedup outside [0,1].
  void validate() const;
};

struct Phase {
  std::string label;
  Seconds seconds = 0.0;
  friend bool operator==(const Phase&, const Phase&) = default;
};

/// Sequentially composed phases; total() is always the phase sum.
class CostBreakdown {
 public:
  CostBreakdown() = default;

  /// Appends a phase; throws std::invalid_argument for negative or non-finite seconds.
  void add(std::string label, Seconds seconds);
  void append(const CostBreakdown& other);

  [[nodiscard]] const std::vector<Phase>& phases() const noexcept { return phases_; }
  [[nodiscard]] Seconds total() const noexcept { return total_; }
  /// Seconds of the named phase, or nullopt.
  [[nodiscard]] std::optional<Seconds> phase(std::string_view label) const;

 private:
  std::vector<Phase> phases_;
  Seconds total_ = 0.0;
};

[[nodiscard]] std::string_view to_string(LocalityClass l);
[[nodiscard]] std::string_view to_string(ProtocolTier t);
[[nodiscard]] std::optional<LocalityClass> parse_locality(std::string_view text);

// ---------------------------------------------------------------------------
// Cost primitives.  All are pure; preconditions are checked and reported with
// std::invalid_argument.

/// alpha + beta * s
[[nodiscard]] Seconds postal_time(const PostalParams& params, Bytes s);

[[nodiscard]] const PostalParams& select_protocol(const ProtocolTable& table, Bytes s);
[[nodiscard]] ProtocolTier select_tier(const ProtocolTable& table, Bytes s);

/// Cheapest of the three tiers at size s.
[[nodiscard]] Seconds best_protocol_time(const ProtocolTable& table, Bytes s);

/// alpha + s * max(beta, ppn * t_inject), s being the bytes sent by each of the ppn processes.
[[nodiscard]] Seconds maxrate_time(const PostalParams& params, const InjectionParams& inj, Count ppn, Bytes s);

/// n * alpha + n * s * max(beta, ppn * t_inject)
[[nodiscard]] Seconds multi_message_time(const PostalParams& params, const InjectionParams& inj, Count ppn, Count n,
                                         Bytes s);
/// Multi-message cost with no injection limit: n * (alpha + beta * s).
[[nodiscard]] Seconds multi_message_time(const PostalParams& params, Count n, Bytes s);

[[nodiscard]] Seconds memcpy_time(const MemcpyParams& mp, Bytes s);

/// Bytes that cross the host-device boundary: n*s - dedup*(n-1)*s, 0 when n == 0.
[[nodiscard]] Bytes staged_bytes(const TransferSpec& spec);

}  // namespace hetcomm
