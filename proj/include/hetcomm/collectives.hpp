#pragma once

// Cost of alltoall / alltoallv / allreduce under the four GPU communication
// strategies.  Costs are those of the busiest sender (bulk-synchronous view):
// every GPU rank is evaluated and the most expensive one stands for the
// collective.  GPUs are placed with gpu_endpoint()'s socket-major layout.

#include <array>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "hetcomm/model.hpp"
#include "hetcomm/paths.hpp"
#include "hetcomm/topology.hpp"

namespace hetcomm {

enum class Strategy { CudaAware = 0, ThreeStep = 1, ExtraMsg = 2, DupDevptr = 3 };
inline constexpr std::array<Strategy, 4> kAllStrategies = {Strategy::CudaAware, Strategy::ThreeStep,
                                                           Strategy::ExtraMsg, Strategy::DupDevptr};

enum class CollectiveOp { Alltoall, Alltoallv, Allreduce };

[[nodiscard]] std::string_view to_string(Strategy s);
[[nodiscard]] std::string_view to_string(CollectiveOp op);
[[nodiscard]] std::optional<Strategy> parse_strategy(std::string_view text);
[[nodiscard]] std::optional<CollectiveOp> parse_collective(std::string_view text);

/// Staging distribution used by a host-staged strategy.  CudaAware has none.
[[nodiscard]] std::optional<Distribution> distribution_of(Strategy s);

struct CollectiveSpec {
  CollectiveOp op = CollectiveOp::Alltoall;
  Count gpus = 1;
  /// Per-pair size (Alltoall) or total payload (Allreduce).
  Bytes bytes = 0.0;
  /// Alltoallv only: row-major gpus x gpus, entry [i*gpus + j] is bytes from i to j.
  std::vector<Bytes> matrix;
  /// Seconds per byte of local reduction work (Allreduce only).
  Seconds reduce_rate = 0.0;

  /// Every pair exchanges `bytes`; diagonal is zero.
  static CollectiveSpec uniform_alltoallv(Count gpus, Bytes bytes);

  [[nodiscard]] Bytes pair_bytes(Count from, Count to) const;
  /// Throws std::invalid_argument on shape errors, negative sizes or a nonzero diagonal;
  /// ConfigError when the machine cannot host `gpus` GPUs.
  void validate(const MachineModel& machine) const;
};

enum class SenderKind { Gpu, Cpu };

struct PlannedMessages {
  LocalityClass locality = LocalityClass::OffNode;
  SenderKind sender = SenderKind::Gpu;
  Count n_messages = 0;
  Bytes bytes_per_message = 0.0;

  friend bool operator==(const PlannedMessages&, const PlannedMessages&) = default;
};

/// Messages sent by the representative (busiest) process, grouped by locality and size.
struct MessagePlan {
  Count sender_rank = 0;
  Count sender_core = 0;  ///< core index within the GPU's cores (0 for GPU senders)
  std::vector<PlannedMessages> groups;
  Bytes staged_send = 0.0;  ///< bytes copied device->host by the sending GPU
  Bytes staged_recv = 0.0;  ///< bytes copied host->device on receipt
  Count ppn = 1;            ///< processes per node injecting into the network
  Count reduction_steps = 0;
  Bytes reduced_bytes_per_step = 0.0;

  [[nodiscard]] Count total_messages() const;
};

[[nodiscard]] MessagePlan message_plan(const MachineModel& machine, const CollectiveSpec& spec, Strategy strategy);

/// Cost of the busiest GPU rank.  Ranks are evaluated in parallel when OpenMP is available.
[[nodiscard]] CostBreakdown collective_cost(const MachineModel& machine, const CollectiveSpec& spec, Strategy strategy);
/// Sequential reference; bit-identical to collective_cost.
[[nodiscard]] CostBreakdown collective_cost_serial(const MachineModel& machine, const CollectiveSpec& spec,
                                                   Strategy strategy);

struct StrategyReport {
  std::array<CostBreakdown, 4> costs;
  std::array<double, 4> speedup_vs_cuda_aware{};
  Strategy cheapest = Strategy::CudaAware;

  [[nodiscard]] const CostBreakdown& cost(Strategy s) const { return costs[static_cast<std::size_t>(s)]; }
  [[nodiscard]] double speedup(Strategy s) const { return speedup_vs_cuda_aware[static_cast<std::size_t>(s)]; }
};

[[nodiscard]] StrategyReport compare_strategies(const MachineModel& machine, const CollectiveSpec& spec);

/// Smallest n in [1, n_max] for which the single-CPU staged path beats GPUDirect
/// for n off-node messages of s bytes (ppn = 1); nullopt if none.
[[nodiscard]] std::optional<Count> crossover_message_count(const MachineModel& machine, Bytes s, double dedup,
                                                           Count n_max);

struct SweepRow {
  Bytes size = 0.0;
  Strategy strategy = Strategy::CudaAware;
  Seconds seconds = 0.0;
  double speedup = 1.0;
  bool cheapest = false;
};

/// One row per (size, strategy), size-major.  For Alltoallv the template
/// matrix is a weight pattern scaled by each size.
[[nodiscard]] std::vector<SweepRow> sweep(const MachineModel& machine, const CollectiveSpec& spec_template,
                                          std::span<const Bytes> sizes);
[[nodiscard]] std::vector<SweepRow> sweep_serial(const MachineModel& machine, const CollectiveSpec& spec_template,
                                                 std::span<const Bytes> sizes);

}  // namespace hetcomm
