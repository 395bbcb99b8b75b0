#pragma once

// End-to-end inter-GPU paths composed from the cost primitives: direct
// GPU-to-NIC transfers, and staging through host memory in one of three
// data-distribution variants.

#include "hetcomm/model.hpp"
#include "hetcomm/topology.hpp"

namespace hetcomm {

/// How staged data is spread over the CPU cores that serve one GPU.
enum class Distribution {
  SingleCpu,  ///< one core copies and sends everything
  ExtraMsg,   ///< one core copies, then scatters to the other cores with an on-node message
  DupDevptr,  ///< every core copies its own share straight from device memory
};

[[nodiscard]] std::string_view to_string(Distribution d);

/// GPU message cost; the inter-GPU injection limit applies to off-node traffic only.
[[nodiscard]] Seconds gpu_message_time(const MachineModel& machine, LocalityClass locality, Count ppn, Count n, Bytes s);

/// CPU message cost with the tier picked by select_protocol on s; injection applies off-node only.
[[nodiscard]] Seconds cpu_message_time(const MachineModel& machine, LocalityClass locality, Count ppn, Count n, Bytes s);

/// Host/device copy of `staged` bytes on the GPU's own socket.  Zero when nothing is staged.
/// DupDevptr copies staged / c bytes per core, scaled by the machine's contention factor.
[[nodiscard]] Seconds staging_copy_time(const MachineModel& machine, CopyDirection direction, Bytes staged,
                                        Distribution distribution);

/// One on-node scatter round moving staged * (c-1)/c bytes (ExtraMsg only).
[[nodiscard]] Seconds redistribution_time(const MachineModel& machine, Bytes staged);

/// Cores per node that take part in inter-CPU traffic when `gpu_procs` GPUs per node are active.
/// Throws std::invalid_argument when the machine does not have that many cores.
[[nodiscard]] Count active_cores_per_node(const MachineModel& machine, Count gpu_procs, Distribution distribution);

/// Single phase "gpu-direct".
[[nodiscard]] CostBreakdown gpudirect_path_time(const MachineModel& machine, LocalityClass locality,
                                                const TransferSpec& spec);

/// Off-node staged path.  Phases: d2h, [redistribute], inter-cpu, [gather], h2d.
[[nodiscard]] CostBreakdown three_step_time(const MachineModel& machine, const TransferSpec& spec,
                                            Distribution distribution);

}  // namespace hetcomm
