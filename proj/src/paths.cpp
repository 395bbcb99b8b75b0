#include "hetcomm/paths.hpp"

#include <stdexcept>
#include <string>

namespace hetcomm {

std::string_view to_string(Distribution d) {
  switch (d) {
    case Distribution::SingleCpu:
      return "single-cpu";
    case Distribution::ExtraMsg:
      return "extra-msg";
    case Distribution::DupDevptr:
      break;
  }
  return "dup-devptr";
}

Seconds gpu_message_time(const MachineModel& machine, LocalityClass locality, Count ppn, Count n, Bytes s) {
  const PostalParams& params = select_protocol(machine.gpu_table(locality), s);
  if (locality == LocalityClass::OffNode) {
    return multi_message_time(params, machine.inject(TrafficKind::InterGpu), ppn, n, s);
  }
  return multi_message_time(params, n, s);
}

Seconds cpu_message_time(const MachineModel& machine, LocalityClass locality, Count ppn, Count n, Bytes s) {
  const PostalParams& params = select_protocol(machine.cpu_table(locality), s);
  if (locality == LocalityClass::OffNode) {
    return multi_message_time(params, machine.inject(TrafficKind::InterCpu), ppn, n, s);
  }
  return multi_message_time(params, n, s);
}

Seconds staging_copy_time(const MachineModel& machine, CopyDirection direction, Bytes staged,
                          Distribution distribution) {
  if (staged == 0.0) return 0.0;
  const MemcpyParams& mp = machine.memcpy(direction, SocketLocality::OnSocket);
  if (distribution != Distribution::DupDevptr) return memcpy_time(mp, staged);
  const double c = static_cast<double>(machine.cores_per_gpu_or_default());
  return machine.contention_factor * memcpy_time(mp, staged / c);
}

Seconds redistribution_time(const MachineModel& machine, Bytes staged) {
  const double c = static_cast<double>(machine.cores_per_gpu_or_default());
  const Bytes moved = staged * (c - 1.0) / c;
  if (moved == 0.0) return 0.0;
  return best_protocol_time(machine.cpu_table(LocalityClass::OnNode), moved);
}

Count active_cores_per_node(const MachineModel& machine, Count gpu_procs, Distribution distribution) {
  const Count per_gpu = distribution == Distribution::SingleCpu ? 1 : machine.cores_per_gpu_or_default();
  const Count cores = gpu_procs * per_gpu;
  if (gpu_procs < 1 || cores > machine.cores_per_node()) {
    throw std::invalid_argument("ppn " + std::to_string(gpu_procs) + " needs " + std::to_string(cores) +
                                " cores per node but machine '" + machine.name + "' has " +
                                std::to_string(machine.cores_per_node()));
  }
  return cores;
}

CostBreakdown gpudirect_path_time(const MachineModel& machine, LocalityClass locality, const TransferSpec& spec) {
  spec.validate();
  CostBreakdown out;
  out.add("gpu-direct", gpu_message_time(machine, locality, spec.ppn, spec.n_messages, spec.bytes_per_message));
  return out;
}

CostBreakdown three_step_time(const MachineModel& machine, const TransferSpec& spec, Distribution distribution) {
  spec.validate();
  const Count cores = active_cores_per_node(machine, spec.ppn, distribution);
  const Bytes staged = staged_bytes(spec);
  const bool split = distribution != Distribution::SingleCpu;
  const double c = static_cast<double>(machine.cores_per_gpu_or_default());
  const Bytes per_core_size = split ? spec.bytes_per_message / c : spec.bytes_per_message;

  CostBreakdown out;
  out.add("d2h", staging_copy_time(machine, CopyDirection::DeviceToHost, staged, distribution));
  if (distribution == Distribution::ExtraMsg) out.add("redistribute", redistribution_time(machine, staged));
  out.add("inter-cpu", cpu_message_time(machine, LocalityClass::OffNode, cores, spec.n_messages, per_core_size));
  if (distribution == Distribution::ExtraMsg) out.add("gather", redistribution_time(machine, staged));
  out.add("h2d", staging_copy_time(machine, CopyDirection::HostToDevice, staged, distribution));
  return out;
}

}  // namespace hetcomm
