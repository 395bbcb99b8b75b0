#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "hetcomm/model.hpp"

namespace hetcomm {

/// Node topology plus every measured parameter for one machine.
///
/// Lookups through the accessor functions throw ConfigError when an entry is
/// missing; run validate_machine() first to get every problem at once.
struct MachineModel {
  std::string name;
  Count nodes = 1;
  Count sockets_per_node = 1;
  Count gpus_per_socket = 1;
  Count cpu_cores_per_socket = 1;
  /// Unset means floor(cores per node / GPUs per node).
  std::optional<Count> cores_per_gpu;

  std::map<LocalityClass, ProtocolTable> gpu_tables;
  std::map<LocalityClass, ProtocolTable> cpu_tables;
  std::map<std::pair<CopyDirection, SocketLocality>, MemcpyParams> memcpy_tables;
  std::map<TrafficKind, InjectionParams> injection;
  double contention_factor = 1.0;

  [[nodiscard]] Count gpus_per_node() const noexcept { return sockets_per_node * gpus_per_socket; }
  [[nodiscard]] Count cores_per_node() const noexcept { return sockets_per_node * cpu_cores_per_socket; }
  [[nodiscard]] Count total_gpus() const noexcept { return nodes * gpus_per_node(); }
  /// cores_per_gpu, or the derived default when unset.
  [[nodiscard]] Count cores_per_gpu_or_default() const noexcept;

  [[nodiscard]] const ProtocolTable& gpu_table(LocalityClass l) const;
  [[nodiscard]] const ProtocolTable& cpu_table(LocalityClass l) const;
  [[nodiscard]] const MemcpyParams& memcpy(CopyDirection d, SocketLocality l) const;
  [[nodiscard]] const InjectionParams& inject(TrafficKind k) const;

  friend bool operator==(const MachineModel&, const MachineModel&) = default;
};

struct CpuCore {
  Count core = 0;
  friend bool operator==(const CpuCore&, const CpuCore&) = default;
};
struct GpuDevice {
  Count device = 0;
  friend bool operator==(const GpuDevice&, const GpuDevice&) = default;
};

/// A CPU core or GPU; core/device indices are local to the socket.
struct Endpoint {
  Count node = 0;
  Count socket = 0;
  std::variant<CpuCore, GpuDevice> kind = GpuDevice{};

  friend bool operator==(const Endpoint&, const Endpoint&) = default;
};

/// OffNode if nodes differ, OnSocket if same socket (including a == b), else OnNode.
/// Throws std::out_of_range for endpoints outside the machine.
[[nodiscard]] LocalityClass classify_path(const MachineModel& machine, const Endpoint& a, const Endpoint& b);

/// Socket-major block layout: GPU rank r sits on node r / g, socket (r % g) / gpus_per_socket.
[[nodiscard]] Endpoint gpu_endpoint(const MachineModel& machine, Count rank);

/// One message per failed invariant; empty when the model is usable.
[[nodiscard]] std::vector<std::string> validate_machine(const MachineModel& machine);

/// Preset lookup.  Only "summit" is available; throws ConfigError otherwise.
[[nodiscard]] MachineModel builtin_machine(std::string_view name);

[[nodiscard]] std::vector<std::string> builtin_machine_names();

[[nodiscard]] std::string_view to_string(CopyDirection d);
[[nodiscard]] std::string_view to_string(SocketLocality l);
[[nodiscard]] std::string_view to_string(TrafficKind k);

}  // namespace hetcomm
