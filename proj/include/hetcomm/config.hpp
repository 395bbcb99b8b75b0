#pragma once

// Machine config files: JSON with `//` and `/* */` comments allowed.
// Strict: unknown keys and wrong types are ConfigErrors.  Missing table
// entries are left out of the model so validate_machine() can report them.
//
//   {
//     "name": "summit",
//     "nodes": 32, "sockets_per_node": 2, "gpus_per_socket": 3,
//     "cpu_cores_per_socket": 20, "cores_per_gpu": 6,      // cores_per_gpu optional
//     "contention_factor": 1.0,                            // optional
//     "gpu_tables": { "on-socket": <table>, "on-node": <table>, "off-node": <table> },
//     "cpu_tables": { ...same keys... },
//     "memcpy_tables": {
//       "host-to-device": { "on-socket": {"alpha": a, "beta": b}, "off-socket": {...} },
//       "device-to-host": { ... } },
//     "injection": { "inter-cpu": {"t_inject": t}, "inter-gpu": {"t_inject": t} }
//   }
//
// <table> is either {"alpha": a, "beta": b} (all tiers equal) or
// {"short": {...}, "eager": {...}, "rendezvous": {...}}; both forms accept
// optional "short_max_bytes" and "eager_max_bytes".

#include <filesystem>
#include <string>
#include <string_view>

#include "hetcomm/topology.hpp"

namespace hetcomm {

[[nodiscard]] MachineModel parse_machine_config(std::string_view text);
[[nodiscard]] MachineModel load_machine_config(const std::filesystem::path& path);

/// Serializes every field; parse_machine_config(machine_to_config(m)) == m.
[[nodiscard]] std::string machine_to_config(const MachineModel& machine);

/// JSON text for a single protocol table (used for fit fragments).
[[nodiscard]] std::string protocol_table_to_config(const ProtocolTable& table);

}  // namespace hetcomm
