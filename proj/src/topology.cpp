#include "hetcomm/topology.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "hetcomm/error.hpp"

namespace hetcomm {

Count MachineModel::cores_per_gpu_or_default() const noexcept {
  if (cores_per_gpu) return *cores_per_gpu;
  const Count g = gpus_per_node();
  return g == 0 ? 0 : cores_per_node() / g;
}

const ProtocolTable& MachineModel::gpu_table(LocalityClass l) const {
  auto it = gpu_tables.find(l);
  if (it == gpu_tables.end()) throw ConfigError("machine '" + name + "' has no gpu table for " + std::string(to_string(l)));
  return it->second;
}

const ProtocolTable& MachineModel::cpu_table(LocalityClass l) const {
  auto it = cpu_tables.find(l);
  if (it == cpu_tables.end()) throw ConfigError("machine '" + name + "' has no cpu table for " + std::string(to_string(l)));
  return it->second;
}

const MemcpyParams& MachineModel::memcpy(CopyDirection d, SocketLocality l) const {
  auto it = memcpy_tables.find({d, l});
  if (it == memcpy_tables.end()) {
    throw ConfigError("machine '" + name + "' has no memcpy entry for " + std::string(to_string(d)) + "/" +
                      std::string(to_string(l)));
  }
  return it->second;
}

const InjectionParams& MachineModel::inject(TrafficKind k) const {
  auto it = injection.find(k);
  if (it == injection.end()) throw ConfigError("machine '" + name + "' has no injection entry for " + std::string(to_string(k)));
  return it->second;
}

namespace {

void check_endpoint(const MachineModel& m, const Endpoint& e) {
  if (e.node >= m.nodes) throw std::out_of_range("endpoint node index out of range");
  if (e.socket >= m.sockets_per_node) throw std::out_of_range("endpoint socket index out of range");
  if (const auto* cpu = std::get_if<CpuCore>(&e.kind)) {
    if (cpu->core >= m.cpu_cores_per_socket) throw std::out_of_range("endpoint core index out of range");
  } else if (std::get<GpuDevice>(e.kind).device >= m.gpus_per_socket) {
    throw std::out_of_range("endpoint gpu index out of range");
  }
}

}  // namespace

LocalityClass classify_path(const MachineModel& machine, const Endpoint& a, const Endpoint& b) {
  check_endpoint(machine, a);
  check_endpoint(machine, b);
  if (a.node != b.node) return LocalityClass::OffNode;
  if (a.socket == b.socket) return LocalityClass::OnSocket;
  return LocalityClass::OnNode;
}

Endpoint gpu_endpoint(const MachineModel& machine, Count rank) {
  const Count g = machine.gpus_per_node();
  if (g == 0 || rank >= machine.total_gpus()) throw std::out_of_range("gpu rank outside the machine");
  const Count local = rank % g;
  return Endpoint{rank / g, local / machine.gpus_per_socket, GpuDevice{local % machine.gpus_per_socket}};
}

std::vector<std::string> validate_machine(const MachineModel& m) {
  std::vector<std::string> out;
  auto count_ok = [&](Count v, const char* field) {
    if (v < 1) out.push_back(std::string(field) + " must be >= 1");
  };
  count_ok(m.nodes, "nodes");
  count_ok(m.sockets_per_node, "sockets_per_node");
  count_ok(m.gpus_per_socket, "gpus_per_socket");
  count_ok(m.cpu_cores_per_socket, "cpu_cores_per_socket");

  if (m.cores_per_gpu && *m.cores_per_gpu < 1) out.push_back("cores_per_gpu must be >= 1");
  const Count c = m.cores_per_gpu_or_default();
  if (m.gpus_per_node() > 0 && c * m.gpus_per_node() > m.cores_per_node()) {
    std::ostringstream msg;
    msg << "cores_per_gpu * gpus per node = " << c * m.gpus_per_node() << " exceeds cores per node ("
        << m.cores_per_node() << ")";
    out.push_back(msg.str());
  } else if (!m.cores_per_gpu && c < 1) {
    out.push_back("fewer cpu cores than gpus per node; cores_per_gpu would be 0");
  }

  for (auto l : kAllLocalities) {
    if (!m.gpu_tables.contains(l)) out.push_back("gpu_tables is missing " + std::string(to_string(l)));
    if (!m.cpu_tables.contains(l)) out.push_back("cpu_tables is missing " + std::string(to_string(l)));
  }
  for (auto d : {CopyDirection::HostToDevice, CopyDirection::DeviceToHost}) {
    for (auto l : {SocketLocality::OnSocket, SocketLocality::OffSocket}) {
      auto it = m.memcpy_tables.find({d, l});
      if (it == m.memcpy_tables.end()) {
        out.push_back("memcpy_tables is missing " + std::string(to_string(d)) + "/" + std::string(to_string(l)));
      } else if (it->second.direction != d || it->second.locality != l) {
        out.push_back("memcpy_tables entry " + std::string(to_string(d)) + "/" + std::string(to_string(l)) +
                      " is labelled inconsistently");
      }
    }
  }
  for (auto k : {TrafficKind::InterCpu, TrafficKind::InterGpu}) {
    if (!m.injection.contains(k)) out.push_back("injection is missing " + std::string(to_string(k)));
  }
  if (!(m.contention_factor >= 1.0) || !std::isfinite(m.contention_factor)) {
    out.push_back("contention_factor must be finite and >= 1");
  }
  return out;
}

namespace {

MachineModel summit() {
  MachineModel m;
  m.name = "summit";
  m.nodes = 32;
  m.sockets_per_node = 2;
  m.gpus_per_socket = 3;
  m.cpu_cores_per_socket = 20;
  m.cores_per_gpu = 6;

  // CUDA-aware inter-GPU postal parameters, one pair per locality.
  m.gpu_tables[LocalityClass::OnSocket] = ProtocolTable::uniform({1.68e-05, 1.86e-11});
  m.gpu_tables[LocalityClass::OnNode] = ProtocolTable::uniform({1.80e-05, 2.09e-11});
  m.gpu_tables[LocalityClass::OffNode] = ProtocolTable::uniform({4.96e-06, 1.69e-10});

  // Inter-CPU: short, eager, rendezvous.
  m.cpu_tables[LocalityClass::OnSocket] = ProtocolTable({3.51e-07, 2.62e-10}, {4.73e-07, 6.95e-11}, {2.46e-06, 3.31e-11});
  m.cpu_tables[LocalityClass::OnNode] = ProtocolTable({9.08e-07, 1.46e-09}, {1.17e-06, 2.16e-10}, {5.81e-06, 1.46e-10});
  m.cpu_tables[LocalityClass::OffNode] = ProtocolTable({1.38e-06, 3.82e-10}, {1.85e-06, 3.93e-10}, {6.56e-06, 8.51e-11});

  using enum CopyDirection;
  using enum SocketLocality;
  m.memcpy_tables[{HostToDevice, OnSocket}] = {HostToDevice, OnSocket, {1.09e-05, 2.38e-11}};
  m.memcpy_tables[{DeviceToHost, OnSocket}] = {DeviceToHost, OnSocket, {1.09e-05, 2.36e-11}};
  m.memcpy_tables[{HostToDevice, OffSocket}] = {HostToDevice, OffSocket, {1.26e-05, 2.71e-11}};
  m.memcpy_tables[{DeviceToHost, OffSocket}] = {DeviceToHost, OffSocket, {1.25e-05, 2.72e-11}};

  m.injection.emplace(TrafficKind::InterCpu, InjectionParams(3.0e-11));
  m.injection.emplace(TrafficKind::InterGpu, InjectionParams(5.1e-11));
  m.contention_factor = 1.0;
  return m;
}

}  // namespace

MachineModel builtin_machine(std::string_view name) {
  if (name == "summit") return summit();
  throw ConfigError("unknown machine '" + std::string(name) + "' (available: summit)");
}

std::vector<std::string> builtin_machine_names() { return {"summit"}; }

std::string_view to_string(CopyDirection d) {
  return d == CopyDirection::HostToDevice ? "host-to-device" : "device-to-host";
}

std::string_view to_string(SocketLocality l) { return l == SocketLocality::OnSocket ? "on-socket" : "off-socket"; }

std::string_view to_string(TrafficKind k) { return k == TrafficKind::InterCpu ? "inter-cpu" : "inter-gpu"; }

}  // namespace hetcomm
