#include "hetcomm/config.hpp"

#include <fstream>
#include <initializer_list>
#include <sstream>

#include <json.hpp>

#include "hetcomm/error.hpp"

namespace hetcomm {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw ConfigError("machine config: " + where + ": " + what);
}

void only_keys(const json& obj, const std::string& where, std::initializer_list<std::string_view> allowed) {
  if (!obj.is_object()) fail(where, "expected an object");
  for (const auto& [key, value] : obj.items()) {
    bool known = false;
    for (auto a : allowed) known = known || key == a;
    if (!known) fail(where, "unknown key '" + key + "'");
  }
}

const json& required(const json& obj, const std::string& where, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) fail(where, std::string("missing key '") + key + "'");
  return *it;
}

Count as_count(const json& v, const std::string& where) {
  if (!v.is_number_unsigned()) fail(where, "expected a non-negative integer");
  return v.get<Count>();
}

double as_number(const json& v, const std::string& where) {
  if (!v.is_number()) fail(where, "expected a number");
  return v.get<double>();
}

PostalParams postal_from(const json& obj, const std::string& where) {
  only_keys(obj, where, {"alpha", "beta"});
  const double alpha = as_number(required(obj, where, "alpha"), where + ".alpha");
  const double beta = as_number(required(obj, where, "beta"), where + ".beta");
  try {
    return PostalParams(alpha, beta);
  } catch (const std::invalid_argument& e) {
    fail(where, e.what());
  }
}

ProtocolTable table_from(const json& obj, const std::string& where) {
  if (!obj.is_object()) fail(where, "expected an object");
  std::uint64_t short_max = kDefaultShortMaxBytes;
  std::uint64_t eager_max = kDefaultEagerMaxBytes;
  if (obj.contains("short_max_bytes")) short_max = as_count(obj["short_max_bytes"], where + ".short_max_bytes");
  if (obj.contains("eager_max_bytes")) eager_max = as_count(obj["eager_max_bytes"], where + ".eager_max_bytes");
  try {
    if (obj.contains("alpha") || obj.contains("beta")) {
      only_keys(obj, where, {"alpha", "beta", "short_max_bytes", "eager_max_bytes"});
      json pair = {{"alpha", required(obj, where, "alpha")}, {"beta", required(obj, where, "beta")}};
      return ProtocolTable::uniform(postal_from(pair, where), short_max, eager_max);
    }
    only_keys(obj, where, {"short", "eager", "rendezvous", "short_max_bytes", "eager_max_bytes"});
    return ProtocolTable(postal_from(required(obj, where, "short"), where + ".short"),
                         postal_from(required(obj, where, "eager"), where + ".eager"),
                         postal_from(required(obj, where, "rendezvous"), where + ".rendezvous"), short_max,
                         eager_max);
  } catch (const std::invalid_argument& e) {
    fail(where, e.what());
  }
}

std::map<LocalityClass, ProtocolTable> tables_from(const json& obj, const std::string& where) {
  only_keys(obj, where, {"on-socket", "on-node", "off-node"});
  std::map<LocalityClass, ProtocolTable> out;
  for (auto l : kAllLocalities) {
    const std::string key(to_string(l));
    if (obj.contains(key)) out[l] = table_from(obj[key], where + "." + key);
  }
  return out;
}

json postal_to(const PostalParams& p) { return {{"alpha", p.alpha()}, {"beta", p.beta()}}; }

json table_to(const ProtocolTable& t) {
  json out;
  if (t.is_uniform()) {
    out = postal_to(t.short_tier());
  } else {
    out["short"] = postal_to(t.short_tier());
    out["eager"] = postal_to(t.eager_tier());
    out["rendezvous"] = postal_to(t.rendezvous_tier());
  }
  out["short_max_bytes"] = t.short_max_bytes();
  out["eager_max_bytes"] = t.eager_max_bytes();
  return out;
}

}  // namespace

MachineModel parse_machine_config(std::string_view text) {
  json root;
  try {
    root = json::parse(text, nullptr, /*allow_exceptions=*/true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("machine config: invalid JSON: ") + e.what());
  }
  only_keys(root, "top level",
            {"name", "nodes", "sockets_per_node", "gpus_per_socket", "cpu_cores_per_socket", "cores_per_gpu",
             "contention_factor", "gpu_tables", "cpu_tables", "memcpy_tables", "injection"});

  MachineModel m;
  const json& name = required(root, "top level", "name");
  if (!name.is_string()) fail("name", "expected a string");
  m.name = name.get<std::string>();
  m.nodes = as_count(required(root, "top level", "nodes"), "nodes");
  m.sockets_per_node = as_count(required(root, "top level", "sockets_per_node"), "sockets_per_node");
  m.gpus_per_socket = as_count(required(root, "top level", "gpus_per_socket"), "gpus_per_socket");
  m.cpu_cores_per_socket = as_count(required(root, "top level", "cpu_cores_per_socket"), "cpu_cores_per_socket");
  if (root.contains("cores_per_gpu")) m.cores_per_gpu = as_count(root["cores_per_gpu"], "cores_per_gpu");
  if (root.contains("contention_factor")) m.contention_factor = as_number(root["contention_factor"], "contention_factor");

  if (root.contains("gpu_tables")) m.gpu_tables = tables_from(root["gpu_tables"], "gpu_tables");
  if (root.contains("cpu_tables")) m.cpu_tables = tables_from(root["cpu_tables"], "cpu_tables");

  if (root.contains("memcpy_tables")) {
    const json& mt = root["memcpy_tables"];
    only_keys(mt, "memcpy_tables", {"host-to-device", "device-to-host"});
    for (auto d : {CopyDirection::HostToDevice, CopyDirection::DeviceToHost}) {
      const std::string dkey(to_string(d));
      if (!mt.contains(dkey)) continue;
      const std::string where = "memcpy_tables." + dkey;
      only_keys(mt[dkey], where, {"on-socket", "off-socket"});
      for (auto l : {SocketLocality::OnSocket, SocketLocality::OffSocket}) {
        const std::string lkey(to_string(l));
        if (!mt[dkey].contains(lkey)) continue;
        m.memcpy_tables[{d, l}] = MemcpyParams{d, l, postal_from(mt[dkey][lkey], where + "." + lkey)};
      }
    }
  }

  if (root.contains("injection")) {
    const json& inj = root["injection"];
    only_keys(inj, "injection", {"inter-cpu", "inter-gpu"});
    for (auto k : {TrafficKind::InterCpu, TrafficKind::InterGpu}) {
      const std::string key(to_string(k));
      if (!inj.contains(key)) continue;
      const std::string where = "injection." + key;
      only_keys(inj[key], where, {"t_inject"});
      const double t = as_number(required(inj[key], where, "t_inject"), where + ".t_inject");
      try {
        m.injection.emplace(k, InjectionParams(t));
      } catch (const std::invalid_argument& e) {
        fail(where, e.what());
      }
    }
  }
  return m;
}

MachineModel load_machine_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read machine config '" + path.string() + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_machine_config(text.str());
}

std::string machine_to_config(const MachineModel& m) {
  json root;
  root["name"] = m.name;
  root["nodes"] = m.nodes;
  root["sockets_per_node"] = m.sockets_per_node;
  root["gpus_per_socket"] = m.gpus_per_socket;
  root["cpu_cores_per_socket"] = m.cpu_cores_per_socket;
  if (m.cores_per_gpu) root["cores_per_gpu"] = *m.cores_per_gpu;
  root["contention_factor"] = m.contention_factor;
  for (const auto& [l, t] : m.gpu_tables) root["gpu_tables"][std::string(to_string(l))] = table_to(t);
  for (const auto& [l, t] : m.cpu_tables) root["cpu_tables"][std::string(to_string(l))] = table_to(t);
  for (const auto& [key, mp] : m.memcpy_tables) {
    root["memcpy_tables"][std::string(to_string(key.first))][std::string(to_string(key.second))] = postal_to(mp.params);
  }
  for (const auto& [k, inj] : m.injection) root["injection"][std::string(to_string(k))] = {{"t_inject", inj.t_inject()}};
  return root.dump(2) + "\n";
}

std::string protocol_table_to_config(const ProtocolTable& table) { return table_to(table).dump(2); }

}  // namespace hetcomm
