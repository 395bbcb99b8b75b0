#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <stdexcept>

#include "hetcomm/error.hpp"
#include "hetcomm/topology.hpp"
#include "oracle.hpp"

using namespace hetcomm;

namespace {

Endpoint gpu(Count node, Count socket, Count dev) { return {node, socket, GpuDevice{dev}}; }
Endpoint cpu(Count node, Count socket, Count core) { return {node, socket, CpuCore{core}}; }

TEST(ClassifyPath, Examples) {
  const auto m = builtin_machine("summit");
  EXPECT_EQ(classify_path(m, gpu(0, 0, 0), gpu(0, 0, 1)), LocalityClass::OnSocket);
  EXPECT_EQ(classify_path(m, cpu(0, 0, 3), cpu(0, 1, 3)), LocalityClass::OnNode);
  EXPECT_EQ(classify_path(m, gpu(0, 0, 0), gpu(1, 0, 0)), LocalityClass::OffNode);
  EXPECT_EQ(classify_path(m, gpu(0, 1, 2), gpu(0, 1, 2)), LocalityClass::OnSocket);
  EXPECT_EQ(classify_path(m, gpu(0, 1, 2), cpu(0, 1, 19)), LocalityClass::OnSocket);
}

TEST(ClassifyPath, OutOfBoundsRejected) {
  const auto m = builtin_machine("summit");
  EXPECT_THROW((void)classify_path(m, gpu(32, 0, 0), gpu(0, 0, 0)), std::out_of_range);
  EXPECT_THROW((void)classify_path(m, gpu(0, 2, 0), gpu(0, 0, 0)), std::out_of_range);
  EXPECT_THROW((void)classify_path(m, gpu(0, 0, 3), gpu(0, 0, 0)), std::out_of_range);
  EXPECT_THROW((void)classify_path(m, cpu(0, 0, 20), gpu(0, 0, 0)), std::out_of_range);
}

TEST(GpuEndpoint, SocketMajorBlockLayout) {
  const auto m = builtin_machine("summit");
  EXPECT_EQ(gpu_endpoint(m, 0), gpu(0, 0, 0));
  EXPECT_EQ(gpu_endpoint(m, 2), gpu(0, 0, 2));
  EXPECT_EQ(gpu_endpoint(m, 3), gpu(0, 1, 0));
  EXPECT_EQ(gpu_endpoint(m, 7), gpu(1, 0, 1));
  EXPECT_THROW((void)gpu_endpoint(m, m.total_gpus()), std::out_of_range);
}

std::vector<Endpoint> all_endpoints(const MachineModel& m) {
  std::vector<Endpoint> out;
  for (Count n = 0; n < m.nodes; ++n) {
    for (Count s = 0; s < m.sockets_per_node; ++s) {
      for (Count g = 0; g < m.gpus_per_socket; ++g) out.push_back(gpu(n, s, g));
      for (Count c = 0; c < m.cpu_cores_per_socket; ++c) out.push_back(cpu(n, s, c));
    }
  }
  return out;
}

TEST(ClassifyPath, Symmetric) {
  const auto m = oracle::synthetic_two_node(2, 2, 3);
  const auto eps = all_endpoints(m);
  for (const auto& a : eps)
    for (const auto& b : eps) EXPECT_EQ(classify_path(m, a, b), classify_path(m, b, a));
}

TEST(ClassifyPath, OneSocketMachinesNeverOnNode) {
  std::mt19937_64 gen(21);
  for (int trial = 0; trial < 20; ++trial) {
    auto m = oracle::synthetic_two_node(1, 1 + gen() % 4, 1 + gen() % 6);
    m.nodes = 1 + gen() % 3;
    const auto eps = all_endpoints(m);
    for (const auto& a : eps)
      for (const auto& b : eps) EXPECT_NE(classify_path(m, a, b), LocalityClass::OnNode);
  }
}

TEST(BuiltinMachine, SummitValues) {
  const auto m = builtin_machine("summit");
  EXPECT_EQ(m.gpu_table(LocalityClass::OffNode).short_tier(), PostalParams(4.96e-6, 1.69e-10));
  EXPECT_TRUE(m.gpu_table(LocalityClass::OffNode).is_uniform());
  EXPECT_EQ(m.inject(TrafficKind::InterCpu).t_inject(), 3.0e-11);
  EXPECT_EQ(m.inject(TrafficKind::InterGpu).t_inject(), 5.1e-11);
  EXPECT_EQ(m.gpus_per_node(), 6u);
  EXPECT_EQ(m.cores_per_node(), 40u);
  EXPECT_EQ(m.cores_per_gpu_or_default(), 6u);
  EXPECT_TRUE(validate_machine(m).empty());
}

TEST(BuiltinMachine, UnknownName) {
  try {
    (void)builtin_machine("lassen");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("unknown machine"), std::string::npos);
  }
  EXPECT_EQ(builtin_machine_names(), std::vector<std::string>{"summit"});
}

TEST(ValidateMachine, MissingGpuTable) {
  auto m = builtin_machine("summit");
  m.gpu_tables.erase(LocalityClass::OnNode);
  const auto v = validate_machine(m);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_NE(v[0].find("on-node"), std::string::npos);
  EXPECT_THROW((void)m.gpu_table(LocalityClass::OnNode), ConfigError);
}

TEST(ValidateMachine, TooManyCoresPerGpu) {
  auto m = builtin_machine("summit");
  m.cores_per_gpu = 7;
  EXPECT_EQ(validate_machine(m).size(), 1u);
}

TEST(ValidateMachine, ReportsEachViolation) {
  auto m = builtin_machine("summit");
  m.nodes = 0;
  m.injection.erase(TrafficKind::InterGpu);
  m.memcpy_tables.erase({CopyDirection::HostToDevice, SocketLocality::OffSocket});
  m.contention_factor = 0.5;
  EXPECT_EQ(validate_machine(m).size(), 4u);
}

TEST(ValidateMachine, DefaultCoresPerGpu) {
  auto m = oracle::synthetic_two_node(2, 2, 8);
  EXPECT_FALSE(m.cores_per_gpu.has_value());
  EXPECT_EQ(m.cores_per_gpu_or_default(), 4u);
  EXPECT_TRUE(validate_machine(m).empty());
}

TEST(TopologyStrings, Names) {
  EXPECT_EQ(to_string(CopyDirection::HostToDevice), "host-to-device");
  EXPECT_EQ(to_string(SocketLocality::OffSocket), "off-socket");
  EXPECT_EQ(to_string(TrafficKind::InterGpu), "inter-gpu");
}

}  // namespace
