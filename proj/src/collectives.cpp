#include "hetcomm/collectives.hpp"

#include <algorithm>
#include <bit>
#include <exception>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>

#include "hetcomm/error.hpp"

namespace hetcomm {

std::string_view to_string(Strategy s) {
  switch (s) {
    case Strategy::CudaAware:
      return "cuda-aware";
    case Strategy::ThreeStep:
      return "3-step";
    case Strategy::ExtraMsg:
      return "extra-msg";
    case Strategy::DupDevptr:
      break;
  }
  return "dup-devptr";
}

std::string_view to_string(CollectiveOp op) {
  switch (op) {
    case CollectiveOp::Alltoall:
      return "alltoall";
    case CollectiveOp::Alltoallv:
      return "alltoallv";
    case CollectiveOp::Allreduce:
      break;
  }
  return "allreduce";
}

std::optional<Strategy> parse_strategy(std::string_view text) {
  for (auto s : kAllStrategies) {
    if (to_string(s) == text) return s;
  }
  return std::nullopt;
}

std::optional<CollectiveOp> parse_collective(std::string_view text) {
  for (auto op : {CollectiveOp::Alltoall, CollectiveOp::Alltoallv, CollectiveOp::Allreduce}) {
    if (to_string(op) == text) return op;
  }
  return std::nullopt;
}

std::optional<Distribution> distribution_of(Strategy s) {
  switch (s) {
    case Strategy::CudaAware:
      return std::nullopt;
    case Strategy::ThreeStep:
      return Distribution::SingleCpu;
    case Strategy::ExtraMsg:
      return Distribution::ExtraMsg;
    case Strategy::DupDevptr:
      break;
  }
  return Distribution::DupDevptr;
}

CollectiveSpec CollectiveSpec::uniform_alltoallv(Count gpus, Bytes bytes) {
  CollectiveSpec spec;
  spec.op = CollectiveOp::Alltoallv;
  spec.gpus = gpus;
  spec.bytes = bytes;
  spec.matrix.assign(gpus * gpus, bytes);
  for (Count i = 0; i < gpus; ++i) spec.matrix[i * gpus + i] = 0.0;
  return spec;
}

Bytes CollectiveSpec::pair_bytes(Count from, Count to) const {
  if (op == CollectiveOp::Alltoallv) return matrix[from * gpus + to];
  return from == to ? 0.0 : bytes;
}

void CollectiveSpec::validate(const MachineModel& machine) const {
  if (gpus < 1) throw std::invalid_argument("collective needs at least 1 gpu");
  if (gpus > machine.total_gpus()) {
    throw ConfigError("machine '" + machine.name + "' has only " + std::to_string(machine.total_gpus()) +
                      " gpus, collective asks for " + std::to_string(gpus));
  }
  if (!std::isfinite(bytes) || bytes < 0.0) throw std::invalid_argument("collective size must be finite and >= 0");
  if (!std::isfinite(reduce_rate) || reduce_rate < 0.0) throw std::invalid_argument("reduce_rate must be >= 0");
  if (op == CollectiveOp::Alltoallv) {
    if (matrix.size() != gpus * gpus) {
      throw std::invalid_argument("alltoallv matrix has " + std::to_string(matrix.size()) + " entries, expected " +
                                  std::to_string(gpus * gpus));
    }
    for (Count i = 0; i < gpus; ++i) {
      for (Count j = 0; j < gpus; ++j) {
        const double v = matrix[i * gpus + j];
        if (!std::isfinite(v) || v < 0.0) throw std::invalid_argument("alltoallv sizes must be finite and >= 0");
        if (i == j && v != 0.0) throw std::invalid_argument("alltoallv matrix must have a zero diagonal");
      }
    }
  }
}

Count MessagePlan::total_messages() const {
  Count n = 0;
  for (const auto& g : groups) n += g.n_messages;
  return n;
}

namespace {

struct Message {
  LocalityClass locality;
  Bytes bytes;
};

struct RankResult {
  CostBreakdown cost;
  MessagePlan plan;
};

Count active_gpus_on_node(const MachineModel& m, Count gpus, Count node) {
  const Count g = m.gpus_per_node();
  return std::min(g, gpus - node * g);
}

std::vector<PlannedMessages> group_messages(std::span<const Message> msgs, SenderKind kind) {
  std::map<std::pair<LocalityClass, Bytes>, Count> counts;
  for (const auto& m : msgs) ++counts[{m.locality, m.bytes}];
  std::vector<PlannedMessages> out;
  out.reserve(counts.size());
  for (const auto& [key, n] : counts) out.push_back({key.first, kind, n, key.second});
  return out;
}

// Per-locality message seconds, in locality order.
std::map<LocalityClass, Seconds> message_seconds(const MachineModel& m, std::span<const PlannedMessages> groups,
                                                 Count ppn) {
  std::map<LocalityClass, Seconds> out;
  for (const auto& g : groups) {
    const Seconds t = g.sender == SenderKind::Gpu
                          ? gpu_message_time(m, g.locality, ppn, g.n_messages, g.bytes_per_message)
                          : cpu_message_time(m, g.locality, ppn, g.n_messages, g.bytes_per_message);
    out[g.locality] += t;
  }
  return out;
}

Seconds sum_of(const std::map<LocalityClass, Seconds>& by_loc) {
  Seconds t = 0.0;
  for (const auto& [l, s] : by_loc) t += s;
  return t;
}

void add_message_phases(CostBreakdown& out, std::string_view prefix, const std::map<LocalityClass, Seconds>& by_loc) {
  for (const auto& [l, s] : by_loc) out.add(std::string(prefix) + ":" + std::string(to_string(l)), s);
}

CostBreakdown compose(const MachineModel& m, Strategy strategy, const MessagePlan& plan, Seconds reduce_rate) {
  CostBreakdown out;
  const auto by_loc = message_seconds(m, plan.groups, plan.ppn);
  if (auto dist = distribution_of(strategy)) {
    out.add("d2h", staging_copy_time(m, CopyDirection::DeviceToHost, plan.staged_send, *dist));
    if (*dist == Distribution::ExtraMsg) out.add("redistribute", redistribution_time(m, plan.staged_send));
    add_message_phases(out, "inter-cpu", by_loc);
    if (*dist == Distribution::ExtraMsg) out.add("gather", redistribution_time(m, plan.staged_recv));
    out.add("h2d", staging_copy_time(m, CopyDirection::HostToDevice, plan.staged_recv, *dist));
  } else {
    add_message_phases(out, "gpu-direct", by_loc);
  }
  if (reduce_rate > 0.0 && plan.reduction_steps > 0) {
    out.add("reduce", reduce_rate * static_cast<double>(plan.reduction_steps) * plan.reduced_bytes_per_step);
  }
  return out;
}

RankResult evaluate_pairwise(const MachineModel& m, const CollectiveSpec& spec, Strategy strategy, Count rank) {
  const Endpoint self = gpu_endpoint(m, rank);
  std::vector<Message> dests;
  Bytes recv = 0.0;
  for (Count d = 0; d < spec.gpus; ++d) {
    if (d == rank) continue;
    recv += spec.pair_bytes(d, rank);
    const Bytes b = spec.pair_bytes(rank, d);
    if (spec.op == CollectiveOp::Alltoallv && b == 0.0) continue;
    dests.push_back({classify_path(m, self, gpu_endpoint(m, d)), b});
  }
  Bytes send = 0.0;
  for (const auto& msg : dests) send += msg.bytes;

  const Count gpus_here = active_gpus_on_node(m, spec.gpus, self.node);
  const auto dist = distribution_of(strategy);

  MessagePlan plan;
  plan.sender_rank = rank;
  if (!dist) {
    plan.groups = group_messages(dests, SenderKind::Gpu);
    plan.ppn = gpus_here;
    return {compose(m, strategy, plan, 0.0), plan};
  }
  plan.staged_send = send;
  plan.staged_recv = recv;
  plan.ppn = active_cores_per_node(m, gpus_here, *dist);
  if (*dist == Distribution::SingleCpu) {
    plan.groups = group_messages(dests, SenderKind::Cpu);
    return {compose(m, strategy, plan, 0.0), plan};
  }

  // Destinations are dealt round-robin to the GPU's cores; the costliest core
  // (lowest index on ties) represents the rank.
  const Count c = m.cores_per_gpu_or_default();
  Seconds worst = -1.0;
  for (Count core = 0; core < c; ++core) {
    std::vector<Message> share;
    for (std::size_t i = core; i < dests.size(); i += c) share.push_back(dests[i]);
    auto groups = group_messages(share, SenderKind::Cpu);
    const Seconds t = sum_of(message_seconds(m, groups, plan.ppn));
    if (t > worst) {
      worst = t;
      plan.groups = std::move(groups);
      plan.sender_core = core;
    }
  }
  return {compose(m, strategy, plan, 0.0), plan};
}

Count ceil_log2(Count p) { return p <= 1 ? 0 : static_cast<Count>(std::bit_width(p - 1)); }
Count floor_log2(Count g) { return g == 0 ? 0 : static_cast<Count>(std::bit_width(g) - 1); }

RankResult evaluate_allreduce(const MachineModel& m, const CollectiveSpec& spec, Strategy strategy) {
  const Count p = spec.gpus;
  const Count steps = ceil_log2(p);
  const Count g = m.gpus_per_node();
  const bool single_node = p <= g;
  const bool large = spec.bytes >= static_cast<double>(m.cpu_table(LocalityClass::OffNode).eager_max_bytes());
  const auto dist = distribution_of(strategy);
  const bool split = dist && *dist != Distribution::SingleCpu;
  const double divisor = split ? static_cast<double>(m.cores_per_gpu_or_default()) : 1.0;

  Bytes per_message = spec.bytes / divisor;
  if (large && steps > 0) {
    const double pd = static_cast<double>(p);
    per_message = spec.bytes * (pd - 1.0) / (pd * static_cast<double>(steps)) / divisor;
  }

  const Endpoint root = gpu_endpoint(m, 0);
  std::vector<Message> msgs;
  for (Count k = 0; k < steps; ++k) {
    const bool on_node = single_node || k < floor_log2(g);
    const LocalityClass loc =
        on_node ? classify_path(m, root, gpu_endpoint(m, Count{1} << k)) : LocalityClass::OffNode;
    msgs.push_back({loc, per_message});
    if (large) msgs.push_back({loc, per_message});
  }

  MessagePlan plan;
  plan.groups = group_messages(msgs, dist ? SenderKind::Cpu : SenderKind::Gpu);
  const Count gpus_here = active_gpus_on_node(m, p, 0);
  plan.ppn = dist ? active_cores_per_node(m, gpus_here, *dist) : gpus_here;
  if (dist && steps > 0) {
    plan.staged_send = spec.bytes;
    plan.staged_recv = spec.bytes;
  }
  plan.reduction_steps = steps;
  plan.reduced_bytes_per_step = per_message;
  return {compose(m, strategy, plan, spec.reduce_rate), plan};
}

std::vector<Count> ranks_to_evaluate(const CollectiveSpec& spec) {
  if (spec.op == CollectiveOp::Allreduce) return {0};
  std::vector<Count> r(spec.gpus);
  for (Count i = 0; i < spec.gpus; ++i) r[i] = i;
  return r;
}

RankResult evaluate(const MachineModel& m, const CollectiveSpec& spec, Strategy strategy, Count rank) {
  if (spec.op == CollectiveOp::Allreduce) return evaluate_allreduce(m, spec, strategy);
  return evaluate_pairwise(m, spec, strategy, rank);
}

std::size_t busiest(const std::vector<RankResult>& results) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < results.size(); ++i) {
    if (results[i].cost.total() > results[best].cost.total()) best = i;
  }
  return best;
}

RankResult busiest_rank(const MachineModel& m, const CollectiveSpec& spec, Strategy strategy, bool parallel) {
  spec.validate(m);
  const auto ranks = ranks_to_evaluate(spec);
  std::vector<RankResult> results(ranks.size());
  const auto n = static_cast<std::ptrdiff_t>(ranks.size());
  if (parallel) {
    // Exceptions cannot leave an OpenMP region; capture the first and rethrow.
    std::exception_ptr failure;
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      try {
        results[i] = evaluate(m, spec, strategy, ranks[i]);
      } catch (...) {
#pragma omp critical(hetcomm_collective_error)
        if (!failure) failure = std::current_exception();
      }
    }
    if (failure) std::rethrow_exception(failure);
  } else {
    for (std::ptrdiff_t i = 0; i < n; ++i) results[i] = evaluate(m, spec, strategy, ranks[i]);
  }
  return results[busiest(results)];
}

StrategyReport compare(const MachineModel& m, const CollectiveSpec& spec, bool parallel) {
  StrategyReport report;
  for (auto s : kAllStrategies) report.costs[static_cast<std::size_t>(s)] = busiest_rank(m, spec, s, parallel).cost;
  const Seconds base = report.cost(Strategy::CudaAware).total();
  for (auto s : kAllStrategies) {
    const Seconds t = report.cost(s).total();
    double speedup = 1.0;
    if (t > 0.0) {
      speedup = base / t;
    } else if (base > 0.0) {
      speedup = std::numeric_limits<double>::infinity();
    }
    report.speedup_vs_cuda_aware[static_cast<std::size_t>(s)] = speedup;
    if (t < report.cost(report.cheapest).total()) report.cheapest = s;
  }
  report.speedup_vs_cuda_aware[0] = 1.0;
  return report;
}

CollectiveSpec at_size(const CollectiveSpec& tmpl, Bytes size) {
  CollectiveSpec spec = tmpl;
  spec.bytes = size;
  if (spec.op == CollectiveOp::Alltoallv) {
    for (auto& v : spec.matrix) v *= size;
  }
  return spec;
}

std::vector<SweepRow> run_sweep(const MachineModel& m, const CollectiveSpec& tmpl, std::span<const Bytes> sizes,
                                bool parallel) {
  if (sizes.empty()) throw std::invalid_argument("sweep needs at least one size");
  std::vector<SweepRow> rows(sizes.size() * kAllStrategies.size());
  auto fill = [&](std::size_t i) {
    const StrategyReport r = compare(m, at_size(tmpl, sizes[i]), false);
    for (std::size_t k = 0; k < kAllStrategies.size(); ++k) {
      const Strategy s = kAllStrategies[k];
      rows[i * kAllStrategies.size() + k] = {sizes[i], s, r.cost(s).total(), r.speedup(s), s == r.cheapest};
    }
  };
  const auto n = static_cast<std::ptrdiff_t>(sizes.size());
  if (parallel) {
    std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      try {
        fill(static_cast<std::size_t>(i));
      } catch (...) {
#pragma omp critical(hetcomm_sweep_error)
        if (!failure) failure = std::current_exception();
      }
    }
    if (failure) std::rethrow_exception(failure);
  } else {
    for (std::ptrdiff_t i = 0; i < n; ++i) fill(static_cast<std::size_t>(i));
  }
  return rows;
}

}  // namespace

MessagePlan message_plan(const MachineModel& machine, const CollectiveSpec& spec, Strategy strategy) {
  return busiest_rank(machine, spec, strategy, false).plan;
}

CostBreakdown collective_cost(const MachineModel& machine, const CollectiveSpec& spec, Strategy strategy) {
  return busiest_rank(machine, spec, strategy, true).cost;
}

CostBreakdown collective_cost_serial(const MachineModel& machine, const CollectiveSpec& spec, Strategy strategy) {
  return busiest_rank(machine, spec, strategy, false).cost;
}

StrategyReport compare_strategies(const MachineModel& machine, const CollectiveSpec& spec) {
  return compare(machine, spec, true);
}

std::optional<Count> crossover_message_count(const MachineModel& machine, Bytes s, double dedup, Count n_max) {
  if (!(s > 0.0) || !std::isfinite(s)) throw std::invalid_argument("crossover size must be > 0");
  if (n_max < 1) throw std::invalid_argument("n_max must be >= 1");
  for (Count n = 1; n <= n_max; ++n) {
    const TransferSpec spec{n, s, 1, dedup};
    const Seconds staged = three_step_time(machine, spec, Distribution::SingleCpu).total();
    const Seconds direct = gpudirect_path_time(machine, LocalityClass::OffNode, spec).total();
    if (staged < direct) return n;
  }
  return std::nullopt;
}

std::vector<SweepRow> sweep(const MachineModel& machine, const CollectiveSpec& spec_template,
                            std::span<const Bytes> sizes) {
  return run_sweep(machine, spec_template, sizes, true);
}

std::vector<SweepRow> sweep_serial(const MachineModel& machine, const CollectiveSpec& spec_template,
                                   std::span<const Bytes> sizes) {
  return run_sweep(machine, spec_template, sizes, false);
}

}  // namespace hetcomm
