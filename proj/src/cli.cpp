#include "hetcomm/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "hetcomm/collectives.hpp"
#include "hetcomm/config.hpp"
#include "hetcomm/error.hpp"
#include "hetcomm/fitting.hpp"
#include "hetcomm/paths.hpp"
#include "hetcomm/table.hpp"
#include "hetcomm/topology.hpp"

namespace hetcomm::cli {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = text.find(sep, start);
    out.push_back(trim(text.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) return out;
    start = pos + 1;
  }
}

double parse_size(std::string_view item) {
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), value);
  if (ec != std::errc() || ptr == item.data()) throw ConfigError("invalid size '" + std::string(item) + "'");
  std::string suffix(ptr, item.data() + item.size());
  std::transform(suffix.begin(), suffix.end(), suffix.begin(), [](unsigned char c) { return std::toupper(c); });
  double scale = 1.0;
  if (suffix.empty() || suffix == "B") {
    scale = 1.0;
  } else if (suffix == "K" || suffix == "KB" || suffix == "KIB") {
    scale = 1024.0;
  } else if (suffix == "M" || suffix == "MB" || suffix == "MIB") {
    scale = 1024.0 * 1024.0;
  } else if (suffix == "G" || suffix == "GB" || suffix == "GIB") {
    scale = 1024.0 * 1024.0 * 1024.0;
  } else {
    throw ConfigError("invalid size suffix in '" + std::string(item) + "'");
  }
  const double bytes = value * scale;
  if (!std::isfinite(bytes)) throw ConfigError("invalid size '" + std::string(item) + "'");
  if (!(bytes > 0.0)) throw ConfigError("sizes must be positive (got '" + std::string(item) + "')");
  return bytes;
}

}  // namespace

std::vector<Bytes> parse_sizes(std::string_view text) {
  std::vector<Bytes> sizes;
  if (trim(text).empty()) throw ConfigError("empty size list");
  for (auto item : split(text, ',')) {
    if (item.empty()) throw ConfigError("empty entry in size list '" + std::string(text) + "'");
    if (item.find(':') == std::string_view::npos) {
      sizes.push_back(parse_size(item));
      continue;
    }
    const auto parts = split(item, ':');
    if (parts.size() != 3 || parts[2].empty() || (parts[2][0] != 'x' && parts[2][0] != 'X')) {
      throw ConfigError("size range '" + std::string(item) + "' must look like start:stop:xFACTOR");
    }
    const double start = parse_size(parts[0]);
    const double stop = parse_size(parts[1]);
    double factor = 0.0;
    const auto f = parts[2].substr(1);
    auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), factor);
    if (ec != std::errc() || ptr != f.data() + f.size() || !(factor > 1.0)) {
      throw ConfigError("size range factor in '" + std::string(item) + "' must be a number > 1");
    }
    if (stop < start) throw ConfigError("size range '" + std::string(item) + "' has stop < start");
    for (double s = start; s <= stop * (1.0 + 1e-12); s *= factor) sizes.push_back(s);
  }
  std::sort(sizes.begin(), sizes.end());
  sizes.erase(std::unique(sizes.begin(), sizes.end()), sizes.end());
  return sizes;
}

namespace {

struct Common {
  std::string machine;
  std::string config;
  std::string format = "csv";
  std::string output;
};

void add_common(CLI::App* cmd, Common& c, bool needs_machine) {
  if (needs_machine) {
    auto* m = cmd->add_option("--machine", c.machine, "Built-in machine preset (default: summit)");
    auto* f = cmd->add_option("--config", c.config, "Machine config file");
    m->excludes(f);
  }
  cmd->add_option("--format", c.format, "Output format")->check(CLI::IsMember({"csv", "table"}));
  cmd->add_option("--output,-o", c.output, "Write the table to this file instead of stdout");
}

MachineModel resolve_machine(const Common& c, std::ostream& err) {
  MachineModel m = c.config.empty() ? builtin_machine(c.machine.empty() ? "summit" : c.machine)
                                    : load_machine_config(c.config);
  const auto violations = validate_machine(m);
  if (!violations.empty()) {
    for (const auto& v : violations) err << v << '\n';
    throw ConfigError("machine '" + m.name + "' failed validation");
  }
  return m;
}

template <class Write>
void with_destination(const Common& c, std::ostream& out, Write write) {
  if (c.output.empty()) return write(out);
  std::ofstream file(c.output);
  if (!file) throw ConfigError("cannot write '" + c.output + "'");
  write(file);
}

void emit(const Table& t, const Common& c, std::ostream& out) {
  with_destination(c, out, [&](std::ostream& dest) {
    if (c.format == "table") {
      write_aligned(dest, t);
    } else {
      write_csv(dest, t);
    }
  });
}

struct PredictOptions {
  std::string paths = "gpudirect,3step";
  std::string sizes = "1:1G:x4";
  Count messages = 1;
  Count ppn = 1;
  double dedup = 0.0;
  std::string locality = "off-node";
};

void check_dedup(double dedup) {
  if (!(dedup >= 0.0 && dedup <= 1.0)) throw ConfigError("dedup must lie in [0, 1]");
}

Table cmd_predict(const MachineModel& m, const PredictOptions& o) {
  check_dedup(o.dedup);
  if (o.ppn < 1) throw ConfigError("ppn must be >= 1");
  const auto loc = parse_locality(o.locality);
  if (!loc) throw ConfigError("unknown locality '" + o.locality + "' (on-socket, on-node, off-node)");

  std::vector<std::string> paths;
  for (auto p : split(o.paths, ',')) {
    if (p != "gpudirect" && p != "3step" && p != "extramsg" && p != "dupdevptr") {
      throw ConfigError("unknown path '" + std::string(p) + "' (gpudirect, 3step, extramsg, dupdevptr)");
    }
    paths.emplace_back(p);
  }
  const auto sizes = parse_sizes(o.sizes);

  Table t{{"bytes", "path", "seconds"}, {}};
  for (double s : sizes) {
    const TransferSpec spec{o.messages, s, o.ppn, o.dedup};
    for (const auto& p : paths) {
      Seconds secs = 0.0;
      if (p == "gpudirect") {
        secs = gpudirect_path_time(m, *loc, spec).total();
      } else {
        const Distribution d = p == "3step"      ? Distribution::SingleCpu
                               : p == "extramsg" ? Distribution::ExtraMsg
                                                 : Distribution::DupDevptr;
        secs = three_step_time(m, spec, d).total();
      }
      t.rows.push_back({format_bytes(s), p, format_number(secs)});
    }
  }
  return t;
}

struct CrossoverOptions {
  std::string sizes = "1K:1M:x2";
  double dedup = 0.0;
  Count n_max = 64;
};

Table cmd_crossover(const MachineModel& m, const CrossoverOptions& o) {
  check_dedup(o.dedup);
  if (o.n_max < 1) throw ConfigError("n-max must be >= 1");
  Table t{{"bytes", "crossover_messages"}, {}};
  for (double s : parse_sizes(o.sizes)) {
    const auto n = crossover_message_count(m, s, o.dedup, o.n_max);
    t.rows.push_back({format_bytes(s), n ? std::to_string(*n) : "none"});
  }
  return t;
}

struct CollectiveOptions {
  std::string op;
  Count gpus = 0;
  std::string sizes = "8:1G:x8";
  double reduce_rate = 0.0;
  std::string strategies;
};

Table cmd_collective(const MachineModel& m, const CollectiveOptions& o) {
  const auto op = parse_collective(o.op);
  if (!op) throw ConfigError("unknown collective '" + o.op + "' (alltoall, alltoallv, allreduce)");
  if (o.gpus < 1) throw ConfigError("gpus must be >= 1");
  if (!(o.reduce_rate >= 0.0)) throw ConfigError("reduce-rate must be >= 0");
  std::vector<Strategy> wanted(kAllStrategies.begin(), kAllStrategies.end());
  if (!o.strategies.empty()) {
    wanted.clear();
    for (auto s : split(o.strategies, ',')) {
      const auto parsed = parse_strategy(s);
      if (!parsed) {
        throw ConfigError("unknown strategy '" + std::string(s) + "' (cuda-aware, 3-step, extra-msg, dup-devptr)");
      }
      wanted.push_back(*parsed);
    }
  }
  CollectiveSpec tmpl = *op == CollectiveOp::Alltoallv ? CollectiveSpec::uniform_alltoallv(o.gpus, 1.0) : CollectiveSpec{};
  tmpl.op = *op;
  tmpl.gpus = o.gpus;
  tmpl.reduce_rate = o.reduce_rate;
  tmpl.validate(m);

  const auto sizes = parse_sizes(o.sizes);
  Table t{{"bytes", "strategy", "seconds", "speedup_vs_cuda_aware", "cheapest"}, {}};
  for (const auto& row : sweep(m, tmpl, sizes)) {
    if (std::find(wanted.begin(), wanted.end(), row.strategy) == wanted.end()) continue;
    t.rows.push_back({format_bytes(row.size), std::string(to_string(row.strategy)), format_number(row.seconds),
                      format_number(row.speedup), row.cheapest ? "1" : "0"});
  }
  return t;
}

struct FitOptions {
  std::string samples;
  std::string kind = "postal";
  std::optional<double> alpha;
  std::string fragment;
};

Table cmd_fit(const FitOptions& o, std::ostream& err) {
  std::ifstream in(o.samples);
  if (!in) throw ConfigError("cannot read samples file '" + o.samples + "'");
  std::vector<std::string> warnings;
  const auto samples = read_timing_samples(in, warnings);
  for (const auto& w : warnings) err << "warning: " << w << '\n';
  if (samples.empty()) throw ConfigError("no samples in '" + o.samples + "'");

  nlohmann::json fragment;
  Table t;
  if (o.kind == "injection") {
    std::optional<PostalParams> base;
    if (o.alpha) base = PostalParams(*o.alpha, 0.0);
    const auto fit = fit_injection(samples, base);
    t.header = {"t_inject", "alpha", "samples"};
    t.rows.push_back({format_number(fit.params.t_inject()), format_number(fit.alpha_used),
                      std::to_string(fit.samples_used)});
    fragment["t_inject"] = fit.params.t_inject();
  } else {
    if (o.kind != "postal" && o.kind != "protocol") {
      throw ConfigError("unknown fit kind '" + o.kind + "' (postal, protocol, injection)");
    }
    // Group by locality annotation; unannotated samples form one "all" group.
    std::map<int, std::vector<TimingSample>> groups;
    for (const auto& s : samples) groups[s.locality ? static_cast<int>(*s.locality) : 3].push_back(s);
    auto name = [](int key) {
      return key == 3 ? std::string("all") : std::string(to_string(static_cast<LocalityClass>(key)));
    };
    if (o.kind == "postal") {
      t.header = {"locality", "alpha", "beta", "rms_residual", "samples", "clamped"};
      for (const auto& [key, group] : groups) {
        const auto fit = fit_postal(group);
        t.rows.push_back({name(key), format_number(fit.params.alpha()), format_number(fit.params.beta()),
                          format_number(fit.residual), std::to_string(fit.sample_count), fit.clamped ? "1" : "0"});
        fragment[name(key)] = {{"alpha", fit.params.alpha()}, {"beta", fit.params.beta()}};
      }
    } else {
      t.header = {"locality", "tier", "max_bytes", "alpha", "beta", "single_tier_fallback"};
      for (const auto& [key, group] : groups) {
        const auto fit = fit_protocol_table(group);
        const auto& tab = fit.table;
        const std::string fb = fit.single_tier_fallback ? "1" : "0";
        t.rows.push_back({name(key), "short", std::to_string(tab.short_max_bytes()),
                          format_number(tab.short_tier().alpha()), format_number(tab.short_tier().beta()), fb});
        t.rows.push_back({name(key), "eager", std::to_string(tab.eager_max_bytes()),
                          format_number(tab.eager_tier().alpha()), format_number(tab.eager_tier().beta()), fb});
        t.rows.push_back({name(key), "rendezvous", "", format_number(tab.rendezvous_tier().alpha()),
                          format_number(tab.rendezvous_tier().beta()), fb});
        fragment[name(key)] = nlohmann::json::parse(protocol_table_to_config(tab));
      }
    }
  }
  if (!o.fragment.empty()) {
    std::ofstream f(o.fragment);
    if (!f) throw ConfigError("cannot write '" + o.fragment + "'");
    f << fragment.dump(2) << '\n';
  }
  return t;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Model inter-GPU data movement costs on heterogeneous nodes", "hetcomm"};
  app.require_subcommand(1);

  Common common;
  PredictOptions predict;
  auto* p = app.add_subcommand("predict", "Predict single-path transfer costs over a size sweep");
  add_common(p, common, true);
  p->add_option("--paths", predict.paths, "Comma list of gpudirect, 3step, extramsg, dupdevptr");
  p->add_option("--sizes", predict.sizes, "Sizes: list and/or start:stop:xFACTOR ranges");
  p->add_option("--messages,-n", predict.messages, "Messages per process");
  p->add_option("--ppn", predict.ppn, "Active GPU processes per node");
  p->add_option("--dedup", predict.dedup, "Fraction of payload shared between messages, [0,1]");
  p->add_option("--locality", predict.locality, "Locality of the GPUDirect path");

  FitOptions fit;
  auto* f = app.add_subcommand("fit", "Fit model parameters from a timing-sample CSV");
  add_common(f, common, false);
  f->add_option("samples", fit.samples, "CSV with bytes,seconds[,ppn,n_messages,locality]")->required();
  f->add_option("--kind", fit.kind, "postal, protocol or injection");
  f->add_option("--alpha", fit.alpha, "Latency to use for the injection fit instead of fitting it");
  f->add_option("--write-fragment", fit.fragment, "Write the fitted parameters as a machine-config fragment");

  CrossoverOptions cross;
  auto* x = app.add_subcommand("crossover", "Message count at which host staging beats GPUDirect");
  add_common(x, common, true);
  x->add_option("--sizes", cross.sizes, "Sizes: list and/or start:stop:xFACTOR ranges");
  x->add_option("--dedup", cross.dedup, "Fraction of payload shared between messages, [0,1]");
  x->add_option("--n-max", cross.n_max, "Largest message count to scan");

  CollectiveOptions coll;
  auto* c = app.add_subcommand("collective", "Compare strategies for one collective over a size sweep");
  add_common(c, common, true);
  c->add_option("--op", coll.op, "alltoall, alltoallv or allreduce")->required();
  c->add_option("--gpus", coll.gpus, "Total GPUs taking part")->required();
  c->add_option("--sizes", coll.sizes, "Sizes: list and/or start:stop:xFACTOR ranges");
  c->add_option("--reduce-rate", coll.reduce_rate, "Seconds per byte of local reduction (allreduce)");
  c->add_option("--strategies", coll.strategies, "Comma list to report (default: all)");

  auto* show = app.add_subcommand("machine", "Print the machine model as a config file");
  add_common(show, common, true);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      app.exit(e, out, err);
      return kExitOk;
    }
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (p->parsed()) {
      emit(cmd_predict(resolve_machine(common, err), predict), common, out);
    } else if (f->parsed()) {
      emit(cmd_fit(fit, err), common, out);
    } else if (x->parsed()) {
      emit(cmd_crossover(resolve_machine(common, err), cross), common, out);
    } else if (c->parsed()) {
      emit(cmd_collective(resolve_machine(common, err), coll), common, out);
    } else if (show->parsed()) {
      const auto text = machine_to_config(resolve_machine(common, err));
      with_destination(common, out, [&](std::ostream& dest) { dest << text; });
    }
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::out_of_range& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const DataError& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitOk;
}

}  // namespace hetcomm::cli
