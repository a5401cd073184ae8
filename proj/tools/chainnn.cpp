// chainnn: map / schedule / simulate / verify / report / sweep
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "chainnn/errors.hpp"
#include "chainnn/synth.hpp"
#include "chainnn/tensor_io.hpp"
#include "common.hpp"

using namespace chainnn;
namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

enum Exit { kOk = 0, kMismatch = 1, kConfig = 2, kCapacity = 3, kInvariant = 4 };

int cmd_map(int pes, const std::vector<int>& ks, bool json) {
  ChainConfig cfg;
  cfg.num_pes = pes;
  const auto rows = utilization_table(cfg, ks);
  if (json) {
    ojson j = ojson::array();
    for (const auto& m : rows)
      j.push_back({{"k", m.K}, {"pes_per_primitive", m.pes_per_primitive},
                   {"primitives", m.active_primitives}, {"active_pes", m.active_pes},
                   {"idle_pes", m.idle_pes}, {"efficiency", m.efficiency}});
    std::cout << j.dump(2) << '\n';
    return kOk;
  }
  std::cout << "chain of " << pes << " PEs\n"
            << "kernel  PEs/prim  primitives  active  idle  efficiency\n";
  for (const auto& m : rows)
    std::cout << std::setw(3) << m.K << 'x' << std::left << std::setw(3) << m.K << std::right
              << std::setw(9) << m.pes_per_primitive << std::setw(12) << m.active_primitives
              << std::setw(8) << m.active_pes << std::setw(6) << m.idle_pes << std::setw(11)
              << std::fixed << std::setprecision(1) << 100.0 * m.efficiency << "%\n";
  return kOk;
}

int cmd_schedule(const RunConfig& c, int group, const std::string& trace_path) {
  const LayerParams p = c.layers().front().params;
  const TilingPlan plan = plan_tiling(p, c.chain, c.mode, c.mapping);
  const auto& groups = plan.row_groups;
  if (group < 0 || group >= static_cast<int>(groups.size()))
    throw ConfigError("group " + std::to_string(group) + " out of range (layer has " +
                      std::to_string(groups.size()) + " row groups)");
  const StreamSchedule s = build_schedule(groups[group], plan.geom.plane, c.mode);
  const ValidationReport rep = validate_schedule(s, plan.geom.plane);
  if (trace_path.empty() || trace_path == "-") {
    write_trace(std::cout, s);
  } else {
    std::ofstream f(trace_path);
    if (!f) throw ConfigError("cannot write '" + trace_path + "'");
    write_trace(f, s);
  }
  std::cerr << rep.summary() << '\n';
  return rep.ok() ? kOk : kInvariant;
}

ojson summary_json(const std::string& name, const LayerSummary& s) {
  ojson t = ojson::object();
  for (MemLevel l : kMemLevels) {
    const auto& v = s.traffic[l];
    t[to_string(l)] = {{"reads", v.reads}, {"writes", v.writes}, {"bytes", v.bytes()}};
    if (v.activity) t[to_string(l)]["activity"] = *v.activity;
  }
  const auto& p = s.params;
  return {{"name", name},
          {"layer", {{"N", p.N}, {"C", p.C}, {"M", p.M}, {"H", p.H}, {"E", p.E}, {"K", p.K},
                     {"stride", p.stride}, {"pad", p.pad}, {"groups", p.groups}}},
          {"mode", to_string(s.mode)},
          {"mapping", to_string(s.mapping)},
          {"cycles", {{"load", s.cycles.load}, {"compute", s.cycles.compute}, {"drain", s.cycles.drain}}},
          {"mac_events", s.mac_events},
          {"dummy_mac_events", s.dummy_mac_events},
          {"zero_feeds", s.zero_feeds},
          {"passes", s.passes},
          {"load_phases", s.load_phases},
          {"first_output_latency", s.first_output_latency},
          {"utilization", {{"mapping", s.map.efficiency}, {"temporal", s.temporal_utilization}}},
          {"traffic", t}};
}

void print_summary(const std::string& name, const LayerSummary& s) {
  std::cout << std::fixed << std::setprecision(4) << name << ": K=" << s.params.K
            << " mode=" << to_string(s.mode) << " mapping=" << to_string(s.mapping)
            << "  cycles load " << s.cycles.load << " compute " << s.cycles.compute << " drain "
            << s.cycles.drain << "  MACs " << s.mac_events << "  mapping "
            << s.map.efficiency << "  temporal " << s.temporal_utilization << '\n';
}

// Runs every selected layer on synthetic tensors; verify also diffs against
// the golden model.
int cmd_simulate(const RunConfig& c, bool verify, const std::string& trace_path) {
  const auto layers = c.layers();
  if (!c.output_dir.empty()) fs::create_directories(c.output_dir);
  std::ofstream trace;
  if (!trace_path.empty()) {
    trace.open(trace_path);
    if (!trace) throw ConfigError("cannot write '" + trace_path + "'");
  }
  SimOptions opt;
  opt.mode = c.mode;
  opt.mapping = c.mapping;
  opt.fmt = c.fmt;
  opt.trace = trace_path.empty() ? nullptr : &trace;

  ojson runs = ojson::array();
  int64_t mismatches = 0;
  for (size_t i = 0; i < layers.size(); ++i) {
    const auto& [name, p] = layers[i];
    const SynthTensors t = synth_tensors(p, c.seed + i, c.fmt);
    LayerRun run;
    try {
      run = run_layer(p, t.ifmaps, t.kernels, t.bias, c.chain, opt);
    } catch (const CapacityError& e) {
      throw CapacityError(name + ": " + e.what());
    }
    ojson j = summary_json(name, run.summary);
    j["seed"] = c.seed + i;
    j["ofmap_checksum"] = tensor_checksum(run.ofmaps);
    j["overflow_events"] = run.overflow_events;
    if (verify) {
      const SampleTensor gold =
          golden_convolution(t.ifmaps, t.kernels, t.bias, p, Arithmetic::Fixed, c.fmt);
      int64_t diff = 0;
      for (size_t k = 0; k < gold.data.size(); ++k) diff += gold.data[k] != run.ofmaps.data[k];
      j["mismatched_samples"] = diff;
      mismatches += diff;
      if (c.format != "json")
        std::cout << name << ": " << (diff == 0 ? "bit-exact" : "MISMATCH") << " ("
                  << gold.data.size() - diff << '/' << gold.data.size() << " samples)\n";
    }
    if (c.format != "json") print_summary(name, run.summary);
    if (!c.output_dir.empty()) {
      save_tensor((fs::path(c.output_dir) / (name + ".ofmaps.cnnt")).string(), run.ofmaps);
      std::ofstream csv(fs::path(c.output_dir) / (name + ".traffic.csv"));
      write_traffic_csv(csv, run.summary.traffic);
    }
    runs.push_back(j);
  }
  const std::string doc = runs.dump(2) + "\n";
  if (c.format == "json") std::cout << doc;
  if (!c.output_dir.empty()) std::ofstream(fs::path(c.output_dir) / "run.json") << doc;
  return mismatches == 0 ? kOk : kMismatch;
}

int cmd_report(const RunConfig& c, bool simulate) {
  std::vector<LayerSummary> sums;
  std::vector<std::string> names;
  const auto layers = c.layers();
  for (size_t i = 0; i < layers.size(); ++i) {
    const auto& [name, p] = layers[i];
    if (simulate) {
      const SynthTensors t = synth_tensors(p, c.seed + i, c.fmt);
      SimOptions opt{c.mapping, c.mode, c.fmt, nullptr};
      sums.push_back(run_layer(p, t.ifmaps, t.kernels, t.bias, c.chain, opt).summary);
    } else {
      sums.push_back(analytic_layer(p, c.chain, c.mode, c.mapping, c.fmt));
    }
    names.push_back(name);
  }
  const PerfReport r = network_report(sums, c.chain, c.overhead, names);
  std::ostringstream energy;
  const EnergyCostTable costs = c.energy_table.empty() ? EnergyCostTable{} : load_energy_table(c.energy_table);
  TrafficCounters total;
  for (const auto& s : sums) total += s.traffic;
  const EnergyBreakdown e = energy_proxy(total, r.mac_events, costs);

  if (c.format == "json") {
    ojson j = ojson::parse(report_json(r));
    ojson comp = ojson::object();
    for (const auto& [n, v] : e.components) comp[n] = v;
    j["energy"] = {{"total", e.total}, {"components", comp}, {"chain_share", e.chain_share()}};
    std::cout << j.dump(2) << '\n';
  } else {
    write_report_text(std::cout, r);
    std::cout << "\nenergy proxy (relative units): total " << std::scientific << std::setprecision(4)
              << e.total << std::fixed;
    for (const auto& [n, v] : e.components)
      std::cout << "  " << n << ' ' << std::setprecision(1) << 100.0 * v / e.total << '%';
    std::cout << '\n';
  }
  if (!c.output_dir.empty()) {
    fs::create_directories(c.output_dir);
    std::ofstream(fs::path(c.output_dir) / "report.json") << report_json(r);
    std::ofstream csv(fs::path(c.output_dir) / "traffic.csv");
    write_traffic_csv(csv, total);
  }
  return kOk;
}

struct SweepPoint {
  int k, pes, batch;
};

int cmd_sweep(RunConfig c, const std::vector<int>& ks, const std::vector<int>& pes_list,
              const std::vector<int>& batches, unsigned threads, const std::string& out) {
  std::vector<SweepPoint> grid;
  for (int k : ks)
    for (int pes : pes_list)
      for (int b : batches) grid.push_back({k, pes, b});
  std::vector<std::string> rows(grid.size());
  std::vector<std::string> errors(grid.size());

  // Workers claim indices; rows land in grid order so output never depends
  // on scheduling.
  std::mutex mu;
  size_t next = 0;
  auto worker = [&] {
    for (;;) {
      size_t i;
      {
        std::lock_guard<std::mutex> lock(mu);
        if (next >= grid.size()) return;
        i = next++;
      }
      const SweepPoint& pt = grid[i];
      try {
        RunConfig rc = c;
        rc.chain.num_pes = pt.pes;
        rc.kernel = pt.k;
        rc.batch = pt.batch;
        const auto layers = rc.layers();
        std::vector<LayerSummary> sums;
        for (const auto& l : layers) sums.push_back(analytic_layer(l.params, rc.chain, rc.mode, rc.mapping, rc.fmt));
        const PerfReport r = network_report(sums, rc.chain, rc.overhead, {}, false);
        const ChainMap m = sums.front().map;
        std::ostringstream o;
        o << std::setprecision(10) << pt.k << ',' << pt.pes << ',' << pt.batch << ','
          << m.active_primitives << ',' << m.active_pes << ',' << m.efficiency << ','
          << r.cycles.load << ',' << r.cycles.compute << ',' << r.temporal_utilization << ','
          << r.achieved_gops << ',' << r.fps;
        rows[i] = o.str();
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < std::max(1u, threads); ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  std::ostringstream csv;
  csv << "k,num_pes,batch,primitives,active_pes,efficiency,load_cycles,compute_cycles,temporal,"
         "achieved_gops,fps\n";
  for (size_t i = 0; i < grid.size(); ++i) {
    if (!errors[i].empty())
      throw CapacityError("sweep point k=" + std::to_string(grid[i].k) + " pes=" +
                          std::to_string(grid[i].pes) + ": " + errors[i]);
    csv << rows[i] << '\n';
  }
  if (out.empty() || out == "-") {
    std::cout << csv.str();
  } else {
    std::ofstream f(out);
    if (!f) throw ConfigError("cannot write '" + out + "'");
    f << csv.str();
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Chain-of-PEs CNN accelerator model"};
  app.require_subcommand(1);

  int map_pes = 576;
  std::vector<int> map_ks{3, 5, 7, 9, 11};
  bool map_json = false;
  auto* map = app.add_subcommand("map", "partition the chain into systolic primitives");
  map->add_option("--pes", map_pes, "PEs in the chain");
  map->add_option("--k", map_ks, "kernel sizes")->expected(1, -1);
  map->add_flag("--json", map_json, "JSON output");

  cli::RunFlags sched_flags, sim_flags, ver_flags, rep_flags, sweep_flags;
  int group = 0;
  std::string sched_trace, sim_trace, ver_trace;
  auto* schedule = app.add_subcommand("schedule", "build, validate and dump a row-group scan");
  sched_flags.add(schedule);
  schedule->add_option("--group", group, "row group index");
  schedule->add_option("--trace", sched_trace, "trace file (default stdout)");

  auto* simulate = app.add_subcommand("simulate", "run layers on the register-level simulator");
  sim_flags.add(simulate);
  simulate->add_option("--trace", sim_trace, "per-cycle trace file (tiny layers only)");

  auto* verify = app.add_subcommand("verify", "simulate and diff against the golden convolution");
  ver_flags.add(verify);
  verify->add_option("--trace", ver_trace, "per-cycle trace file (tiny layers only)");

  bool rep_sim = false;
  auto* report = app.add_subcommand("report", "performance report and published-figure deltas");
  rep_flags.add(report);
  report->add_flag("--simulate", rep_sim, "use simulator counts instead of the analytic model");

  std::vector<int> sw_ks{3}, sw_pes{576}, sw_batch{1};
  unsigned sw_threads = std::max(1u, std::thread::hardware_concurrency());
  std::string sw_out;
  auto* sweep = app.add_subcommand("sweep", "grid over K, PE count and batch; one CSV row per point");
  sweep_flags.add(sweep);
  sweep->add_option("--ks", sw_ks, "kernel sizes")->expected(1, -1)->delimiter(',');
  sweep->add_option("--pes-list", sw_pes, "PE counts")->expected(1, -1)->delimiter(',');
  sweep->add_option("--batches", sw_batch, "batch sizes")->expected(1, -1)->delimiter(',');
  sweep->add_option("--threads", sw_threads, "worker threads");
  sweep->add_option("--csv", sw_out, "output CSV (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfig;
  }

  try {
    if (*map) return cmd_map(map_pes, map_ks, map_json);
    if (*schedule) return cmd_schedule(sched_flags.resolve(), group, sched_trace);
    if (*simulate) return cmd_simulate(sim_flags.resolve(), false, sim_trace);
    if (*verify) return cmd_simulate(ver_flags.resolve(), true, ver_trace);
    if (*report) return cmd_report(rep_flags.resolve(), rep_sim);
    if (*sweep) return cmd_sweep(sweep_flags.resolve(), sw_ks, sw_pes, sw_batch, sw_threads, sw_out);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const ShapeError& e) {
    std::cerr << "shape error: " << e.what() << '\n';
    return kConfig;
  } catch (const CapacityError& e) {
    std::cerr << "capacity error: " << e.what() << '\n';
    return kCapacity;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kInvariant;
  }
  return kOk;
}
