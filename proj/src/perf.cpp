#include "chainnn/perf.hpp"

#include <cmath>
#include <ostream>


#include "chainnn/errors.hpp"

namespace chainnn {

double peak_throughput(const ChainConfig& cfg) { return 2.0 * cfg.num_pes * cfg.clock_hz; }

double peak_throughput(const ChainConfig& cfg, const ChainMap& map) {
  return 2.0 * map.active_pes * cfg.clock_hz;
}

int64_t cycle_lower_bound(const LayerParams& p, const ChainMap& map) {
  const int64_t macs = mac_count(p);
  return (macs + map.active_pes - 1) / map.active_pes;
}

LayerSummary analytic_layer(const LayerParams& p, const ChainConfig& cfg, ScanMode mode,
                            StrideMapping mapping, const FixedFormat& fmt) {
  const TilingPlan plan = plan_tiling(p, cfg, mode, mapping);
  const ExecGeometry& geom = plan.geom;
  const int K = geom.plane.K;

  LayerSummary s;
  s.params = p;
  s.map = plan.map;
  s.mapping = geom.mapping;
  s.mode = mode;
  s.cycles.load = kernel_load_weights(plan);
  s.cycles.compute = analytic_compute_cycles(plan);
  s.cycles.drain = static_cast<int64_t>(plan.phases.size()) * (cfg.pipeline_stages - 1);
  s.traffic = analytic_traffic(plan, fmt);
  s.mac_events = mac_count(p);
  s.passes = plan.passes();
  s.load_phases = static_cast<int64_t>(plan.phases.size());

  for (const auto& ph : plan.phases)
    for (int ti : ph.tiles) {
      const int prims = plan.tiles[ti].m_count;
      for (int c = ph.c_begin; c < ph.c_begin + ph.c_count; ++c) {
        const int phase = geom.split_channel(c).second;
        for (const auto& g : plan.row_groups) {
          const int64_t dummy_windows = int64_t{g.out_rows - g.real_rows} * g.out_cols;
          s.dummy_mac_events += dummy_windows * prims * geom.real_taps(phase);
          s.zero_feeds += int64_t{g.strip_rows} * g.strip_cols -
                          strip_real_pixels(geom, g, phase);
        }
      }
    }
  s.dummy_mac_events *= p.N;
  s.zero_feeds *= p.N;

  // The first window to complete is the bottom-right one of the first group.
  const RowGroup& g0 = plan.row_groups.front();
  const int sigma = geom.plane.stride;
  const int64_t first_valid = 1 + int64_t{K} * (g0.strip_cols - 1 - (g0.out_cols - 1) * sigma) +
                              (g0.strip_rows - 1 - (g0.out_rows - 1) * sigma);
  s.first_output_latency = first_valid + cfg.pipeline_stages - 1;
  s.temporal_utilization =
      s.cycles.compute == 0 ? 0.0
                            : double(s.mac_events) / (double(s.cycles.compute) * plan.map.active_pes);
  return s;
}

int64_t OverheadModel::cycles(const LayerSummary& s) const {
  return per_layer_cycles + std::llround(compute_fraction * double(s.cycles.compute));
}

const char* to_string(RefStatus s) {
  switch (s) {
    case RefStatus::Reproduced: return "reproduced";
    case RefStatus::Bounded: return "bounded";
    case RefStatus::Discrepancy: return "documented-discrepancy";
    case RefStatus::Mismatch: return "mismatch";
  }
  return "?";
}

PerfReport network_report(const std::vector<LayerSummary>& layers, const ChainConfig& cfg,
                          const OverheadModel& overhead, const std::vector<std::string>& names,
                          bool with_reference) {
  if (layers.empty()) throw ConfigError("network_report needs at least one layer");
  if (!names.empty() && names.size() != layers.size())
    throw ConfigError("layer name count does not match layer count");
  PerfReport r;
  r.batch = layers.front().params.N;
  r.clock_hz = cfg.clock_hz;
  r.peak_gops = peak_throughput(cfg) / 1e9;

  double active_cycles = 0.0;  // sum of compute * active PEs
  double chain_cycles = 0.0;   // sum of compute * num_pes
  for (size_t i = 0; i < layers.size(); ++i) {
    const LayerSummary& s = layers[i];
    if (s.params.N != r.batch) throw ConfigError("layers disagree on batch size");
    LayerShare ls;
    ls.name = names.empty() ? "layer" + std::to_string(i) : names[i];
    ls.load = s.cycles.load;
    ls.compute = s.cycles.compute;
    ls.overhead = overhead.cycles(s);
    ls.mac_events = s.mac_events;
    ls.mapping = s.map.efficiency;
    ls.temporal = s.temporal_utilization;
    r.layers.push_back(ls);

    r.cycles += s.cycles;
    r.overhead_cycles += ls.overhead;
    r.mac_events += s.mac_events;
    active_cycles += double(s.cycles.compute) * s.map.active_pes;
    chain_cycles += double(s.cycles.compute) * s.map.num_pes;
  }
  const double total = double(r.throughput_cycles());
  for (auto& ls : r.layers) ls.share = double(ls.load + ls.compute + ls.overhead) / total;

  const double seconds = total / cfg.clock_hz;
  r.fps = r.batch / seconds;
  r.batch_ms = seconds * 1e3;
  r.load_ms = double(r.cycles.load) / cfg.clock_hz * 1e3;
  r.achieved_gops = 2.0 * double(r.mac_events) / seconds / 1e9;
  r.mapping_utilization = chain_cycles > 0 ? active_cycles / chain_cycles : 0.0;
  r.temporal_utilization = active_cycles > 0 ? double(r.mac_events) / active_cycles : 0.0;
  if (with_reference) r.reference = reference_table(cfg, overhead);
  return r;
}

UtilizationPair utilization_report(const LayerSummary& run, const ChainMap& map) {
  UtilizationPair u;
  u.mapping = map.efficiency;
  u.temporal = run.cycles.compute == 0
                   ? 0.0
                   : double(run.mac_events) / (double(run.cycles.compute) * map.active_pes);
  return u;
}

}  // namespace chainnn
