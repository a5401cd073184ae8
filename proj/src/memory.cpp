#include "chainnn/memory.hpp"

#include <cmath>
#include <ostream>
#include <set>

#include "chainnn/errors.hpp"

namespace chainnn {

const char* to_string(MemLevel l) {
  switch (l) {
    case MemLevel::Dram: return "dram";
    case MemLevel::Imem: return "imem";
    case MemLevel::Kmem: return "kmem";
    case MemLevel::Omem: return "omem";
  }
  return "?";
}

TrafficCounters::TrafficCounters() : TrafficCounters(FixedFormat{}) {}

TrafficCounters::TrafficCounters(const FixedFormat& fmt) {
  const int sample = (fmt.total_bits + 7) / 8;
  for (auto& l : levels) l.bytes_per_sample = sample;
  (*this)[MemLevel::Omem].bytes_per_sample = (fmt.accumulator_bits + 7) / 8;
}

TrafficCounters& TrafficCounters::operator+=(const TrafficCounters& o) {
  for (size_t i = 0; i < levels.size(); ++i) {
    levels[i].reads += o.levels[i].reads;
    levels[i].writes += o.levels[i].writes;
    levels[i].activity.reset();  // not additive
  }
  return *this;
}

void set_activity(TrafficCounters& t, int64_t compute_cycles, int active_pes) {
  if (compute_cycles <= 0) return;
  t[MemLevel::Kmem].activity = double(t[MemLevel::Kmem].reads) / (double(compute_cycles) * active_pes);
  t[MemLevel::Imem].activity = double(t[MemLevel::Imem].reads) / (2.0 * double(compute_cycles));
}

int64_t pass_cycles(const RowGroup& g, int K) {
  return int64_t{K} * (g.strip_cols - 1) + g.strip_rows;
}

// Real (non-padding) pixels of a group's strip for one phase. Rows and
// columns are independent, so the count is a product.
int64_t strip_real_pixels(const ExecGeometry& geom, const RowGroup& g, int phase) {
  const LayerParams& p = geom.layer;
  const bool split = geom.mapping == StrideMapping::PhaseSplit;
  auto real = [&](int v, int offset) {
    const int src = (split ? v * p.stride + offset : v) - p.pad;
    return src >= 0 && src < p.H ? 1 : 0;
  };
  const PhaseOffset off = geom.phases[phase];
  int64_t rows = 0, cols = 0;
  for (int r = g.strip_row_begin; r < g.strip_row_begin + g.strip_rows; ++r) rows += real(r, off.a);
  for (int c = g.strip_col_begin; c < g.strip_col_begin + g.strip_cols; ++c) cols += real(c, off.b);
  return rows * cols;
}

TrafficCounters analytic_traffic(const TilingPlan& plan, const FixedFormat& fmt) {
  const ExecGeometry& geom = plan.geom;
  const LayerParams& p = geom.layer;
  const int cg = p.in_per_group();
  TrafficCounters t(fmt);

  int64_t weights = 0;
  int64_t kmem_reads = 0;
  int64_t imem_reads = 0;
  int64_t dram_ifmap = 0;

  std::vector<int64_t> group_pixels(static_cast<size_t>(geom.phase_count()), 0);
  for (int ph = 0; ph < geom.phase_count(); ++ph)
    for (const auto& g : plan.row_groups) group_pixels[ph] += strip_real_pixels(geom, g, ph);

  const int64_t groups = static_cast<int64_t>(plan.row_groups.size());
  for (const auto& ph : plan.phases) {
    weights += ph.weights;
    std::set<int> conv_groups;
    for (int ti : ph.tiles) {
      const OfmapTile& tile = plan.tiles[ti];
      conv_groups.insert(tile.conv_group);
      for (int c = ph.c_begin; c < ph.c_begin + ph.c_count; ++c) {
        const int phase = geom.split_channel(c).second;
        kmem_reads += int64_t{tile.m_count} * geom.real_taps(phase) * groups;
        imem_reads += group_pixels[phase];
      }
    }
    if (plan.ifmap_resident)
      dram_ifmap += static_cast<int64_t>(conv_groups.size()) * cg * p.H * p.H;
  }
  kmem_reads *= p.N;
  imem_reads *= p.N;
  dram_ifmap = plan.ifmap_resident ? dram_ifmap * p.N : imem_reads;

  const int64_t outs = int64_t{p.N} * p.M * p.E * p.E;
  const int64_t partials = outs * geom.exec_in_per_group();

  t[MemLevel::Dram].reads = weights + dram_ifmap;
  t[MemLevel::Dram].writes = outs;
  t[MemLevel::Imem].reads = imem_reads;
  t[MemLevel::Imem].writes = dram_ifmap;
  t[MemLevel::Kmem].reads = kmem_reads;
  t[MemLevel::Kmem].writes = weights;
  // one write per partial; reads: read-modify-write for c > 0 plus the final drain
  t[MemLevel::Omem].writes = partials;
  t[MemLevel::Omem].reads = (partials - outs) + outs;
  set_activity(t, analytic_compute_cycles(plan), plan.map.active_pes);
  return t;
}

int64_t analytic_compute_cycles(const TilingPlan& plan) {
  int64_t per_channel = 0;
  for (const auto& g : plan.row_groups) per_channel += pass_cycles(g, plan.geom.plane.K);
  int64_t channel_passes = 0;
  for (const auto& ph : plan.phases)
    channel_passes += static_cast<int64_t>(ph.tiles.size()) * ph.c_count;
  return per_channel * channel_passes * plan.geom.layer.N;
}

double kmem_activity(int K, int E) { return 1.0 / (double(K) * E); }

ReuseFactor ifmap_reuse_factor(int K) {
  return {std::pow(double(K), 3) / (2.0 * K - 1.0), double(K) * K};
}

double imem_reads_per_pixel(int K) { return (2.0 * K - 1.0) / K; }

void EnergyCostTable::validate() const {
  for (double v : {dram, imem, kmem, omem, mac})
    if (!(v >= 0.0) || !std::isfinite(v)) throw ConfigError("energy costs must be finite and >= 0");
}

double EnergyBreakdown::share(const std::string& name) const {
  for (const auto& [n, e] : components)
    if (n == name) return total > 0 ? e / total : 0.0;
  throw ConfigError("no energy component '" + name + "'");
}

double EnergyBreakdown::chain_share() const { return share("mac") + share("kmem"); }

EnergyBreakdown energy_proxy(const TrafficCounters& c, int64_t mac_events,
                             const EnergyCostTable& t) {
  t.validate();
  EnergyBreakdown b;
  b.components = {
      {"dram", t.dram * double(c[MemLevel::Dram].events())},
      {"imem", t.imem * double(c[MemLevel::Imem].events())},
      {"kmem", t.kmem * double(c[MemLevel::Kmem].events())},
      {"omem", t.omem * double(c[MemLevel::Omem].events())},
      {"mac", t.mac * double(mac_events)},
  };
  for (const auto& [n, e] : b.components) b.total += e;
  return b;
}

ReconcileReport reconcile(const TrafficCounters& analytic, const TrafficCounters& simulated) {
  ReconcileReport rep;
  auto add = [&](const std::string& field, int64_t a, int64_t s) {
    ReconcileRow r{field, a, s, std::llabs(a - s), 0.0};
    r.rel_diff = a == 0 ? (s == 0 ? 0.0 : 1.0) : double(r.abs_diff) / double(std::llabs(a));
    if (r.abs_diff != 0) {
      rep.pass = false;
      rep.mismatched.push_back(field);
    }
    rep.rows.push_back(r);
  };
  for (MemLevel l : kMemLevels) {
    const std::string name = to_string(l);
    add(name + ".reads", analytic[l].reads, simulated[l].reads);
    add(name + ".writes", analytic[l].writes, simulated[l].writes);
  }
  return rep;
}

void write_traffic_csv(std::ostream& os, const TrafficCounters& t) {
  os << "level,reads,writes,bytes,activity\n";
  for (MemLevel l : kMemLevels) {
    const auto& v = t[l];
    os << to_string(l) << ',' << v.reads << ',' << v.writes << ',' << v.bytes() << ',';
    if (v.activity) os << *v.activity;
    os << '\n';
  }
}

}  // namespace chainnn
