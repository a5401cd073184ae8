#include "chainnn/mapper.hpp"

#include <algorithm>
#include <string>

#include "chainnn/errors.hpp"

namespace chainnn {

void ChainConfig::validate() const {
  if (num_pes <= 0) throw ConfigError("num_pes must be positive");
  if (pipeline_stages <= 0) throw ConfigError("pipeline_stages must be positive");
  if (!(clock_hz > 0)) throw ConfigError("clock_hz must be positive");
  if (kmem_capacity < 1) throw ConfigError("kmem_capacity must be at least 1");
  if (imem_bytes <= 0) throw ConfigError("imem_bytes must be positive");
  if (omem_bytes <= 0) throw ConfigError("omem_bytes must be positive");
}

ChainMap partition_chain(const ChainConfig& cfg, int K) {
  if (K < 1) throw ShapeError("kernel size must be >= 1");
  const int64_t per = int64_t{K} * K;
  if (per > cfg.num_pes)
    throw CapacityError("K=" + std::to_string(K) + " needs " + std::to_string(per) +
                        " PEs per primitive but the chain has " + std::to_string(cfg.num_pes));
  ChainMap m;
  m.K = K;
  m.num_pes = cfg.num_pes;
  m.pes_per_primitive = static_cast<int>(per);
  m.active_primitives = static_cast<int>(cfg.num_pes / per);
  m.active_pes = m.active_primitives * m.pes_per_primitive;
  m.idle_pes = cfg.num_pes - m.active_pes;
  m.efficiency = static_cast<double>(m.active_pes) / cfg.num_pes;
  return m;
}

std::vector<ChainMap> utilization_table(const ChainConfig& cfg, const std::vector<int>& ks) {
  std::vector<ChainMap> rows;
  rows.reserve(ks.size());
  for (int k : ks) rows.push_back(partition_chain(cfg, k));
  return rows;
}

const char* to_string(StrideMapping m) {
  return m == StrideMapping::PhaseSplit ? "phase-split" : "direct";
}

std::optional<std::pair<int, int>> ExecGeometry::source_pixel(const PlaneCoord& px,
                                                              int phase) const {
  int row = px.row;
  int col = px.col;
  if (mapping == StrideMapping::PhaseSplit) {
    const int s = layer.stride;
    row = row * s + phases[phase].a;
    col = col * s + phases[phase].b;
  }
  row -= layer.pad;
  col -= layer.pad;
  if (row < 0 || row >= layer.H || col < 0 || col >= layer.H) return std::nullopt;
  return std::make_pair(row, col);
}

std::optional<std::pair<int, int>> ExecGeometry::source_tap(int i, int j, int phase) const {
  if (mapping == StrideMapping::Direct) return std::make_pair(i, j);
  const int s = layer.stride;
  const int ki = i * s + phases[phase].a;
  const int kj = j * s + phases[phase].b;
  if (ki >= layer.K || kj >= layer.K) return std::nullopt;
  return std::make_pair(ki, kj);
}

int ExecGeometry::real_taps(int phase) const {
  int n = 0;
  for (int i = 0; i < plane.K; ++i)
    for (int j = 0; j < plane.K; ++j) n += source_tap(i, j, phase).has_value();
  return n;
}

ExecGeometry make_exec_geometry(const LayerParams& p, ScanMode mode, StrideMapping mapping) {
  p.validate();
  ExecGeometry g;
  g.layer = p;
  g.mode = mode;
  if (p.stride == 1 || mapping == StrideMapping::Direct) {
    g.mapping = StrideMapping::Direct;
    g.plane = p;
    g.phases = {{0, 0}};
    return g;
  }
  g.mapping = StrideMapping::PhaseSplit;
  const int s = p.stride;
  const int span = std::min(s, p.K);
  for (int a = 0; a < span; ++a)
    for (int b = 0; b < span; ++b) g.phases.push_back({a, b});
  const int kp = (p.K + s - 1) / s;
  g.plane = p;
  g.plane.K = kp;
  g.plane.stride = 1;
  g.plane.pad = 0;
  g.plane.H = p.E + kp - 1;
  g.plane.C = p.C * g.phase_count();
  g.plane.validate();
  return g;
}

int64_t TilingPlan::passes() const {
  int64_t total = 0;
  for (const auto& ph : phases)
    total += static_cast<int64_t>(ph.tiles.size()) * ph.c_count;
  return total * geom.plane.N * static_cast<int64_t>(row_groups.size());
}

TilingPlan plan_tiling(const LayerParams& p, const ChainConfig& cfg, ScanMode mode,
                       StrideMapping mapping) {
  cfg.validate();
  TilingPlan plan;
  plan.cfg = cfg;
  plan.geom = make_exec_geometry(p, mode, mapping);
  const LayerParams& pl = plan.geom.plane;
  plan.map = partition_chain(cfg, pl.K);

  const int mg = p.out_per_group();
  plan.para_tile = std::min(plan.map.active_primitives, mg);
  plan.tiles_per_group = (mg + plan.para_tile - 1) / plan.para_tile;
  for (int cg = 0; cg < p.groups; ++cg)
    for (int t = 0; t < plan.tiles_per_group; ++t) {
      OfmapTile tile;
      tile.conv_group = cg;
      tile.index = t;
      tile.m_begin = cg * mg + t * plan.para_tile;
      tile.m_count = std::min(plan.para_tile, mg - t * plan.para_tile);
      plan.tiles.push_back(tile);
    }

  // Widest column segment whose strip fits iMemory.
  int seg = pl.E;
  while (seg > 0 && strip_bytes(pl.K, pl.stride, mode, seg) > cfg.imem_bytes) --seg;
  if (seg == 0)
    throw CapacityError("strip-split: iMemory (" + std::to_string(cfg.imem_bytes) +
                        " B) cannot hold a one-column strip of " +
                        std::to_string(strip_bytes(pl.K, pl.stride, mode, 1)) + " B");
  plan.segment_cols = seg;
  plan.row_groups = row_groups(pl, mode, seg);

  plan.ifmap_resident =
      int64_t{p.in_per_group()} * p.H * p.H * 2 <= cfg.imem_bytes;

  const int ce = plan.geom.exec_in_per_group();
  plan.kernel_context_count = static_cast<int64_t>(plan.tiles.size()) * ce;
  plan.subtiled = plan.kernel_context_count > cfg.kmem_capacity;

  auto weights_of = [&](const LoadPhase& ph) {
    int64_t w = 0;
    for (int t : ph.tiles)
      for (int c = ph.c_begin; c < ph.c_begin + ph.c_count; ++c)
        w += int64_t{plan.tiles[t].m_count} * plan.geom.real_taps(c % plan.geom.phase_count());
    return w;
  };
  const int ntiles = static_cast<int>(plan.tiles.size());
  if (ce <= cfg.kmem_capacity) {
    const int per_phase = cfg.kmem_capacity / ce;
    for (int t0 = 0; t0 < ntiles; t0 += per_phase) {
      LoadPhase ph;
      ph.index = static_cast<int>(plan.phases.size());
      for (int t = t0; t < std::min(ntiles, t0 + per_phase); ++t) ph.tiles.push_back(t);
      ph.c_begin = 0;
      ph.c_count = ce;
      ph.contexts_per_pe = static_cast<int>(ph.tiles.size()) * ce;
      ph.weights = weights_of(ph);
      plan.phases.push_back(ph);
    }
  } else {
    for (int t = 0; t < ntiles; ++t)
      for (int c0 = 0; c0 < ce; c0 += cfg.kmem_capacity) {
        LoadPhase ph;
        ph.index = static_cast<int>(plan.phases.size());
        ph.tiles = {t};
        ph.c_begin = c0;
        ph.c_count = std::min(cfg.kmem_capacity, ce - c0);
        ph.contexts_per_pe = ph.c_count;
        ph.weights = weights_of(ph);
        plan.phases.push_back(ph);
      }
  }

  int64_t max_tiles = 0, max_c = 0;
  for (const auto& ph : plan.phases) {
    max_tiles = std::max<int64_t>(max_tiles, static_cast<int64_t>(ph.tiles.size()));
    max_c = std::max<int64_t>(max_c, ph.c_count);
  }
  const auto& g0 = plan.row_groups.front();
  plan.loop_nest = {
      {"kernel_phase", static_cast<int64_t>(plan.phases.size())},
      {"batch", pl.N},
      {"ofmap_tile", max_tiles},
      {"row_group", static_cast<int64_t>(plan.row_groups.size())},
      {"in_channel", max_c},
      {"scan", int64_t{pl.K} * (g0.strip_cols - 1) + g0.strip_rows},
  };
  return plan;
}

KernelLayout layout_kernels(const TilingPlan& plan, int phase, const SampleTensor& kernels) {
  const auto& geom = plan.geom;
  const LayerParams& p = geom.layer;
  const std::vector<int> want{p.M, p.in_per_group(), p.K, p.K};
  if (kernels.dims != want) throw ShapeError("kernel tensor does not match layer");
  const LoadPhase& ph = plan.phases.at(phase);
  const int K = geom.plane.K;
  const int pes = K * K;

  KernelLayout lay;
  lay.phase = phase;
  lay.K = K;
  lay.primitives = plan.para_tile;
  lay.contexts = ph.contexts_per_pe;
  lay.pe_tables.assign(lay.primitives, std::vector<std::vector<KernelEntry>>(pes));

  int context = 0;
  for (int t : ph.tiles) {
    const auto& tile = plan.tiles[t];
    for (int c = ph.c_begin; c < ph.c_begin + ph.c_count; ++c, ++context) {
      const auto [kc, phase_idx] = geom.split_channel(c);
      for (int prim = 0; prim < tile.m_count; ++prim) {
        const int m = tile.m_begin + prim;
        for (int pe = 0; pe < pes; ++pe) {
          const auto tap = geom.source_tap(pe % K, pe / K, phase_idx);
          if (!tap) continue;
          auto& table = lay.pe_tables[prim][pe];
          table.push_back({context, m, c, tap->first, tap->second,
                           kernels.at({m, kc, tap->first, tap->second})});
          lay.load_order.push_back({prim, pe, static_cast<int>(table.size()) - 1});
        }
      }
    }
  }
  for (int prim = 0; prim < lay.primitives; ++prim)
    for (int pe = 0; pe < pes; ++pe)
      if (static_cast<int>(lay.pe_tables[prim][pe].size()) > plan.cfg.kmem_capacity)
        throw CapacityError("kMemory overflow at primitive " + std::to_string(prim) + " PE " +
                            std::to_string(pe) + ": " +
                            std::to_string(lay.pe_tables[prim][pe].size()) + " weights > " +
                            std::to_string(plan.cfg.kmem_capacity));
  return lay;
}

std::vector<KernelLayout> layout_kernels(const TilingPlan& plan, const SampleTensor& kernels) {
  std::vector<KernelLayout> out;
  for (size_t ph = 0; ph < plan.phases.size(); ++ph)
    out.push_back(layout_kernels(plan, static_cast<int>(ph), kernels));
  return out;
}

int64_t kernel_load_weights(const TilingPlan& plan) {
  int64_t w = 0;
  for (const auto& ph : plan.phases) w += ph.weights;
  return w;
}

}  // namespace chainnn
