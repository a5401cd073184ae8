#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "chainnn/scan.hpp"
#include "chainnn/tensor.hpp"

namespace chainnn {

struct ChainConfig {
  int num_pes = 576;
  int pipeline_stages = 3;
  double clock_hz = 700e6;
  int kmem_capacity = 256;      // weights per PE
  int64_t imem_bytes = 32 * 1024;
  int64_t omem_bytes = 25 * 1024;

  void validate() const;
  bool operator==(const ChainConfig&) const = default;
};

// How the chain is cut into K*K-PE systolic primitives.
struct ChainMap {
  int K = 0;
  int num_pes = 0;
  int pes_per_primitive = 0;
  int active_primitives = 0;
  int active_pes = 0;
  int idle_pes = 0;
  double efficiency = 0.0;
};

ChainMap partition_chain(const ChainConfig& cfg, int K);
std::vector<ChainMap> utilization_table(const ChainConfig& cfg, const std::vector<int>& ks);

enum class StrideMapping { PhaseSplit, Direct };

const char* to_string(StrideMapping m);

struct PhaseOffset {
  int a = 0;  // row offset inside the stride cell
  int b = 0;  // column offset
};

// What the chain actually executes for a layer. Direct mapping scans the
// padded ifmap with the layer's own stride. Phase-split mapping rewrites a
// strided layer as a stride-1 layer over stride*stride phase sub-images with
// kernel ceil(K/stride); sub-kernel taps that fall outside the K*K kernel are
// gated PEs (no weight, no MAC).
struct ExecGeometry {
  LayerParams layer;  // as given
  LayerParams plane;  // scanned layer: K, stride and plane size of the scan
  ScanMode mode = ScanMode::Dual;
  StrideMapping mapping = StrideMapping::Direct;
  std::vector<PhaseOffset> phases;  // {0,0} only for direct mapping

  int phase_count() const { return static_cast<int>(phases.size()); }
  // Executed input channels per conv group: (C/groups) * phases.
  int exec_in_per_group() const { return layer.in_per_group() * phase_count(); }

  // Exec channel (within group) -> (kernel input channel within group, phase).
  std::pair<int, int> split_channel(int exec_c) const {
    return {exec_c / phase_count(), exec_c % phase_count()};
  }
  // Plane pixel of a phase -> ifmap (row, col), or nullopt for padding.
  std::optional<std::pair<int, int>> source_pixel(const PlaneCoord& px, int phase) const;
  // Sub-kernel tap -> kernel (i, j), or nullopt when the PE is gated.
  std::optional<std::pair<int, int>> source_tap(int i, int j, int phase) const;
  // Taps that carry a weight for this phase.
  int real_taps(int phase) const;
};

ExecGeometry make_exec_geometry(const LayerParams& p, ScanMode mode, StrideMapping mapping);

struct LoopDescriptor {
  std::string name;
  int64_t trip = 0;
};

// One ParaTile: consecutive output channels of a conv group, one per primitive.
struct OfmapTile {
  int conv_group = 0;
  int index = 0;  // tile index within the conv group
  int m_begin = 0;
  int m_count = 0;
};

// Weights resident in kMemory together; loaded once per batch.
struct LoadPhase {
  int index = 0;
  std::vector<int> tiles;  // indices into TilingPlan::tiles
  int c_begin = 0;         // exec input channel range within the group
  int c_count = 0;
  int contexts_per_pe = 0; // tiles.size() * c_count
  int64_t weights = 0;     // weights streamed into the chain
};

struct TilingPlan {
  ExecGeometry geom;
  ChainMap map;
  ChainConfig cfg;
  int para_tile = 0;
  int tiles_per_group = 0;
  std::vector<OfmapTile> tiles;
  int segment_cols = 0;  // output columns per row-group segment
  std::vector<RowGroup> row_groups;
  int64_t kernel_context_count = 0;  // (m, c) contexts per PE over the layer
  bool subtiled = false;
  std::vector<LoadPhase> phases;
  bool ifmap_resident = false;  // one image's conv-group input fits iMemory
  std::vector<LoopDescriptor> loop_nest;

  int64_t passes() const;  // scan passes for the whole batch
};

TilingPlan plan_tiling(const LayerParams& p, const ChainConfig& cfg,
                       ScanMode mode = ScanMode::Dual,
                       StrideMapping mapping = StrideMapping::PhaseSplit);

// Visits every (output channel, exec input channel, output pixel) the plan
// computes, once per batch image, in loop-nest order.
struct PlanPoint {
  int n = 0;
  int m = 0;
  int c = 0;  // exec input channel, global
  int x = 0;
  int y = 0;
};
template <class Fn>
void for_each_plan_point(const TilingPlan& plan, Fn&& fn);

struct KernelEntry {
  int context = 0;  // slot order within the load phase
  int m = 0;
  int c = 0;        // exec input channel within group
  int i = 0;        // kernel tap
  int j = 0;
  int32_t weight = 0;
};

struct LoadSlot {
  int primitive = 0;
  int pe = 0;
  int entry = 0;
};

// Stationary weights of one load phase. PE p of a primitive holds sub-kernel
// tap (p % K, p / K): column-major within the window.
struct KernelLayout {
  int phase = 0;
  int K = 0;
  int primitives = 0;
  int contexts = 0;
  std::vector<std::vector<std::vector<KernelEntry>>> pe_tables;  // [primitive][pe]
  std::vector<LoadSlot> load_order;

  int64_t weights() const { return static_cast<int64_t>(load_order.size()); }
};

KernelLayout layout_kernels(const TilingPlan& plan, int phase, const SampleTensor& kernels);
std::vector<KernelLayout> layout_kernels(const TilingPlan& plan, const SampleTensor& kernels);

// Sum over the plan's phases of streamed weights.
int64_t kernel_load_weights(const TilingPlan& plan);

// ---- inline ----

template <class Fn>
void for_each_plan_point(const TilingPlan& plan, Fn&& fn) {
  const auto& pl = plan.geom.plane;
  const int ce = plan.geom.exec_in_per_group();
  for (const auto& ph : plan.phases)
    for (int n = 0; n < pl.N; ++n)
      for (int t : ph.tiles) {
        const auto& tile = plan.tiles[t];
        for (const auto& g : plan.row_groups)
          for (int c = ph.c_begin; c < ph.c_begin + ph.c_count; ++c)
            for (int k = 0; k < tile.m_count; ++k)
              for (int r = 0; r < g.real_rows; ++r)
                for (int y = 0; y < g.out_cols; ++y)
                  fn(PlanPoint{n, tile.m_begin + k, tile.conv_group * ce + c,
                               g.out_row_begin + r, g.out_col_begin + y});
      }
}

}  // namespace chainnn
