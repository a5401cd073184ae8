#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "chainnn/mapper.hpp"
#include "chainnn/memory.hpp"

namespace chainnn {

struct ChannelReg {
  bool valid = false;
  int32_t value = 0;
};

// One PE: its slots of the two ifmap shift chains, the weight it multiplies
// with this pass, and the weights parked in its kMemory.
struct PEState {
  ChannelReg odd;
  ChannelReg even;
  bool gated = true;  // no weight for the current context
  int32_t weight = 0;
  std::vector<KernelEntry> kmemory;
  std::vector<int32_t> slot_of_context;  // context -> kmemory index, -1 = gated
};

// Identifies the output a primitive's chain is producing.
struct OutputTag {
  int n = 0;
  int tile = 0;
  int c = 0;  // exec input channel within group
  int out_row = 0;
  int out_col = 0;
  bool dummy = false;
  int64_t compute_cycle = 0;  // global cycle
};

struct PipelineSlot {
  bool valid = false;
  int64_t value = 0;
  OutputTag tag;
};

struct PrimitiveState {
  std::vector<PEState> pes;
  bool enabled = false;
  std::vector<PipelineSlot> pipeline;  // pipeline_stages - 1 slots
  size_t head = 0;
};

enum class ChainPhase { Idle, KernelLoad, Compute, Drain };

struct ChainCounters {
  int64_t mac_events = 0;
  int64_t dummy_mac_events = 0;
  int64_t overflow_events = 0;
  int64_t kmem_reads = 0;
  int64_t kmem_writes = 0;
};

struct ChainState {
  ChainConfig cfg;
  FixedFormat fmt;
  int K = 0;
  std::vector<PrimitiveState> primitives;
  int idle_pes = 0;
  int64_t cycle = 0;
  ChainPhase phase = ChainPhase::Idle;
  ChainCounters counters;
};

ChainState make_chain(const ChainConfig& cfg, int K, const FixedFormat& fmt = {});

// Streams the layout's weights into kMemory one per cycle; returns cycles.
int64_t load_kernels(ChainState& chain, const KernelLayout& layout);

// Moves each enabled PE's weight for the context out of kMemory.
void set_context(ChainState& chain, int context, int enabled_primitives);

struct CycleInput {
  ChannelReg odd;
  ChannelReg even;
  const MuxSel* mux = nullptr;  // K*K selections, nullptr = all Hold
  std::optional<OutputTag> tag;
};

struct PrimitiveOutput {
  int primitive = 0;
  int64_t value = 0;
  OutputTag tag;
};

// One clock: shift both channels, MAC along each enabled primitive, advance
// the partial-sum pipeline. Returns results leaving the pipeline this cycle.
std::vector<PrimitiveOutput> step(ChainState& chain, const CycleInput& in);

struct PhaseCycles {
  int64_t load = 0;
  int64_t compute = 0;
  int64_t drain = 0;
  int64_t total() const { return load + compute + drain; }
  PhaseCycles& operator+=(const PhaseCycles& o);
  bool operator==(const PhaseCycles&) const = default;
};

struct LayerSummary {
  LayerParams params;
  ChainMap map;
  StrideMapping mapping = StrideMapping::PhaseSplit;
  ScanMode mode = ScanMode::Dual;
  PhaseCycles cycles;
  TrafficCounters traffic;
  int64_t mac_events = 0;        // real MACs, layer-level count
  int64_t dummy_mac_events = 0;  // MACs on padded dummy rows
  int64_t zero_feeds = 0;        // padding pixels fed as zeros
  int64_t passes = 0;
  int64_t load_phases = 0;
  int64_t first_output_latency = 0;  // cycles from first compute cycle
  double temporal_utilization = 0.0; // mac_events / (compute * active PEs)
};

struct SimOptions {
  StrideMapping mapping = StrideMapping::PhaseSplit;
  ScanMode mode = ScanMode::Dual;
  FixedFormat fmt;
  std::ostream* trace = nullptr;  // per-cycle dump, tiny layers only
};

struct LayerRun {
  SampleTensor ofmaps;
  LayerSummary summary;
  int64_t overflow_events = 0;
  int64_t saturated_outputs = 0;
};

LayerRun run_layer(const LayerParams& p, const SampleTensor& ifmaps, const SampleTensor& kernels,
                   const SampleTensor& bias, const ChainConfig& cfg,
                   const SimOptions& opt = {});

struct NetworkLayer {
  LayerParams params;  // params.N is the batch
  SampleTensor ifmaps;
  SampleTensor kernels;
  SampleTensor bias;
};

struct NetworkRun {
  std::vector<LayerRun> layers;
  PhaseCycles cycles;
  TrafficCounters traffic;
  int64_t mac_events = 0;
};

// Runs layers back to back. Pooling and activation between layers are out of
// scope, so every layer brings its own ifmaps. Errors are rethrown with the
// layer index prepended.
NetworkRun run_network(const std::vector<NetworkLayer>& layers, const ChainConfig& cfg,
                       const SimOptions& opt = {});

}  // namespace chainnn
