#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "chainnn/presets.hpp"
#include "chainnn/sim.hpp"

namespace chainnn {

// 1 MAC = 2 ops. Nominal peak counts every PE; the per-K figure only the
// PEs inside primitives.
double peak_throughput(const ChainConfig& cfg);
double peak_throughput(const ChainConfig& cfg, const ChainMap& map);

// ceil(mac_count / active PEs): what a perfect dataflow would need.
int64_t cycle_lower_bound(const LayerParams& p, const ChainMap& map);

// The cycle and traffic counts run_layer would report, computed without
// simulating. Must agree with the simulator to the cycle.
LayerSummary analytic_layer(const LayerParams& p, const ChainConfig& cfg,
                            ScanMode mode = ScanMode::Dual,
                            StrideMapping mapping = StrideMapping::PhaseSplit,
                            const FixedFormat& fmt = {});

// Stalls the ideal cycle model does not capture. Zero by default.
struct OverheadModel {
  int64_t per_layer_cycles = 0;    // fixed cost per layer per batch
  double compute_fraction = 0.0;   // extra cycles as a fraction of compute

  int64_t cycles(const LayerSummary& s) const;
  bool operator==(const OverheadModel&) const = default;
};

enum class RefStatus { Reproduced, Bounded, Discrepancy, Mismatch };
const char* to_string(RefStatus s);

struct ReferenceRow {
  std::string metric;
  double ours = 0.0;
  double published = 0.0;
  double delta = 0.0;  // (ours - published) / published
  RefStatus status = RefStatus::Reproduced;
  std::string note;
};

struct LayerShare {
  std::string name;
  int64_t load = 0;
  int64_t compute = 0;
  int64_t overhead = 0;
  int64_t mac_events = 0;
  double share = 0.0;
  double mapping = 0.0;
  double temporal = 0.0;
};

struct PerfReport {
  int batch = 1;
  double clock_hz = 0.0;
  double peak_gops = 0.0;
  double achieved_gops = 0.0;
  PhaseCycles cycles;  // drain kept for latency only
  int64_t overhead_cycles = 0;
  int64_t mac_events = 0;
  double mapping_utilization = 0.0;
  double temporal_utilization = 0.0;
  double fps = 0.0;
  double batch_ms = 0.0;
  double load_ms = 0.0;
  std::vector<LayerShare> layers;
  std::vector<ReferenceRow> reference;

  int64_t throughput_cycles() const { return cycles.load + cycles.compute + overhead_cycles; }
};

// layers[i].params.N is the batch and must agree across layers. names may be
// empty (layers are then called layer0, layer1, ...).
PerfReport network_report(const std::vector<LayerSummary>& layers, const ChainConfig& cfg,
                          const OverheadModel& overhead = {},
                          const std::vector<std::string>& names = {},
                          bool with_reference = true);

// Analytic AlexNet report without reference rows.
PerfReport alexnet_report(const ChainConfig& cfg, int batch, const OverheadModel& overhead = {});

// Published figures next to ours. AlexNet numbers come from the analytic
// model at batch 128 and 4.
std::vector<ReferenceRow> reference_table(const ChainConfig& cfg, const OverheadModel& overhead = {});

struct UtilizationPair {
  double mapping = 0.0;   // active / total PEs
  double temporal = 0.0;  // MAC events / (compute cycles * active PEs)
};
UtilizationPair utilization_report(const LayerSummary& run, const ChainMap& map);

void write_report_text(std::ostream& os, const PerfReport& r);
void write_report_json(std::ostream& os, const PerfReport& r);
std::string report_json(const PerfReport& r);

}  // namespace chainnn
