#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "chainnn/mapper.hpp"

namespace chainnn {

enum class MemLevel { Dram = 0, Imem = 1, Kmem = 2, Omem = 3 };
inline constexpr std::array<MemLevel, 4> kMemLevels{MemLevel::Dram, MemLevel::Imem,
                                                    MemLevel::Kmem, MemLevel::Omem};
const char* to_string(MemLevel l);

struct LevelTraffic {
  int64_t reads = 0;
  int64_t writes = 0;
  int bytes_per_sample = 2;
  std::optional<double> activity;

  int64_t events() const { return reads + writes; }
  int64_t bytes() const { return events() * bytes_per_sample; }
  bool operator==(const LevelTraffic&) const = default;
};

// Read/write events per level of the DRAM / iMemory / kMemory / oMemory
// hierarchy. oMemory words are accumulator-sized.
struct TrafficCounters {
  std::array<LevelTraffic, 4> levels;

  TrafficCounters();
  explicit TrafficCounters(const FixedFormat& fmt);

  LevelTraffic& operator[](MemLevel l) { return levels[static_cast<size_t>(l)]; }
  const LevelTraffic& operator[](MemLevel l) const { return levels[static_cast<size_t>(l)]; }
  TrafficCounters& operator+=(const TrafficCounters& o);
  bool operator==(const TrafficCounters&) const = default;
};

// Sets kMemory activity (reads per PE-cycle) and iMemory activity (reads per
// channel-cycle) against compute-phase cycles.
void set_activity(TrafficCounters& t, int64_t compute_cycles, int active_pes);

// Closed-form traffic for the plan over the layer's batch. Independent of the
// simulator: counts come from strip arithmetic, not from replaying schedules.
TrafficCounters analytic_traffic(const TilingPlan& plan, const FixedFormat& fmt = {});

// In-bounds ifmap pixels in a group's strip for one phase; the rest of the
// strip is padding fed as zeros.
int64_t strip_real_pixels(const ExecGeometry& geom, const RowGroup& g, int phase);

// Cycles of one scan pass over a row group.
int64_t pass_cycles(const RowGroup& g, int K);

// Compute-phase cycles the plan needs for its whole batch.
int64_t analytic_compute_cycles(const TilingPlan& plan);

// 1 / (K * E)
double kmem_activity(int K, int E);

struct ReuseFactor {
  double per_feed = 0.0;   // MAC events per iMemory feed: K^3 / (2K - 1)
  double per_pixel = 0.0;  // MAC events per distinct pixel: K^2
};
ReuseFactor ifmap_reuse_factor(int K);

// iMemory reads per ifmap row pixel, stride 1: (2K - 1) / K
double imem_reads_per_pixel(int K);

struct EnergyCostTable {
  double dram = 200.0;
  double imem = 6.0;
  double kmem = 1.0;
  double omem = 6.0;
  double mac = 1.0;

  void validate() const;
  bool operator==(const EnergyCostTable&) const = default;
};

struct EnergyBreakdown {
  double total = 0.0;
  std::vector<std::pair<std::string, double>> components;  // dram, imem, kmem, omem, mac

  double share(const std::string& name) const;
  // Fraction spent in the PE chain (MACs + kMemory).
  double chain_share() const;
};

EnergyBreakdown energy_proxy(const TrafficCounters& c, int64_t mac_events,
                             const EnergyCostTable& t);

struct ReconcileRow {
  std::string field;  // e.g. "imem.reads"
  int64_t analytic = 0;
  int64_t simulated = 0;
  int64_t abs_diff = 0;
  double rel_diff = 0.0;
};

struct ReconcileReport {
  std::vector<ReconcileRow> rows;
  bool pass = true;
  std::vector<std::string> mismatched;  // field names
};

ReconcileReport reconcile(const TrafficCounters& analytic, const TrafficCounters& simulated);

// CSV columns: level,reads,writes,bytes,activity
void write_traffic_csv(std::ostream& os, const TrafficCounters& t);

}  // namespace chainnn
