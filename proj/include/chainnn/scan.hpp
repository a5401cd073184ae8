#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "chainnn/tensor.hpp"

namespace chainnn {

enum class ScanMode { Dual, Single };

const char* to_string(ScanMode m);

// The scan plane is the 2D coordinate space streamed into a primitive: padded
// ifmap coordinates for direct mapping, phase sub-image coordinates for
// phase-split strided layers. An output (x, y) reads plane pixels
// (x*stride + i, y*stride + j).
struct PlaneCoord {
  int row = 0;
  int col = 0;
  bool operator==(const PlaneCoord&) const = default;
  auto operator<=>(const PlaneCoord&) const = default;
};

// A band of output rows (plus an output column segment) processed by one
// pass of the scan, and the ifmap strip it reads.
struct RowGroup {
  int index = 0;
  int segment = 0;
  int out_row_begin = 0;
  int out_rows = 0;   // scheduled rows, dummy rows included
  int real_rows = 0;  // rows that exist in the ofmap
  int out_col_begin = 0;
  int out_cols = 0;
  int strip_row_begin = 0;
  int strip_rows = 0;
  int strip_col_begin = 0;
  int strip_cols = 0;

  bool operator==(const RowGroup&) const = default;
};

// Output rows per group: K in dual mode (stride 1); 1 in single mode; for
// stride > 1 in dual mode, the largest count that keeps at most two scan
// columns live at once.
int rows_per_group(int K, int stride, ScanMode mode);

// Strip bytes needed for a group covering out_cols output columns.
int64_t strip_bytes(int K, int stride, ScanMode mode, int out_cols, int bytes_per_sample = 2);

// Groups covering all E output rows (last group padded with dummy rows),
// split into column segments of at most max_out_cols outputs (0 = no limit).
std::vector<RowGroup> row_groups(const LayerParams& p, ScanMode mode = ScanMode::Dual,
                                 int max_out_cols = 0);

enum class Channel : uint8_t { Odd, Even };
enum class MuxSel : uint8_t { Hold, Odd, Even };

struct FeedEvent {
  int64_t cycle = 0;  // 1-indexed within the pass
  Channel channel = Channel::Odd;
  PlaneCoord pixel;
};

struct OutputEvent {
  int64_t cycle = 0;  // compute cycle: all K*K MACs of the window happen here
  int out_row = 0;
  int out_col = 0;
  bool dummy = false;
};

struct StreamSchedule {
  int K = 1;
  int stride = 1;
  int E = 1;
  ScanMode mode = ScanMode::Dual;
  RowGroup group;
  int64_t length = 0;  // cycles 1..length
  std::vector<FeedEvent> feeds;
  std::vector<MuxSel> mux;  // [(t-1)*K*K + pe]
  std::vector<OutputEvent> outputs;
  int64_t warmup_cycles = 0;
  double steady_state_throughput = 0.0;
  bool degraded = false;

  // Per-cycle lookups (index into feeds/outputs, -1 = none), size length+1.
  std::vector<int32_t> odd_at;
  std::vector<int32_t> even_at;
  std::vector<int32_t> output_at;

  int pes() const { return K * K; }
  MuxSel select(int64_t cycle, int pe) const {
    return mux[static_cast<size_t>(cycle - 1) * pes() + pe];
  }
  MuxSel& select(int64_t cycle, int pe) {
    return mux[static_cast<size_t>(cycle - 1) * pes() + pe];
  }
  // Rebuilds odd_at/even_at/output_at from feeds and outputs.
  void index_cycles();
};

// Column-wise scan: strip columns are streamed right to left, each column
// bottom to top, one pixel per channel per cycle; scan column s (1-indexed)
// rides OddIF when s is odd. Pixel (R, C) of the strip is fed at
// 1 + K*(W-1-C) + (L-1-R), so a window completes every cycle once the
// pipeline is full and its K*K pixels are exactly those fed in the last K*K
// cycles.
StreamSchedule build_schedule(const RowGroup& g, const LayerParams& p, ScanMode mode);

enum class ViolationKind { Window, Bandwidth, Parity, Delay, Feasibility, Reuse };

const char* to_string(ViolationKind k);

struct Violation {
  int64_t cycle = 0;
  ViolationKind kind = ViolationKind::Window;
  std::string message;
};

struct PixelFeedCount {
  PlaneCoord pixel;
  int count = 0;
};

struct ValidationReport {
  bool window_property_ok = true;
  bool bandwidth_ok = true;
  bool parity_ok = true;
  bool delay_ok = true;
  bool feasibility_ok = true;
  bool reuse_ok = true;
  int64_t first_valid_cycle = 0;
  int64_t outputs = 0;
  double measured_throughput = 0.0;
  std::optional<int64_t> channel_lag;
  std::vector<Violation> violations;
  std::vector<PixelFeedCount> feed_counts;

  bool ok() const { return violations.empty(); }
  std::string summary() const;
};

// Checks s against the register model independently of how it was built.
ValidationReport validate_schedule(const StreamSchedule& s, const LayerParams& p);

struct MacEvent {
  int64_t cycle = 0;
  int pe = 0;
  PlaneCoord pixel;
};

// Flattened (cycle, PE, pixel) MAC operands. Throws InvariantError if the
// schedule does not validate.
std::vector<MacEvent> mac_stream(const StreamSchedule& s, const LayerParams& p);

// One line per cycle: cycle, OddIF feed, EvenIF feed, completed window.
void write_trace(std::ostream& os, const StreamSchedule& s);

}  // namespace chainnn
