#include "chainnn/scan.hpp"

#include <algorithm>
#include <map>
#include <ostream>
#include <sstream>

#include "chainnn/errors.hpp"

namespace chainnn {

const char* to_string(ScanMode m) { return m == ScanMode::Dual ? "dual" : "single"; }

const char* to_string(ViolationKind k) {
  switch (k) {
    case ViolationKind::Window: return "WINDOW";
    case ViolationKind::Bandwidth: return "BANDWIDTH";
    case ViolationKind::Parity: return "PARITY";
    case ViolationKind::Delay: return "DELAY";
    case ViolationKind::Feasibility: return "FEASIBILITY";
    case ViolationKind::Reuse: return "REUSE";
  }
  return "?";
}

int rows_per_group(int K, int stride, ScanMode mode) {
  if (mode == ScanMode::Single) return 1;
  return std::max(1, std::min(K, K / stride + 1));
}

int64_t strip_bytes(int K, int stride, ScanMode mode, int out_cols, int bytes_per_sample) {
  const int G = rows_per_group(K, stride, mode);
  const int64_t rows = int64_t{G - 1} * stride + K;
  const int64_t cols = int64_t{out_cols - 1} * stride + K;
  return rows * cols * bytes_per_sample;
}

std::vector<RowGroup> row_groups(const LayerParams& p, ScanMode mode, int max_out_cols) {
  const int G = rows_per_group(p.K, p.stride, mode);
  const int seg_cols = max_out_cols > 0 ? std::min(max_out_cols, p.E) : p.E;
  std::vector<RowGroup> out;
  int index = 0;
  for (int r0 = 0; r0 < p.E; r0 += G, ++index) {
    int segment = 0;
    for (int c0 = 0; c0 < p.E; c0 += seg_cols, ++segment) {
      RowGroup g;
      g.index = index;
      g.segment = segment;
      g.out_row_begin = r0;
      g.out_rows = G;
      g.real_rows = std::min(G, p.E - r0);
      g.out_col_begin = c0;
      g.out_cols = std::min(seg_cols, p.E - c0);
      g.strip_row_begin = r0 * p.stride;
      g.strip_rows = (G - 1) * p.stride + p.K;
      g.strip_col_begin = c0 * p.stride;
      g.strip_cols = (g.out_cols - 1) * p.stride + p.K;
      out.push_back(g);
    }
  }
  return out;
}

void StreamSchedule::index_cycles() {
  odd_at.assign(static_cast<size_t>(length) + 1, -1);
  even_at.assign(static_cast<size_t>(length) + 1, -1);
  output_at.assign(static_cast<size_t>(length) + 1, -1);
  for (size_t k = 0; k < feeds.size(); ++k) {
    const auto& f = feeds[k];
    if (f.cycle < 1 || f.cycle > length) continue;
    (f.channel == Channel::Odd ? odd_at : even_at)[f.cycle] = static_cast<int32_t>(k);
  }
  for (size_t k = 0; k < outputs.size(); ++k) {
    const auto& o = outputs[k];
    if (o.cycle >= 1 && o.cycle <= length) output_at[o.cycle] = static_cast<int32_t>(k);
  }
}

StreamSchedule build_schedule(const RowGroup& g, const LayerParams& p, ScanMode mode) {
  const int K = p.K;
  const int sigma = p.stride;
  if (g.out_rows != rows_per_group(K, sigma, mode))
    throw ShapeError("row group was built for a different scan mode");
  const int L = g.strip_rows;
  const int W = g.strip_cols;

  StreamSchedule s;
  s.K = K;
  s.stride = sigma;
  s.E = p.E;
  s.mode = mode;
  s.group = g;
  s.length = int64_t{K} * (W - 1) + L;

  auto feed_cycle = [&](int local_row, int local_col) {
    return 1 + int64_t{K} * (W - 1 - local_col) + (L - 1 - local_row);
  };
  auto channel_of = [&](int local_col) {
    if (mode == ScanMode::Single) return Channel::Odd;
    const int scan_index = W - local_col;  // 1-indexed, rightmost column first
    return (scan_index % 2 == 1) ? Channel::Odd : Channel::Even;
  };

  s.feeds.reserve(static_cast<size_t>(L) * W);
  for (int sc = 0; sc < W; ++sc) {
    const int local_col = W - 1 - sc;
    for (int rr = 0; rr < L; ++rr) {
      const int local_row = L - 1 - rr;
      s.feeds.push_back({feed_cycle(local_row, local_col), channel_of(local_col),
                         {g.strip_row_begin + local_row, g.strip_col_begin + local_col}});
    }
  }
  std::stable_sort(s.feeds.begin(), s.feeds.end(), [](const FeedEvent& a, const FeedEvent& b) {
    if (a.cycle != b.cycle) return a.cycle < b.cycle;
    return a.channel < b.channel;
  });

  s.mux.assign(static_cast<size_t>(s.length) * K * K, MuxSel::Hold);
  for (int r = 0; r < g.out_rows; ++r)
    for (int y = 0; y < g.out_cols; ++y) {
      const int row0 = r * sigma;
      const int col0 = y * sigma;
      const int64_t t = feed_cycle(row0, col0);
      s.outputs.push_back({t, g.out_row_begin + r, g.out_col_begin + y, g.out_row_begin + r >= p.E});
      for (int j = 0; j < K; ++j)
        for (int i = 0; i < K; ++i) {
          const Channel ch = channel_of(col0 + j);
          s.select(t, j * K + i) = ch == Channel::Odd ? MuxSel::Odd : MuxSel::Even;
        }
    }
  std::sort(s.outputs.begin(), s.outputs.end(),
            [](const OutputEvent& a, const OutputEvent& b) { return a.cycle < b.cycle; });

  s.warmup_cycles = s.outputs.empty() ? 0 : s.outputs.front().cycle - 1;
  if (s.outputs.size() >= 2) {
    const auto span = s.outputs.back().cycle - s.outputs.front().cycle;
    s.steady_state_throughput = static_cast<double>(s.outputs.size() - 1) / static_cast<double>(span);
  } else {
    s.steady_state_throughput = 1.0;
  }
  const double target = mode == ScanMode::Dual ? 1.0 : 1.0 / K;
  s.degraded = s.steady_state_throughput + 1e-12 < target;
  s.index_cycles();
  return s;
}

std::string ValidationReport::summary() const {
  std::ostringstream os;
  os << "window=" << (window_property_ok ? "ok" : "FAIL")
     << " bandwidth=" << (bandwidth_ok ? "ok" : "FAIL")
     << " parity=" << (parity_ok ? "ok" : "FAIL") << " delay=" << (delay_ok ? "ok" : "FAIL")
     << " feasibility=" << (feasibility_ok ? "ok" : "FAIL")
     << " reuse=" << (reuse_ok ? "ok" : "FAIL") << " first_valid_cycle=" << first_valid_cycle
     << " throughput=" << measured_throughput;
  if (!violations.empty()) {
    const auto& v = violations.front();
    os << " first_violation=" << to_string(v.kind) << "@" << v.cycle << ": " << v.message;
  }
  return os.str();
}

namespace {

std::string coord_str(const PlaneCoord& c) {
  return "(" + std::to_string(c.row) + "," + std::to_string(c.col) + ")";
}

}  // namespace

ValidationReport validate_schedule(const StreamSchedule& s, const LayerParams& p) {
  ValidationReport rep;
  const int K = p.K;
  const int sigma = p.stride;
  const RowGroup& g = s.group;
  auto fail = [&](ViolationKind kind, int64_t cycle, std::string msg) {
    switch (kind) {
      case ViolationKind::Window: rep.window_property_ok = false; break;
      case ViolationKind::Bandwidth: rep.bandwidth_ok = false; break;
      case ViolationKind::Parity: rep.parity_ok = false; break;
      case ViolationKind::Delay: rep.delay_ok = false; break;
      case ViolationKind::Feasibility: rep.feasibility_ok = false; break;
      case ViolationKind::Reuse: rep.reuse_ok = false; break;
    }
    rep.violations.push_back({cycle, kind, std::move(msg)});
  };

  if (s.K != K || s.stride != sigma) {
    fail(ViolationKind::Window, 0, "schedule kernel/stride does not match layer");
    return rep;
  }

  // Channel occupancy: (channel, cycle) -> pixel.
  std::map<std::pair<int, int64_t>, PlaneCoord> resident;
  std::map<PlaneCoord, int> counts;
  std::optional<int64_t> first_odd, first_even;
  for (const auto& f : s.feeds) {
    if (f.cycle < 1 || f.cycle > s.length)
      fail(ViolationKind::Bandwidth, f.cycle, "feed outside the pass");
    const auto key = std::make_pair(static_cast<int>(f.channel), f.cycle);
    if (!resident.emplace(key, f.pixel).second)
      fail(ViolationKind::Bandwidth, f.cycle,
           std::string("two feeds on ") + (f.channel == Channel::Odd ? "OddIF" : "EvenIF"));
    ++counts[f.pixel];
    auto& first = f.channel == Channel::Odd ? first_odd : first_even;
    if (!first || f.cycle < *first) first = f.cycle;

    const int local_col = f.pixel.col - g.strip_col_begin;
    const int local_row = f.pixel.row - g.strip_row_begin;
    if (local_col < 0 || local_col >= g.strip_cols || local_row < 0 || local_row >= g.strip_rows) {
      fail(ViolationKind::Reuse, f.cycle, "feed of pixel " + coord_str(f.pixel) + " outside strip");
      continue;
    }
    if (s.mode == ScanMode::Single) {
      if (f.channel != Channel::Odd)
        fail(ViolationKind::Parity, f.cycle, "single-channel schedule uses EvenIF");
    } else {
      const int scan_index = g.strip_cols - local_col;
      const Channel want = scan_index % 2 == 1 ? Channel::Odd : Channel::Even;
      if (f.channel != want)
        fail(ViolationKind::Parity, f.cycle,
             "pixel " + coord_str(f.pixel) + " on wrong channel for scan column " +
                 std::to_string(scan_index));
    }
  }

  if (s.mode == ScanMode::Dual) {
    if (first_odd && first_even) {
      rep.channel_lag = *first_even - *first_odd;
      if (*rep.channel_lag != K)
        fail(ViolationKind::Delay, *first_even,
             "EvenIF lags OddIF by " + std::to_string(*rep.channel_lag) + " cycles, expected " +
                 std::to_string(K));
    } else if (first_even && !first_odd) {
      fail(ViolationKind::Delay, *first_even, "EvenIF active without OddIF");
    } else if (g.strip_cols > 1) {
      fail(ViolationKind::Delay, 0, "EvenIF never starts");
    }
  }

  for (int r = 0; r < g.strip_rows; ++r)
    for (int c = 0; c < g.strip_cols; ++c) {
      const PlaneCoord px{g.strip_row_begin + r, g.strip_col_begin + c};
      const auto it = counts.find(px);
      const int n = it == counts.end() ? 0 : it->second;
      if (n != 1)
        fail(ViolationKind::Reuse, 0,
             "pixel " + coord_str(px) + " fed " + std::to_string(n) + " times");
    }
  rep.feed_counts.reserve(counts.size());
  for (const auto& [px, n] : counts) rep.feed_counts.push_back({px, n});

  // Window property and register feasibility, one window per compute cycle.
  std::map<int64_t, const OutputEvent*> by_cycle;
  std::map<std::pair<int, int>, int> seen;
  for (const auto& o : s.outputs) {
    if (o.cycle < 1 || o.cycle > s.length) {
      fail(ViolationKind::Window, o.cycle, "output outside the pass");
      continue;
    }
    if (!by_cycle.emplace(o.cycle, &o).second)
      fail(ViolationKind::Window, o.cycle, "two windows complete in one cycle");
    ++seen[{o.out_row, o.out_col}];
  }
  for (int r = 0; r < g.out_rows; ++r)
    for (int y = 0; y < g.out_cols; ++y) {
      const auto key = std::make_pair(g.out_row_begin + r, g.out_col_begin + y);
      const auto it = seen.find(key);
      if (it == seen.end() || it->second != 1)
        fail(ViolationKind::Window, 0,
             "window (" + std::to_string(key.first) + "," + std::to_string(key.second) +
                 ") not produced exactly once");
    }
  if (seen.size() != static_cast<size_t>(g.out_rows) * g.out_cols)
    fail(ViolationKind::Window, 0, "outputs outside the group");

  const size_t pes = static_cast<size_t>(K) * K;
  if (s.mux.size() != static_cast<size_t>(s.length) * pes) {
    fail(ViolationKind::Window, 0, "mux table has wrong size");
    return rep;
  }
  const OutputEvent* prev = nullptr;
  for (int64_t t = 1; t <= s.length; ++t) {
    const auto it = by_cycle.find(t);
    if (it == by_cycle.end()) {
      for (size_t pe = 0; pe < pes; ++pe)
        if (s.select(t, static_cast<int>(pe)) != MuxSel::Hold) {
          fail(ViolationKind::Window, t, "PE " + std::to_string(pe) + " selects without a window");
          break;
        }
      continue;
    }
    const OutputEvent& o = *it->second;
    if (prev && (o.out_col > prev->out_col ||
                 (o.out_col == prev->out_col && o.out_row > prev->out_row)))
      fail(ViolationKind::Window, t, "windows not completed in column-wise scan order");
    prev = &o;
    for (int pe = 0; pe < static_cast<int>(pes); ++pe) {
      const int i = pe % K;
      const int j = pe / K;
      const PlaneCoord want{o.out_row * sigma + i, o.out_col * sigma + j};
      const MuxSel sel = s.select(t, pe);
      if (sel == MuxSel::Hold) {
        fail(ViolationKind::Window, t, "PE " + std::to_string(pe) + " idle during a window");
        continue;
      }
      const int ch = sel == MuxSel::Odd ? 0 : 1;
      const auto r = resident.find({ch, t - pe});
      if (r == resident.end()) {
        fail(ViolationKind::Feasibility, t,
             "PE " + std::to_string(pe) + " selects an empty channel register");
        continue;
      }
      if (r->second != want)
        fail(ViolationKind::Window, t,
             "PE " + std::to_string(pe) + " sees " + coord_str(r->second) + ", window needs " +
                 coord_str(want));
    }
  }

  rep.outputs = static_cast<int64_t>(s.outputs.size());
  if (!by_cycle.empty()) {
    rep.first_valid_cycle = by_cycle.begin()->first;
    const int64_t span = by_cycle.rbegin()->first - by_cycle.begin()->first;
    rep.measured_throughput =
        span > 0 ? static_cast<double>(by_cycle.size() - 1) / static_cast<double>(span) : 1.0;
  }
  return rep;
}

std::vector<MacEvent> mac_stream(const StreamSchedule& s, const LayerParams& p) {
  const ValidationReport rep = validate_schedule(s, p);
  if (!rep.ok()) throw InvariantError("mac_stream refused: schedule invalid: " + rep.summary());
  std::map<std::pair<int, int64_t>, PlaneCoord> resident;
  for (const auto& f : s.feeds) resident[{static_cast<int>(f.channel), f.cycle}] = f.pixel;
  std::vector<MacEvent> out;
  out.reserve(s.outputs.size() * static_cast<size_t>(s.pes()));
  for (const auto& o : s.outputs)
    for (int pe = 0; pe < s.pes(); ++pe) {
      const int ch = s.select(o.cycle, pe) == MuxSel::Odd ? 0 : 1;
      out.push_back({o.cycle, pe, resident.at({ch, o.cycle - pe})});
    }
  return out;
}

void write_trace(std::ostream& os, const StreamSchedule& s) {
  os << "# K=" << s.K << " stride=" << s.stride << " mode=" << to_string(s.mode)
     << " group=" << s.group.index << " segment=" << s.group.segment << " cycles=" << s.length
     << "\n# cycle odd even output\n";
  StreamSchedule idx = s;
  if (idx.odd_at.size() != static_cast<size_t>(s.length) + 1) idx.index_cycles();
  for (int64_t t = 1; t <= s.length; ++t) {
    os << t;
    for (const auto* at : {&idx.odd_at, &idx.even_at}) {
      const int32_t k = (*at)[t];
      os << ' ' << (k < 0 ? std::string("-") : coord_str(s.feeds[k].pixel));
    }
    const int32_t o = idx.output_at[t];
    if (o < 0) {
      os << " -";
    } else {
      const auto& ev = s.outputs[o];
      os << " (" << ev.out_row << ',' << ev.out_col << ')' << (ev.dummy ? "d" : "");
    }
    os << '\n';
  }
}

}  // namespace chainnn
