#include <doctest.h>

#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "chainnn/errors.hpp"
#include "chainnn/scan.hpp"

using namespace chainnn;

#ifndef CHAINNN_GOLDEN_DIR
#define CHAINNN_GOLDEN_DIR "tests/golden"
#endif

namespace {

bool has(const ValidationReport& r, ViolationKind k) {
  for (const auto& v : r.violations)
    if (v.kind == k) return true;
  return false;
}

// Replays the register model by brute force: a shift register per channel,
// then checks each output's K*K operands are exactly its window.
void brute_force_replay(const StreamSchedule& s, const LayerParams& p) {
  const int pes = s.K * s.K;
  std::vector<std::optional<PlaneCoord>> odd(pes), even(pes);
  std::map<int64_t, PlaneCoord> odd_feed, even_feed;
  for (const auto& f : s.feeds) (f.channel == Channel::Odd ? odd_feed : even_feed)[f.cycle] = f.pixel;
  std::map<int64_t, const OutputEvent*> out;
  for (const auto& o : s.outputs) out[o.cycle] = &o;
  for (int64_t t = 1; t <= s.length; ++t) {
    for (int q = pes - 1; q > 0; --q) {
      odd[q] = odd[q - 1];
      even[q] = even[q - 1];
    }
    odd[0] = odd_feed.count(t) ? std::optional(odd_feed[t]) : std::nullopt;
    even[0] = even_feed.count(t) ? std::optional(even_feed[t]) : std::nullopt;
    if (!out.count(t)) continue;
    const OutputEvent& o = *out[t];
    std::set<PlaneCoord> seen;
    for (int pe = 0; pe < pes; ++pe) {
      const MuxSel sel = s.select(t, pe);
      REQUIRE(sel != MuxSel::Hold);
      const auto& reg = sel == MuxSel::Odd ? odd[pe] : even[pe];
      REQUIRE(reg.has_value());
      const int i = pe % s.K, j = pe / s.K;
      CHECK(*reg == PlaneCoord{o.out_row * p.stride + i,
                               o.out_col * p.stride + j});
      seen.insert(*reg);
    }
    CHECK(seen.size() == size_t(pes));
  }
}

}  // namespace

TEST_CASE("dual stride-1 schedules validate, start at K^2 and sustain 1 output/cycle") {
  for (int K : {1, 2, 3, 5, 7}) {
    const int H = 34 + K - 1;  // E = 34 output columns per group
    const auto p = LayerParams::make(1, 1, 1, H, K, 1, 0, 1);
    for (const auto& g : row_groups(p)) {
      const StreamSchedule s = build_schedule(g, p, ScanMode::Dual);
      const ValidationReport r = validate_schedule(s, p);
      CHECK_MESSAGE(r.ok(), r.summary());
      CHECK(r.first_valid_cycle == int64_t{K} * K);
      if (K > 1) CHECK(r.channel_lag == int64_t{K});
      CHECK(s.outputs.size() == size_t(g.out_rows) * g.out_cols);
      CHECK(s.steady_state_throughput == 1.0);
      CHECK(s.length == int64_t{K} * p.E + K * K - 1);
      brute_force_replay(s, p);
    }
  }
}

TEST_CASE("K=3 ifmap 5x5: first window on cycle 9, EvenIF starts on cycle 4") {
  const auto p = LayerParams::make(1, 1, 1, 5, 3);
  const StreamSchedule s = build_schedule(row_groups(p).front(), p, ScanMode::Dual);
  const auto r = validate_schedule(s, p);
  CHECK(r.ok());
  CHECK(r.first_valid_cycle == 9);
  CHECK(s.even_at[4] >= 0);
  for (int t = 1; t < 4; ++t) CHECK(s.even_at[t] < 0);
  // feed(R, C) = 1 + K(W-1-C) + (L-1-R) with W = L = 5
  CHECK(s.feeds[s.odd_at[1]].pixel == PlaneCoord{4, 4});
  CHECK(s.feeds[s.even_at[4]].pixel == PlaneCoord{4, 3});
  CHECK(s.feeds[s.odd_at[7]].pixel == PlaneCoord{4, 2});
  CHECK(s.outputs[s.output_at[9]].out_row == 2);
  CHECK(s.outputs[s.output_at[9]].out_col == 2);
}

TEST_CASE("single-channel mode runs at 1/K") {
  for (int K : {2, 3, 5}) {
    const auto p = LayerParams::make(1, 1, 1, 120, K, 1, 0, 1);
    const auto groups = row_groups(p, ScanMode::Single);
    const StreamSchedule s = build_schedule(groups[3], p, ScanMode::Single);
    const auto r = validate_schedule(s, p);
    CHECK_MESSAGE(r.ok(), r.summary());
    CHECK(std::abs(s.steady_state_throughput - 1.0 / K) < 0.01);
    for (const auto& f : s.feeds) CHECK(f.channel == Channel::Odd);
  }
}

TEST_CASE("strided schedules validate") {
  for (int K : {2, 3, 5})
    for (int stride : {2, 3}) {
      const auto p = LayerParams::make(1, 1, 1, 17, K, stride, 1, 1);
      for (const auto& g : row_groups(p)) {
        const auto s = build_schedule(g, p, ScanMode::Dual);
        const auto r = validate_schedule(s, p);
        CHECK_MESSAGE(r.ok(), r.summary());
        brute_force_replay(s, p);
      }
    }
}

TEST_CASE("validator rejects an off-by-one EvenIF lag") {
  const auto p = LayerParams::make(1, 1, 1, 8, 3);
  StreamSchedule s = build_schedule(row_groups(p).front(), p, ScanMode::Dual);
  for (auto& f : s.feeds)
    if (f.channel == Channel::Even) f.cycle += 1;
  s.index_cycles();
  const auto r = validate_schedule(s, p);
  CHECK_FALSE(r.ok());
  CHECK(has(r, ViolationKind::Delay));
  CHECK(has(r, ViolationKind::Feasibility));
  CHECK_THROWS_AS(mac_stream(s, p), InvariantError);
}

TEST_CASE("validator rejects a double feed and a parity swap") {
  const auto p = LayerParams::make(1, 1, 1, 8, 3);
  const StreamSchedule base = build_schedule(row_groups(p).front(), p, ScanMode::Dual);

  StreamSchedule dup = base;
  FeedEvent extra = dup.feeds[5];
  extra.channel = extra.channel == Channel::Odd ? Channel::Even : Channel::Odd;
  dup.feeds.push_back(extra);
  dup.index_cycles();
  const auto r1 = validate_schedule(dup, p);
  CHECK(has(r1, ViolationKind::Reuse));

  StreamSchedule swapped = base;
  for (auto& f : swapped.feeds) f.channel = f.channel == Channel::Odd ? Channel::Even : Channel::Odd;
  swapped.index_cycles();
  const auto r2 = validate_schedule(swapped, p);
  CHECK(has(r2, ViolationKind::Parity));
}

TEST_CASE("mac_stream gives K^2 events per window") {
  const auto p = LayerParams::make(1, 1, 1, 6, 3);
  const auto s = build_schedule(row_groups(p).front(), p, ScanMode::Dual);
  CHECK(mac_stream(s, p).size() == s.outputs.size() * 9);
}

TEST_CASE("trace matches the pinned golden file") {
  const auto p = LayerParams::make(1, 1, 1, 5, 3);
  const auto s = build_schedule(row_groups(p).front(), p, ScanMode::Dual);
  std::ostringstream got;
  write_trace(got, s);
  std::ifstream f(std::string(CHAINNN_GOLDEN_DIR) + "/k3_h5_dual.trace");
  REQUIRE(f.good());
  std::stringstream want;
  want << f.rdbuf();
  CHECK(got.str() == want.str());
}
