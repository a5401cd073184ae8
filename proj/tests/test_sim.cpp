#include <doctest.h>

#include <random>
#include <sstream>

#include "chainnn/errors.hpp"
#include "chainnn/perf.hpp"
#include "chainnn/sim.hpp"
#include "chainnn/synth.hpp"

using namespace chainnn;

namespace {

ChainConfig chain_of(int pes, int stages = 3) {
  ChainConfig c;
  c.num_pes = pes;
  c.pipeline_stages = stages;
  return c;
}

void check_same_summary(const LayerSummary& a, const LayerSummary& b) {
  CHECK(a.cycles == b.cycles);
  CHECK(a.traffic == b.traffic);
  CHECK(a.mac_events == b.mac_events);
  CHECK(a.dummy_mac_events == b.dummy_mac_events);
  CHECK(a.zero_feeds == b.zero_feeds);
  CHECK(a.passes == b.passes);
  CHECK(a.load_phases == b.load_phases);
  CHECK(a.first_output_latency == b.first_output_latency);
  CHECK(a.temporal_utilization == b.temporal_utilization);
}

}  // namespace

TEST_CASE("kernel load streams one weight per cycle") {
  const auto p = LayerParams::make(1, 1, 1, 5, 3);
  const auto t = synth_tensors(p, 1);
  const TilingPlan plan = plan_tiling(p, chain_of(9));
  const KernelLayout lay = layout_kernels(plan, 0, t.kernels);
  ChainState ch = make_chain(chain_of(9), 3);
  CHECK(load_kernels(ch, lay) == 9);
  CHECK(ch.cycle == 9);
  for (int pe = 0; pe < 9; ++pe) {
    REQUIRE(ch.primitives[0].pes[pe].kmemory.size() == 1);
    CHECK(ch.primitives[0].pes[pe].kmemory[0].weight == lay.pe_tables[0][pe][0].weight);
  }
  ChainState wrong = make_chain(chain_of(25), 5);
  CHECK_THROWS_AS(load_kernels(wrong, lay), ShapeError);
}

TEST_CASE("K=1 primitive: output w*x after the pipeline delay") {
  for (int stages : {1, 2, 4}) {
    ChainState ch = make_chain(chain_of(1, stages), 1);
    KernelLayout lay;
    lay.K = 1;
    lay.primitives = 1;
    lay.contexts = 1;
    lay.pe_tables = {{{KernelEntry{0, 0, 0, 0, 0, 7}}}};
    lay.load_order = {{0, 0, 0}};
    load_kernels(ch, lay);
    set_context(ch, 0, 1);
    const MuxSel odd = MuxSel::Odd;
    CycleInput in;
    in.odd = {true, -5};
    in.mux = &odd;
    in.tag = OutputTag{};
    auto out = step(ch, in);
    for (int d = 1; d < stages; ++d) {
      CHECK(out.empty());
      out = step(ch, CycleInput{});
    }
    REQUIRE(out.size() == 1);
    CHECK(out[0].value == -35);
  }
}

TEST_CASE("selecting an empty register is a simulation fault") {
  ChainState ch = make_chain(chain_of(9), 3);
  for (auto& pe : ch.primitives[0].pes) pe.slot_of_context = {-1};
  set_context(ch, 0, 1);
  std::vector<MuxSel> mux(9, MuxSel::Even);
  CycleInput in;
  in.odd = {true, 1};
  in.mux = mux.data();
  in.tag = OutputTag{};
  CHECK_THROWS_AS(step(ch, in), SimulationFault);
}

TEST_CASE("all-zero kernels give the bias everywhere") {
  const auto p = LayerParams::make(2, 3, 4, 8, 3, 1, 1, 1);
  auto t = synth_tensors(p, 2);
  std::fill(t.kernels.data.begin(), t.kernels.data.end(), 0);
  const LayerRun r = run_layer(p, t.ifmaps, t.kernels, t.bias, ChainConfig{});
  for (int n = 0; n < p.N; ++n)
    for (int m = 0; m < p.M; ++m)
      for (int x = 0; x < p.E; ++x)
        for (int y = 0; y < p.E; ++y) CHECK(r.ofmaps.at({n, m, x, y}) == t.bias.data[m]);
}

TEST_CASE("random layers: bit-exact, counters conserve, analytic model agrees") {
  std::mt19937 rng(23);
  for (int it = 0; it < 40; ++it) {
    const int g = 1 + rng() % 2, K = 1 + rng() % 5, stride = 1 + rng() % 2;
    const auto p = LayerParams::make(1 + rng() % 2, g * (1 + rng() % 2), g * (1 + rng() % 4),
                                     std::max(K, 4 + int(rng() % 9)), K, stride, rng() % 2, g);
    ChainConfig cfg = chain_of(K * K * (1 + rng() % 3), 1 + rng() % 4);
    cfg.kmem_capacity = 1 + rng() % 6;
    for (auto mode : {ScanMode::Dual, ScanMode::Single})
      for (auto mapping : {StrideMapping::PhaseSplit, StrideMapping::Direct}) {
        const auto t = synth_tensors(p, 100 + it);
        SimOptions opt;
        opt.mode = mode;
        opt.mapping = mapping;
        const LayerRun r = run_layer(p, t.ifmaps, t.kernels, t.bias, cfg, opt);
        const auto gold = golden_convolution(t.ifmaps, t.kernels, t.bias, p, Arithmetic::Fixed, opt.fmt);
        REQUIRE(r.ofmaps.data == gold.data);
        CHECK(r.summary.mac_events == mac_count(p));
        CHECK(r.overflow_events == 0);
        check_same_summary(r.summary, analytic_layer(p, cfg, mode, mapping));
        CHECK(r.summary.cycles.compute >= cycle_lower_bound(p, r.summary.map));
      }
  }
}

TEST_CASE("first output leaves the chain at first_valid_cycle + stages - 1") {
  const auto p = LayerParams::make(1, 1, 1, 5, 3);
  const auto t = synth_tensors(p, 3);
  for (int stages : {1, 3, 5}) {
    const LayerRun r = run_layer(p, t.ifmaps, t.kernels, t.bias, chain_of(9, stages));
    const auto s = build_schedule(row_groups(p).front(), p, ScanMode::Dual);
    CHECK(r.summary.first_output_latency == validate_schedule(s, p).first_valid_cycle + stages - 1);
  }
}

TEST_CASE("pipeline depth changes latency only") {
  const auto p = LayerParams::make(1, 3, 5, 11, 3, 1, 1, 1);
  const auto t = synth_tensors(p, 4);
  const LayerRun base = run_layer(p, t.ifmaps, t.kernels, t.bias, chain_of(18, 1));
  for (int stages : {3, 5}) {
    const LayerRun r = run_layer(p, t.ifmaps, t.kernels, t.bias, chain_of(18, stages));
    CHECK(r.ofmaps.data == base.ofmaps.data);
    CHECK(r.summary.cycles.compute == base.summary.cycles.compute);
    CHECK(r.summary.cycles.load == base.summary.cycles.load);
    CHECK(r.summary.traffic == base.summary.traffic);
    CHECK(r.summary.first_output_latency == base.summary.first_output_latency + stages - 1);
  }
}

TEST_CASE("interior-dominated dual layer keeps the chain busy") {
  // E = 63 is a multiple of K, so no dummy rows; the only loss is the
  // K^2 - 1 cycle fill per pass of K*E + K^2 - 1 cycles
  const auto p = LayerParams::make(1, 1, 64, 63, 3, 1, 1, 1);
  const auto t = synth_tensors(p, 5);
  const LayerRun r = run_layer(p, t.ifmaps, t.kernels, t.bias, ChainConfig{});
  const auto u = utilization_report(r.summary, r.summary.map);
  CHECK(u.mapping == 1.0);
  CHECK(u.temporal >= 0.95);
  SimOptions single;
  single.mode = ScanMode::Single;
  const auto p1 = LayerParams::make(1, 1, 1, 64, 3);
  const auto t1 = synth_tensors(p1, 6);
  const LayerRun s = run_layer(p1, t1.ifmaps, t1.kernels, t1.bias, chain_of(9), single);
  CHECK(s.summary.temporal_utilization == doctest::Approx(1.0 / 3).epsilon(0.04));
}

TEST_CASE("identical inputs give identical runs") {
  const auto p = LayerParams::make(2, 2, 3, 9, 3, 2, 1, 1);
  const auto t = synth_tensors(p, 8);
  std::ostringstream a, b;
  SimOptions opt;
  opt.trace = &a;
  const LayerRun r1 = run_layer(p, t.ifmaps, t.kernels, t.bias, ChainConfig{}, opt);
  opt.trace = &b;
  const LayerRun r2 = run_layer(p, t.ifmaps, t.kernels, t.bias, ChainConfig{}, opt);
  CHECK(r1.ofmaps.data == r2.ofmaps.data);
  check_same_summary(r1.summary, r2.summary);
  CHECK(a.str() == b.str());
  CHECK_FALSE(a.str().empty());
}

TEST_CASE("network: batch scales compute, not kernel load") {
  auto layer = [](int batch, uint64_t seed) {
    const auto p = LayerParams::make(batch, 2, 4, 8, 3, 1, 1, 2);
    const auto t = synth_tensors(p, seed);
    return NetworkLayer{p, t.ifmaps, t.kernels, t.bias};
  };
  const NetworkRun one = run_network({layer(1, 1), layer(1, 2)}, ChainConfig{});
  const NetworkRun four = run_network({layer(4, 1), layer(4, 2)}, ChainConfig{});
  CHECK(four.cycles.load == one.cycles.load);
  CHECK(four.cycles.compute == 4 * one.cycles.compute);

  const NetworkLayer solo = layer(1, 3);
  const NetworkRun n = run_network({solo}, ChainConfig{});
  const LayerRun r = run_layer(solo.params, solo.ifmaps, solo.kernels, solo.bias, ChainConfig{});
  CHECK(n.layers[0].ofmaps.data == r.ofmaps.data);
  CHECK(n.cycles == r.summary.cycles);

  NetworkLayer bad = layer(1, 4);
  bad.bias = SampleTensor({3});
  try {
    run_network({solo, bad}, ChainConfig{});
    FAIL("expected ShapeError");
  } catch (const ShapeError& e) {
    CHECK(std::string(e.what()).rfind("layer 1:", 0) == 0);
  }
}
