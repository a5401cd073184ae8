#include <doctest.h>

#include <sstream>

#include "chainnn/memory.hpp"
#include "chainnn/perf.hpp"
#include "chainnn/presets.hpp"
#include "chainnn/sim.hpp"
#include "chainnn/synth.hpp"

using namespace chainnn;

TEST_CASE("reuse factors") {
  CHECK(imem_reads_per_pixel(3) == doctest::Approx(5.0 / 3));
  CHECK(imem_reads_per_pixel(1) == 1.0);
  CHECK(ifmap_reuse_factor(3).per_feed == doctest::Approx(5.4));
  CHECK(ifmap_reuse_factor(3).per_pixel == 9.0);
  CHECK(ifmap_reuse_factor(1).per_feed == 1.0);
  CHECK(ifmap_reuse_factor(1).per_pixel == 1.0);
  CHECK(kmem_activity(3, 13) == doctest::Approx(1.0 / 39));
  CHECK(kmem_activity(1, 1) == 1.0);
}

TEST_CASE("tiny layer: analytic traffic equals simulated events") {
  const auto p = LayerParams::make(1, 2, 2, 6, 3);
  const auto t = synth_tensors(p, 0);
  const LayerRun r = run_layer(p, t.ifmaps, t.kernels, t.bias, ChainConfig{});
  const TrafficCounters a = analytic_traffic(plan_tiling(p, ChainConfig{}));
  const ReconcileReport rep = reconcile(a, r.summary.traffic);
  CHECK(rep.pass);
  CHECK(rep.rows.size() == 8);
  CHECK(a == r.summary.traffic);
}

TEST_CASE("reconcile names a perturbed field") {
  const auto p = LayerParams::make(1, 2, 2, 6, 3);
  TrafficCounters a = analytic_traffic(plan_tiling(p, ChainConfig{}));
  TrafficCounters b = a;
  b[MemLevel::Kmem].reads += 9;  // one extra pass
  const ReconcileReport rep = reconcile(a, b);
  CHECK_FALSE(rep.pass);
  REQUIRE(rep.mismatched.size() == 1);
  CHECK(rep.mismatched[0] == "kmem.reads");
}

TEST_CASE("kMemory activity is one fetch per pass") {
  const auto conv3 = alexnet_layers(1)[2].params;
  const TilingPlan plan = plan_tiling(conv3, ChainConfig{});
  const TrafficCounters t = analytic_traffic(plan);
  const int64_t pass = pass_cycles(plan.row_groups.front(), 3);
  CHECK(pass == 3 * 14 + 5);
  CHECK(*t[MemLevel::Kmem].activity == doctest::Approx(1.0 / pass));
}

TEST_CASE("AlexNet conv3-5: oMemory > kMemory > iMemory bytes") {
  for (int i = 2; i < 5; ++i) {
    const TrafficCounters t = analytic_traffic(plan_tiling(alexnet_layers(1)[i].params, ChainConfig{}));
    CHECK(t[MemLevel::Omem].bytes() > t[MemLevel::Kmem].bytes());
    CHECK(t[MemLevel::Kmem].bytes() > t[MemLevel::Imem].bytes());
  }
}

TEST_CASE("energy proxy") {
  const auto p = LayerParams::make(1, 4, 8, 12, 3, 1, 1, 1);
  const LayerSummary s = analytic_layer(p, ChainConfig{});
  const EnergyCostTable zero{0, 0, 0, 0, 0};
  CHECK(energy_proxy(s.traffic, s.mac_events, zero).total == 0.0);

  const EnergyCostTable base;
  EnergyCostTable twice = base;
  twice.dram *= 2; twice.imem *= 2; twice.kmem *= 2; twice.omem *= 2; twice.mac *= 2;
  const auto e1 = energy_proxy(s.traffic, s.mac_events, base);
  const auto e2 = energy_proxy(s.traffic, s.mac_events, twice);
  CHECK(e2.total == doctest::Approx(2 * e1.total));
  double sum = 0;
  for (const auto& [n, v] : e1.components) sum += e1.share(n);
  CHECK(sum == doctest::Approx(1.0));

  double last = 0.0;
  for (double sram : {1.0, 2.0, 4.0, 8.0, 16.0}) {
    EnergyCostTable c = base;
    c.imem = c.kmem = c.omem = sram;
    const auto e = energy_proxy(s.traffic, s.mac_events, c);
    const double mem = 1.0 - e.share("mac");
    CHECK(mem > last);
    last = mem;
  }
}

TEST_CASE("traffic CSV") {
  TrafficCounters t;
  t[MemLevel::Imem].reads = 5;
  t[MemLevel::Omem].writes = 2;
  std::ostringstream os;
  write_traffic_csv(os, t);
  CHECK(os.str() == "level,reads,writes,bytes,activity\n"
                    "dram,0,0,0,\nimem,5,0,10,\nkmem,0,0,0,\nomem,0,2,8,\n");
}
