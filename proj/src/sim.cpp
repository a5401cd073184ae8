#include "chainnn/sim.hpp"

#include <map>
#include <ostream>
#include <set>
#include <tuple>

#include "chainnn/errors.hpp"

namespace chainnn {

PhaseCycles& PhaseCycles::operator+=(const PhaseCycles& o) {
  load += o.load;
  compute += o.compute;
  drain += o.drain;
  return *this;
}

ChainState make_chain(const ChainConfig& cfg, int K, const FixedFormat& fmt) {
  cfg.validate();
  fmt.validate();
  const ChainMap map = partition_chain(cfg, K);
  ChainState ch;
  ch.cfg = cfg;
  ch.fmt = fmt;
  ch.K = K;
  ch.idle_pes = map.idle_pes;
  ch.primitives.resize(map.active_primitives);
  for (auto& prim : ch.primitives) {
    prim.pes.resize(map.pes_per_primitive);
    prim.pipeline.resize(cfg.pipeline_stages - 1);
  }
  return ch;
}

int64_t load_kernels(ChainState& chain, const KernelLayout& layout) {
  if (layout.K != chain.K)
    throw ShapeError("kernel layout K=" + std::to_string(layout.K) + " but chain K=" +
                     std::to_string(chain.K));
  if (layout.primitives > static_cast<int>(chain.primitives.size()))
    throw ShapeError("kernel layout needs " + std::to_string(layout.primitives) +
                     " primitives, chain has " + std::to_string(chain.primitives.size()));
  chain.phase = ChainPhase::KernelLoad;
  for (auto& prim : chain.primitives)
    for (auto& pe : prim.pes) {
      pe.kmemory.clear();
      pe.slot_of_context.assign(layout.contexts, -1);
      pe.gated = true;
    }
  // One weight enters the chain per cycle and is shifted to its PE.
  for (const auto& slot : layout.load_order) {
    const KernelEntry& e = layout.pe_tables[slot.primitive][slot.pe][slot.entry];
    PEState& pe = chain.primitives[slot.primitive].pes[slot.pe];
    if (static_cast<int>(pe.kmemory.size()) >= chain.cfg.kmem_capacity)
      throw CapacityError("kMemory overflow at primitive " + std::to_string(slot.primitive) +
                          " PE " + std::to_string(slot.pe));
    pe.slot_of_context[e.context] = static_cast<int32_t>(pe.kmemory.size());
    pe.kmemory.push_back(e);
    ++chain.counters.kmem_writes;
    ++chain.cycle;
  }
  return layout.weights();
}

void set_context(ChainState& chain, int context, int enabled_primitives) {
  for (int k = 0; k < static_cast<int>(chain.primitives.size()); ++k) {
    auto& prim = chain.primitives[k];
    prim.enabled = k < enabled_primitives;
    for (auto& pe : prim.pes) {
      pe.gated = true;
      pe.weight = 0;
      if (!prim.enabled) continue;
      if (context >= static_cast<int>(pe.slot_of_context.size()))
        throw SimulationFault("context " + std::to_string(context) + " was never loaded");
      const int32_t slot = pe.slot_of_context[context];
      if (slot < 0) continue;
      pe.gated = false;
      pe.weight = pe.kmemory[slot].weight;
      ++chain.counters.kmem_reads;
    }
  }
  chain.phase = ChainPhase::Compute;
}

std::vector<PrimitiveOutput> step(ChainState& chain, const CycleInput& in) {
  ++chain.cycle;
  std::vector<PrimitiveOutput> out;
  bool any_select = false;
  if (in.mux)
    for (int p = 0; p < chain.K * chain.K; ++p) any_select |= in.mux[p] != MuxSel::Hold;
  if (any_select && !in.tag)
    throw SimulationFault("cycle " + std::to_string(chain.cycle) + ": selections without a window");

  for (int k = 0; k < static_cast<int>(chain.primitives.size()); ++k) {
    auto& prim = chain.primitives[k];
    auto& pes = prim.pes;
    for (size_t p = pes.size() - 1; p > 0; --p) {
      pes[p].odd = pes[p - 1].odd;
      pes[p].even = pes[p - 1].even;
    }
    pes[0].odd = in.odd;
    pes[0].even = in.even;

    PipelineSlot result;
    if (prim.enabled && any_select) {
      int64_t psum = 0;
      for (size_t p = 0; p < pes.size(); ++p) {
        const MuxSel sel = in.mux[p];
        if (sel == MuxSel::Hold) continue;
        const ChannelReg& reg = sel == MuxSel::Odd ? pes[p].odd : pes[p].even;
        if (!reg.valid)
          throw SimulationFault("cycle " + std::to_string(chain.cycle) + " primitive " +
                                std::to_string(k) + " PE " + std::to_string(p) + ": " +
                                (sel == MuxSel::Odd ? "OddIF" : "EvenIF") +
                                " register holds no pixel");
        if (pes[p].gated) continue;
        const MacResult r = fixed_mac(reg.value, pes[p].weight, psum, chain.fmt);
        psum = r.acc;
        chain.counters.overflow_events += r.overflowed;
        if (in.tag->dummy)
          ++chain.counters.dummy_mac_events;
        else
          ++chain.counters.mac_events;
      }
      result = {true, psum, *in.tag};
      result.tag.compute_cycle = chain.cycle;
    }

    PipelineSlot leaving = result;
    if (!prim.pipeline.empty()) {
      leaving = prim.pipeline[prim.head];
      prim.pipeline[prim.head] = result;
      prim.head = (prim.head + 1) % prim.pipeline.size();
    }
    if (leaving.valid) out.push_back({k, leaving.value, leaving.tag});
  }
  return out;
}

namespace {

void trace_cycle(std::ostream& os, const ChainState& ch, const CycleInput& in,
                 const std::vector<PrimitiveOutput>& outs) {
  static const char* phase_names[] = {"idle", "load", "compute", "drain"};
  auto reg = [](const ChannelReg& r) { return r.valid ? std::to_string(r.value) : std::string("-"); };
  for (int k = 0; k < static_cast<int>(ch.primitives.size()); ++k) {
    if (!ch.primitives[k].enabled) continue;
    os << ch.cycle << ' ' << phase_names[static_cast<int>(ch.phase)] << " p" << k << ' '
       << reg(in.odd) << ' ' << reg(in.even) << ' ';
    bool any = false;
    for (const auto& o : outs)
      if (o.primitive == k) {
        os << "n" << o.tag.n << "t" << o.tag.tile << "c" << o.tag.c << "(" << o.tag.out_row << ","
           << o.tag.out_col << ")" << (o.tag.dummy ? "d" : "") << "=" << o.value;
        any = true;
      }
    if (!any) os << '-';
    os << '\n';
  }
}

}  // namespace

LayerRun run_layer(const LayerParams& p, const SampleTensor& ifmaps, const SampleTensor& kernels,
                   const SampleTensor& bias, const ChainConfig& cfg, const SimOptions& opt) {
  p.validate();
  check_conv_shapes(ifmaps.dims, kernels.dims, bias.dims, p);
  const FixedFormat& fmt = opt.fmt;
  const TilingPlan plan = plan_tiling(p, cfg, opt.mode, opt.mapping);
  const ExecGeometry& geom = plan.geom;
  const LayerParams& pl = geom.plane;
  const int K = pl.K;
  const int cg = p.in_per_group();

  std::vector<StreamSchedule> schedules;
  schedules.reserve(plan.row_groups.size());
  for (const auto& g : plan.row_groups) {
    StreamSchedule s = build_schedule(g, pl, opt.mode);
    const ValidationReport rep = validate_schedule(s, pl);
    if (!rep.ok())
      throw InvariantError("schedule for row group " + std::to_string(g.index) + " is invalid: " +
                           rep.summary());
    schedules.push_back(std::move(s));
  }

  ChainState chain = make_chain(cfg, K, fmt);
  LayerRun run;
  LayerSummary& sum = run.summary;
  sum.params = p;
  sum.map = plan.map;
  sum.mapping = geom.mapping;
  sum.mode = opt.mode;
  sum.load_phases = static_cast<int64_t>(plan.phases.size());
  TrafficCounters traffic(fmt);

  const size_t outs = static_cast<size_t>(p.N) * p.M * p.E * p.E;
  std::vector<int64_t> omem(outs, 0);
  auto out_index = [&](int n, int m, int x, int y) {
    return ((static_cast<size_t>(n) * p.M + m) * p.E + x) * p.E + y;
  };

  std::set<std::tuple<int, int, int>> resident;  // (phase, n, conv group) already in iMemory
  int64_t first_compute_cycle = -1;
  int64_t first_output_cycle = -1;

  auto consume = [&](const std::vector<PrimitiveOutput>& emitted) {
    for (const auto& o : emitted) {
      if (first_output_cycle < 0) first_output_cycle = chain.cycle;
      if (o.tag.dummy) continue;
      const OfmapTile& tile = plan.tiles[o.tag.tile];
      const int m = tile.m_begin + o.primitive;
      const size_t idx = out_index(o.tag.n, m, o.tag.out_row, o.tag.out_col);
      MacResult r;
      if (o.tag.c == 0) {
        r = fixed_add(bias_to_acc(bias.data[m], fmt), o.value, fmt);
      } else {
        ++traffic[MemLevel::Omem].reads;
        r = fixed_add(omem[idx], o.value, fmt);
      }
      run.overflow_events += r.overflowed;
      omem[idx] = r.acc;
      ++traffic[MemLevel::Omem].writes;
    }
  };

  for (size_t phi = 0; phi < plan.phases.size(); ++phi) {
    const LoadPhase& ph = plan.phases[phi];
    const KernelLayout layout = layout_kernels(plan, static_cast<int>(phi), kernels);
    sum.cycles.load += load_kernels(chain, layout);
    traffic[MemLevel::Dram].reads += layout.weights();

    for (int n = 0; n < p.N; ++n)
      for (size_t tpos = 0; tpos < ph.tiles.size(); ++tpos) {
        const int ti = ph.tiles[tpos];
        const OfmapTile& tile = plan.tiles[ti];
        const int conv_group = tile.conv_group;
        if (plan.ifmap_resident && resident.emplace(int(phi), n, conv_group).second) {
          const int64_t px = int64_t{cg} * p.H * p.H;
          traffic[MemLevel::Dram].reads += px;
          traffic[MemLevel::Imem].writes += px;
        }
        for (size_t gi = 0; gi < plan.row_groups.size(); ++gi) {
          const StreamSchedule& s = schedules[gi];
          for (int c = ph.c_begin; c < ph.c_begin + ph.c_count; ++c) {
            const int context = static_cast<int>(tpos) * ph.c_count + (c - ph.c_begin);
            set_context(chain, context, tile.m_count);
            const auto [kc, phase_idx] = geom.split_channel(c);
            const int ifmap_c = conv_group * cg + kc;
            if (first_compute_cycle < 0) first_compute_cycle = chain.cycle + 1;

            auto feed = [&](int32_t at) {
              ChannelReg r;
              if (at < 0) return r;
              r.valid = true;
              const auto src = geom.source_pixel(s.feeds[at].pixel, phase_idx);
              if (!src) {
                ++sum.zero_feeds;
                return r;
              }
              r.value = ifmaps.at({n, ifmap_c, src->first, src->second});
              ++traffic[MemLevel::Imem].reads;
              if (!plan.ifmap_resident) {
                ++traffic[MemLevel::Dram].reads;
                ++traffic[MemLevel::Imem].writes;
              }
              return r;
            };

            for (int64_t t = 1; t <= s.length; ++t) {
              CycleInput in;
              in.odd = feed(s.odd_at[t]);
              in.even = feed(s.even_at[t]);
              in.mux = &s.mux[static_cast<size_t>(t - 1) * K * K];
              if (s.output_at[t] >= 0) {
                const OutputEvent& ev = s.outputs[s.output_at[t]];
                in.tag = OutputTag{n, ti, c, ev.out_row, ev.out_col, ev.dummy, 0};
              }
              auto emitted = step(chain, in);
              ++sum.cycles.compute;
              if (opt.trace) trace_cycle(*opt.trace, chain, in, emitted);
              consume(emitted);
            }
            ++sum.passes;
          }
        }
      }

    // Flush the partial-sum pipeline before the next load phase.
    chain.phase = ChainPhase::Drain;
    for (int d = 0; d < cfg.pipeline_stages - 1; ++d) {
      CycleInput in;
      auto emitted = step(chain, in);
      ++sum.cycles.drain;
      if (opt.trace) trace_cycle(*opt.trace, chain, in, emitted);
      consume(emitted);
    }
  }
  chain.phase = ChainPhase::Idle;

  run.ofmaps = SampleTensor({p.N, p.M, p.E, p.E});
  for (size_t i = 0; i < outs; ++i) {
    bool clamped = false;
    run.ofmaps.data[i] = requantize(omem[i], fmt, &clamped);
    run.saturated_outputs += clamped;
  }
  traffic[MemLevel::Omem].reads += static_cast<int64_t>(outs);
  traffic[MemLevel::Dram].writes += static_cast<int64_t>(outs);
  traffic[MemLevel::Kmem].reads = chain.counters.kmem_reads;
  traffic[MemLevel::Kmem].writes = chain.counters.kmem_writes;
  set_activity(traffic, sum.cycles.compute, plan.map.active_pes);

  sum.traffic = traffic;
  sum.mac_events = chain.counters.mac_events;
  sum.dummy_mac_events = chain.counters.dummy_mac_events;
  run.overflow_events += chain.counters.overflow_events;
  sum.first_output_latency =
      first_output_cycle < 0 ? 0 : first_output_cycle - first_compute_cycle + 1;
  sum.temporal_utilization =
      sum.cycles.compute == 0
          ? 0.0
          : double(sum.mac_events) / (double(sum.cycles.compute) * plan.map.active_pes);
  return run;
}

NetworkRun run_network(const std::vector<NetworkLayer>& layers, const ChainConfig& cfg,
                       const SimOptions& opt) {
  NetworkRun net;
  for (size_t i = 0; i < layers.size(); ++i) {
    const auto& L = layers[i];
    try {
      net.layers.push_back(run_layer(L.params, L.ifmaps, L.kernels, L.bias, cfg, opt));
    } catch (const ShapeError& e) {
      throw ShapeError("layer " + std::to_string(i) + ": " + e.what());
    } catch (const ConfigError& e) {
      throw ConfigError("layer " + std::to_string(i) + ": " + e.what());
    } catch (const CapacityError& e) {
      throw CapacityError("layer " + std::to_string(i) + ": " + e.what());
    } catch (const SimulationFault& e) {
      throw SimulationFault("layer " + std::to_string(i) + ": " + e.what());
    } catch (const InvariantError& e) {
      throw InvariantError("layer " + std::to_string(i) + ": " + e.what());
    }
    const auto& s = net.layers.back().summary;
    net.cycles += s.cycles;
    net.traffic += s.traffic;
    net.mac_events += s.mac_events;
  }
  return net;
}

}  // namespace chainnn
