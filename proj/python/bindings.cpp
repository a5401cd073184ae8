// Python module: thin wrappers over the library entry points.
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "chainnn/config.hpp"
#include "chainnn/errors.hpp"
#include "chainnn/memory.hpp"
#include "chainnn/perf.hpp"
#include "chainnn/presets.hpp"
#include "chainnn/scan.hpp"
#include "chainnn/sim.hpp"
#include "chainnn/synth.hpp"

namespace py = pybind11;
using namespace chainnn;

namespace {

using Array = py::array_t<int32_t, py::array::c_style | py::array::forcecast>;

SampleTensor from_array(const Array& a) {
  std::vector<int> dims(a.shape(), a.shape() + a.ndim());
  SampleTensor t(dims);
  std::copy(a.data(), a.data() + a.size(), t.data.begin());
  return t;
}

Array to_array(const SampleTensor& t) {
  std::vector<py::ssize_t> shape(t.dims.begin(), t.dims.end());
  Array a(shape);
  std::copy(t.data.begin(), t.data.end(), a.mutable_data());
  return a;
}

ChainConfig chain(int num_pes, int stages) {
  ChainConfig c;
  c.num_pes = num_pes;
  c.pipeline_stages = stages;
  c.validate();
  return c;
}

LayerParams layer(const Array& ifmaps, const Array& kernels, int stride, int pad, int groups) {
  if (ifmaps.ndim() != 4 || kernels.ndim() != 4) throw ShapeError("ifmaps and kernels must be 4-d");
  return LayerParams::make(int(ifmaps.shape(0)), int(ifmaps.shape(1)), int(kernels.shape(0)),
                           int(ifmaps.shape(2)), int(kernels.shape(2)), stride, pad, groups);
}

py::dict traffic_dict(const TrafficCounters& t) {
  py::dict d;
  for (MemLevel l : kMemLevels) {
    py::dict e;
    e["reads"] = t[l].reads;
    e["writes"] = t[l].writes;
    e["bytes"] = t[l].bytes();
    if (t[l].activity) e["activity"] = *t[l].activity;
    d[to_string(l)] = e;
  }
  return d;
}

py::dict summary_dict(const LayerSummary& s) {
  py::dict d;
  d["load_cycles"] = s.cycles.load;
  d["compute_cycles"] = s.cycles.compute;
  d["drain_cycles"] = s.cycles.drain;
  d["mac_events"] = s.mac_events;
  d["dummy_mac_events"] = s.dummy_mac_events;
  d["zero_feeds"] = s.zero_feeds;
  d["passes"] = s.passes;
  d["load_phases"] = s.load_phases;
  d["first_output_latency"] = s.first_output_latency;
  d["temporal_utilization"] = s.temporal_utilization;
  d["active_pes"] = s.map.active_pes;
  d["traffic"] = traffic_dict(s.traffic);
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Cycle-level model of a 1D-chain convolution accelerator";
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<CapacityError>(m, "CapacityError", PyExc_RuntimeError);
  py::register_exception<SimulationFault>(m, "SimulationFault", PyExc_RuntimeError);
  py::register_exception<InvariantError>(m, "InvariantError", PyExc_RuntimeError);

  m.def(
      "partition_chain",
      [](int K, int num_pes) {
        const ChainMap c = partition_chain(chain(num_pes, 3), K);
        py::dict d;
        d["primitives"] = c.active_primitives;
        d["active_pes"] = c.active_pes;
        d["idle_pes"] = c.idle_pes;
        d["efficiency"] = c.efficiency;
        return d;
      },
      py::arg("K"), py::arg("num_pes") = 576);

  m.def(
      "peak_gops", [](int num_pes, double clock_hz) {
        ChainConfig c = chain(num_pes, 3);
        c.clock_hz = clock_hz;
        return peak_throughput(c) / 1e9;
      },
      py::arg("num_pes") = 576, py::arg("clock_hz") = 700e6);

  m.def(
      "validate_schedule",
      [](int K, int H, int stride, int pad, const std::string& mode) {
        const auto p = LayerParams::make(1, 1, 1, H, K, stride, pad, 1);
        const ScanMode sm = parse_scan_mode(mode);
        py::list groups;
        for (const auto& g : row_groups(p, sm)) {
          const auto s = build_schedule(g, p, sm);
          const auto r = validate_schedule(s, p);
          py::dict d;
          d["ok"] = r.ok();
          d["first_valid_cycle"] = r.first_valid_cycle;
          d["outputs"] = r.outputs;
          d["throughput"] = r.measured_throughput;
          d["length"] = s.length;
          d["summary"] = r.summary();
          groups.append(d);
        }
        return groups;
      },
      py::arg("K"), py::arg("H"), py::arg("stride") = 1, py::arg("pad") = 0, py::arg("mode") = "dual");

  m.def(
      "golden_conv",
      [](const Array& ifmaps, const Array& kernels, const Array& bias, int stride, int pad, int groups) {
        const auto p = layer(ifmaps, kernels, stride, pad, groups);
        return to_array(golden_convolution(from_array(ifmaps), from_array(kernels), from_array(bias), p,
                                           Arithmetic::Fixed, FixedFormat{}));
      },
      py::arg("ifmaps"), py::arg("kernels"), py::arg("bias"), py::arg("stride") = 1, py::arg("pad") = 0,
      py::arg("groups") = 1);

  m.def(
      "simulate",
      [](const Array& ifmaps, const Array& kernels, const Array& bias, int stride, int pad, int groups,
         int num_pes, int stages, const std::string& mode, const std::string& mapping) {
        const auto p = layer(ifmaps, kernels, stride, pad, groups);
        SimOptions opt;
        opt.mode = parse_scan_mode(mode);
        opt.mapping = parse_stride_mapping(mapping);
        LayerRun r;
        {
          py::gil_scoped_release release;
          r = run_layer(p, from_array(ifmaps), from_array(kernels), from_array(bias), chain(num_pes, stages),
                        opt);
        }
        return py::make_tuple(to_array(r.ofmaps), summary_dict(r.summary));
      },
      py::arg("ifmaps"), py::arg("kernels"), py::arg("bias"), py::arg("stride") = 1, py::arg("pad") = 0,
      py::arg("groups") = 1, py::arg("num_pes") = 576, py::arg("stages") = 3, py::arg("mode") = "dual",
      py::arg("mapping") = "phase-split");

  m.def(
      "synth_layer",
      [](int N, int C, int M, int H, int K, int stride, int pad, int groups, uint64_t seed) {
        const auto t = synth_tensors(LayerParams::make(N, C, M, H, K, stride, pad, groups), seed);
        return py::make_tuple(to_array(t.ifmaps), to_array(t.kernels), to_array(t.bias));
      },
      py::arg("N"), py::arg("C"), py::arg("M"), py::arg("H"), py::arg("K"), py::arg("stride") = 1,
      py::arg("pad") = 0, py::arg("groups") = 1, py::arg("seed") = 0);

  m.def(
      "report_json",
      [](const std::string& network, int batch, int num_pes, int64_t overhead_cycles) {
        const ChainConfig c = chain(num_pes, 3);
        OverheadModel o;
        o.per_layer_cycles = overhead_cycles;
        std::vector<LayerSummary> layers;
        std::vector<std::string> names;
        for (const auto& l : network_preset(network, batch)) {
          layers.push_back(analytic_layer(l.params, c));
          names.push_back(l.name);
        }
        return report_json(network_report(layers, c, o, names, network == "alexnet"));
      },
      py::arg("network") = "alexnet", py::arg("batch") = 128, py::arg("num_pes") = 576,
      py::arg("overhead_cycles") = 0);
}
