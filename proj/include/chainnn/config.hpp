#pragma once

#include <cstdint>
#include <string>

#include "chainnn/memory.hpp"
#include "chainnn/perf.hpp"

namespace chainnn {

// Flat "key: value" run configuration. Grammar, one entry per line:
//   line    := blank | comment | key ":" value
//   comment := "#" anything
// Keys are lower_snake_case; unknown keys are rejected.
struct RunConfig {
  ChainConfig chain;

  // "custom" uses the layer_* keys below, otherwise a preset name.
  std::string network = "custom";
  int layer = 0;  // 1-based layer of the preset, 0 = all
  bool small = false;

  int kernel = 3;
  int in_channels = 1;
  int out_channels = 1;
  int ifmap = 64;
  int stride = 1;
  int pad = 0;
  int groups = 1;

  int batch = 1;
  ScanMode mode = ScanMode::Dual;
  StrideMapping mapping = StrideMapping::PhaseSplit;
  FixedFormat fmt;
  OverheadModel overhead;

  std::string energy_table;  // path; empty = built-in costs
  uint64_t seed = 0;
  std::string output_dir;    // empty = no artifacts
  std::string format = "text";  // text | json

  // The custom layer (or the preset layers) this config selects.
  std::vector<NamedLayer> layers() const;

  bool operator==(const RunConfig&) const = default;
};

// Throws ConfigError with "line N: key: reason" on malformed input, unknown
// keys and out-of-range values.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

// Every key, in a fixed order; parse_config(serialize_config(c)) == c.
std::string serialize_config(const RunConfig& c);

// Energy cost files use the same grammar with keys dram, imem, kmem, omem, mac.
EnergyCostTable parse_energy_table(const std::string& text);
EnergyCostTable load_energy_table(const std::string& path);

ScanMode parse_scan_mode(const std::string& s);
StrideMapping parse_stride_mapping(const std::string& s);

}  // namespace chainnn
