#pragma once

#include <string>
#include <vector>

#include <CLI11.hpp>

#include "chainnn/config.hpp"

namespace chainnn::cli {

// Flags shared by simulate / verify / report. Values given on the command
// line override the config file.
struct RunFlags {
  std::string config_path;
  int pes = 0, k = 0, ifmap = 0, in_channels = 0, out_channels = 0, stride = 0, pad = -1;
  int groups = 0, layer = -1, batch = 0, stages = 0;
  uint64_t seed = 0;
  std::string preset, mapping, out_dir;
  bool small = false, single = false, json = false;
  std::vector<CLI::Option*> opts;

  void add(CLI::App* app);
  RunConfig resolve() const;

 private:
  bool given(const std::string& name) const;
};

}  // namespace chainnn::cli
