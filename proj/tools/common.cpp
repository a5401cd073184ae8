#include "common.hpp"

#include "chainnn/errors.hpp"

namespace chainnn::cli {

void RunFlags::add(CLI::App* app) {
  opts = {
      app->add_option("-c,--config", config_path, "run config file (key: value)")->check(CLI::ExistingFile),
      app->add_option("--pes", pes, "PEs in the chain"),
      app->add_option("--k", k, "kernel size of the custom layer"),
      app->add_option("--ifmap", ifmap, "ifmap size of the custom layer"),
      app->add_option("--in-channels", in_channels, "input channels of the custom layer"),
      app->add_option("--out-channels", out_channels, "output channels of the custom layer"),
      app->add_option("--stride", stride, "stride of the custom layer"),
      app->add_option("--pad", pad, "zero padding of the custom layer"),
      app->add_option("--groups", groups, "conv groups of the custom layer"),
      app->add_option("--preset", preset, "network preset: alexnet | vgg16"),
      app->add_option("--layer", layer, "1-based preset layer, 0 = all"),
      app->add_flag("--small", small, "divide preset channel counts by 16"),
      app->add_option("--batch", batch, "batch size"),
      app->add_option("--seed", seed, "seed for synthetic tensors"),
      app->add_option("--stages", stages, "pipeline stages"),
      app->add_flag("--single-channel", single, "scan with OddIF only"),
      app->add_option("--mapping", mapping, "stride mapping: phase-split | direct"),
      app->add_option("--out", out_dir, "directory for artifacts"),
      app->add_flag("--json", json, "machine-readable output"),
  };
}

bool RunFlags::given(const std::string& name) const {
  for (auto* o : opts)
    if (o->check_lname(name)) return o->count() > 0;
  return false;
}

RunConfig RunFlags::resolve() const {
  RunConfig c = config_path.empty() ? RunConfig{} : load_config(config_path);
  if (given("pes")) c.chain.num_pes = pes;
  if (given("k")) c.kernel = k;
  if (given("ifmap")) c.ifmap = ifmap;
  if (given("in-channels")) c.in_channels = in_channels;
  if (given("out-channels")) c.out_channels = out_channels;
  if (given("stride")) c.stride = stride;
  if (given("pad")) c.pad = pad;
  if (given("groups")) c.groups = groups;
  if (given("preset")) c.network = preset;
  if (given("layer")) c.layer = layer;
  if (small) c.small = true;
  if (given("batch")) c.batch = batch;
  if (given("seed")) c.seed = seed;
  if (given("stages")) c.chain.pipeline_stages = stages;
  if (single) c.mode = ScanMode::Single;
  if (given("mapping")) c.mapping = parse_stride_mapping(mapping);
  if (given("out")) c.output_dir = out_dir;
  if (json) c.format = "json";
  // re-run the config checks on the merged result; the line number of the
  // re-serialized text means nothing to the user, so drop it
  try {
    return parse_config(serialize_config(c));
  } catch (const ConfigError& e) {
    std::string msg = e.what();
    if (msg.rfind("line ", 0) == 0) msg = msg.substr(msg.find(": ") + 2);
    throw ConfigError(msg);
  }
}

}  // namespace chainnn::cli
