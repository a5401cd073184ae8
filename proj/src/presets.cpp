#include "chainnn/presets.hpp"

#include <algorithm>

#include "chainnn/errors.hpp"

namespace chainnn {

namespace {

int shrink(int channels, int groups, bool small) {
  if (!small) return channels;
  // keep at least one channel per group and stay divisible by groups
  return std::max(groups, channels / 16 / groups * groups);
}

NamedLayer layer(std::string name, int batch, int C, int M, int H, int K, int stride, int pad,
                 int groups, bool small, bool keep_c = false) {
  return {std::move(name),
          LayerParams::make(batch, keep_c ? C : shrink(C, groups, small), shrink(M, groups, small),
                            H, K, stride, pad, groups)};
}

}  // namespace

std::vector<NamedLayer> alexnet_layers(int batch, bool small) {
  return {
      layer("conv1", batch, 3, 96, 227, 11, 4, 0, 1, small, true),
      layer("conv2", batch, 96, 256, 27, 5, 1, 2, 2, small),
      layer("conv3", batch, 256, 384, 13, 3, 1, 1, 1, small),
      layer("conv4", batch, 384, 384, 13, 3, 1, 1, 2, small),
      layer("conv5", batch, 384, 256, 13, 3, 1, 1, 2, small),
  };
}

std::vector<NamedLayer> vgg16_layers(int batch, bool small) {
  struct Row { const char* name; int C, M, H; };
  static const Row rows[] = {
      {"conv1_1", 3, 64, 224},    {"conv1_2", 64, 64, 224},   {"conv2_1", 64, 128, 112},
      {"conv2_2", 128, 128, 112}, {"conv3_1", 128, 256, 56},  {"conv3_2", 256, 256, 56},
      {"conv3_3", 256, 256, 56},  {"conv4_1", 256, 512, 28},  {"conv4_2", 512, 512, 28},
      {"conv4_3", 512, 512, 28},  {"conv5_1", 512, 512, 14},  {"conv5_2", 512, 512, 14},
      {"conv5_3", 512, 512, 14},
  };
  std::vector<NamedLayer> out;
  for (const auto& r : rows)
    out.push_back(layer(r.name, batch, r.C, r.M, r.H, 3, 1, 1, 1, small, r.C == 3));
  return out;
}

std::vector<NamedLayer> network_preset(const std::string& name, int batch, bool small) {
  if (name == "alexnet") return alexnet_layers(batch, small);
  if (name == "vgg16") return vgg16_layers(batch, small);
  throw ConfigError("unknown network preset '" + name + "' (expected alexnet or vgg16)");
}

}  // namespace chainnn
