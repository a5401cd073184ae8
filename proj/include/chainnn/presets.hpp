#pragma once

#include <string>
#include <vector>

#include "chainnn/tensor.hpp"

namespace chainnn {

struct NamedLayer {
  std::string name;
  LayerParams params;
};

// The five AlexNet conv layers (227x227 input, two-way grouped conv2/4/5).
// small=true divides channel counts by 16 so the layers simulate in seconds.
std::vector<NamedLayer> alexnet_layers(int batch = 1, bool small = false);

// The thirteen VGG-16 conv layers (224x224 input, 3x3, pad 1).
std::vector<NamedLayer> vgg16_layers(int batch = 1, bool small = false);

// "alexnet" | "vgg16"; throws ConfigError for anything else.
std::vector<NamedLayer> network_preset(const std::string& name, int batch = 1, bool small = false);

}  // namespace chainnn
