#pragma once

#include <cstdint>
#include <initializer_list>
#include <string>
#include <vector>

#include "chainnn/fixed_point.hpp"

namespace chainnn {

// Shape of one convolutional layer. Maps and kernels are square.
struct LayerParams {
  int N = 1;       // batch
  int C = 1;       // input channels
  int M = 1;       // output channels
  int H = 1;       // ifmap size
  int E = 1;       // ofmap size
  int K = 1;       // kernel size
  int stride = 1;
  int pad = 0;
  int groups = 1;

  int in_per_group() const { return C / groups; }
  int out_per_group() const { return M / groups; }
  int padded_size() const { return H + 2 * pad; }

  // Throws ShapeError naming the violated relation.
  void validate() const;

  // Builds params with E derived from H, K, stride and pad.
  static LayerParams make(int N, int C, int M, int H, int K, int stride = 1, int pad = 0,
                          int groups = 1);

  bool operator==(const LayerParams&) const = default;
};

int output_size(int H, int K, int stride, int pad);

// N*M*E*E*(C/groups)*K*K
int64_t mac_count(const LayerParams& p);

// Dense row-major tensor; index order follows [n][c][x][y] style subscripts.
template <class T>
struct Tensor {
  std::vector<int> dims;
  std::vector<T> data;

  Tensor() = default;
  explicit Tensor(std::vector<int> d, T fill = T{}) : dims(std::move(d)) {
    data.assign(count(dims), fill);
  }

  static size_t count(const std::vector<int>& d) {
    size_t n = 1;
    for (int v : d) n *= static_cast<size_t>(v);
    return n;
  }

  size_t size() const { return data.size(); }
  int rank() const { return static_cast<int>(dims.size()); }

  size_t offset(std::initializer_list<int> idx) const {
    size_t off = 0;
    auto d = dims.begin();
    for (int i : idx) off = off * static_cast<size_t>(*d++) + static_cast<size_t>(i);
    return off;
  }
  T& at(std::initializer_list<int> idx) { return data[offset(idx)]; }
  const T& at(std::initializer_list<int> idx) const { return data[offset(idx)]; }

  bool operator==(const Tensor&) const = default;
};

using SampleTensor = Tensor<int32_t>;
using RealTensor = Tensor<double>;

enum class Arithmetic { Real, Fixed };

// Shapes expected by golden_convolution:
//   ifmaps [N][C][H][H], kernels [M][C/groups][K][K], bias [M], ofmaps [N][M][E][E].
void check_conv_shapes(const std::vector<int>& ifmaps, const std::vector<int>& kernels,
                       const std::vector<int>& bias, const LayerParams& p);

// Direct convolution with zero padding. Summation order is c, i, j (outer to
// inner) starting from the bias, so fixed mode is bit-reproducible.
SampleTensor golden_convolution(const SampleTensor& ifmaps, const SampleTensor& kernels,
                                const SampleTensor& bias, const LayerParams& p,
                                Arithmetic arithmetic, const FixedFormat& fmt,
                                int64_t* overflow_events = nullptr);

RealTensor golden_convolution_real(const RealTensor& ifmaps, const RealTensor& kernels,
                                   const RealTensor& bias, const LayerParams& p);

RealTensor to_real(const SampleTensor& t, const FixedFormat& fmt);

}  // namespace chainnn
