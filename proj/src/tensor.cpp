#include "chainnn/tensor.hpp"

#include <string>

#include "chainnn/errors.hpp"

namespace chainnn {

int output_size(int H, int K, int stride, int pad) {
  if (stride <= 0) return 0;
  const int span = H + 2 * pad - K;
  if (span < 0) return 0;
  return span / stride + 1;
}

LayerParams LayerParams::make(int N, int C, int M, int H, int K, int stride, int pad, int groups) {
  LayerParams p{N, C, M, H, output_size(H, K, stride, pad), K, stride, pad, groups};
  p.validate();
  return p;
}

void LayerParams::validate() const {
  auto positive = [](int v, const char* name) {
    if (v <= 0) throw ShapeError(std::string(name) + " must be positive, got " + std::to_string(v));
  };
  positive(N, "N");
  positive(C, "C");
  positive(M, "M");
  positive(H, "H");
  positive(E, "E");
  positive(K, "K");
  positive(stride, "stride");
  positive(groups, "groups");
  if (pad < 0) throw ShapeError("pad must be non-negative, got " + std::to_string(pad));
  if (C % groups != 0) throw ShapeError("C=" + std::to_string(C) + " not divisible by groups");
  if (M % groups != 0) throw ShapeError("M=" + std::to_string(M) + " not divisible by groups");
  if (K > H + 2 * pad) throw ShapeError("K exceeds padded ifmap size");
  if (E != output_size(H, K, stride, pad))
    throw ShapeError("E=" + std::to_string(E) + " inconsistent with H, K, stride, pad (expected " +
                     std::to_string(output_size(H, K, stride, pad)) + ")");
}

int64_t mac_count(const LayerParams& p) {
  return int64_t{p.N} * p.M * p.E * p.E * p.in_per_group() * p.K * p.K;
}

void check_conv_shapes(const std::vector<int>& ifmaps, const std::vector<int>& kernels,
                       const std::vector<int>& bias, const LayerParams& p) {
  auto expect = [](const std::vector<int>& got, const std::vector<int>& want, const char* tensor,
                   const char* const* axes) {
    if (got.size() != want.size())
      throw ShapeError(std::string(tensor) + ": rank " + std::to_string(got.size()) +
                       ", expected " + std::to_string(want.size()));
    for (size_t a = 0; a < want.size(); ++a)
      if (got[a] != want[a])
        throw ShapeError(std::string(tensor) + ": axis " + axes[a] + " is " +
                         std::to_string(got[a]) + ", expected " + std::to_string(want[a]));
  };
  static const char* kIf[] = {"n", "c", "x", "y"};
  static const char* kKer[] = {"m", "c", "i", "j"};
  static const char* kBias[] = {"m"};
  expect(ifmaps, {p.N, p.C, p.H, p.H}, "ifmaps", kIf);
  expect(kernels, {p.M, p.in_per_group(), p.K, p.K}, "kernels", kKer);
  expect(bias, {p.M}, "bias", kBias);
}

SampleTensor golden_convolution(const SampleTensor& ifmaps, const SampleTensor& kernels,
                                const SampleTensor& bias, const LayerParams& p,
                                Arithmetic arithmetic, const FixedFormat& fmt,
                                int64_t* overflow_events) {
  p.validate();
  check_conv_shapes(ifmaps.dims, kernels.dims, bias.dims, p);
  if (arithmetic == Arithmetic::Real) {
    const RealTensor out = golden_convolution_real(to_real(ifmaps, fmt), to_real(kernels, fmt),
                                                   to_real(bias, fmt), p);
    SampleTensor q(out.dims);
    for (size_t k = 0; k < out.size(); ++k) q.data[k] = quantize_one(out.data[k], fmt);
    return q;
  }

  const int cg = p.in_per_group();
  const int mg = p.out_per_group();
  SampleTensor out({p.N, p.M, p.E, p.E});
  int64_t overflows = 0;
  for (int n = 0; n < p.N; ++n)
    for (int m = 0; m < p.M; ++m) {
      const int c0 = (m / mg) * cg;
      for (int x = 0; x < p.E; ++x)
        for (int y = 0; y < p.E; ++y) {
          int64_t acc = bias_to_acc(bias.data[m], fmt);
          for (int c = 0; c < cg; ++c)
            for (int i = 0; i < p.K; ++i) {
              const int row = x * p.stride + i - p.pad;
              for (int j = 0; j < p.K; ++j) {
                const int col = y * p.stride + j - p.pad;
                int32_t px = 0;
                if (row >= 0 && row < p.H && col >= 0 && col < p.H)
                  px = ifmaps.at({n, c0 + c, row, col});
                const MacResult r = fixed_mac(px, kernels.at({m, c, i, j}), acc, fmt);
                acc = r.acc;
                overflows += r.overflowed;
              }
            }
          bool clamped = false;
          out.at({n, m, x, y}) = requantize(acc, fmt, &clamped);
          overflows += clamped;
        }
    }
  if (overflow_events) *overflow_events = overflows;
  return out;
}

RealTensor golden_convolution_real(const RealTensor& ifmaps, const RealTensor& kernels,
                                   const RealTensor& bias, const LayerParams& p) {
  p.validate();
  check_conv_shapes(ifmaps.dims, kernels.dims, bias.dims, p);
  const int cg = p.in_per_group();
  const int mg = p.out_per_group();
  RealTensor out({p.N, p.M, p.E, p.E});
  for (int n = 0; n < p.N; ++n)
    for (int m = 0; m < p.M; ++m) {
      const int c0 = (m / mg) * cg;
      for (int x = 0; x < p.E; ++x)
        for (int y = 0; y < p.E; ++y) {
          double acc = bias.data[m];
          for (int c = 0; c < cg; ++c)
            for (int i = 0; i < p.K; ++i) {
              const int row = x * p.stride + i - p.pad;
              if (row < 0 || row >= p.H) continue;
              for (int j = 0; j < p.K; ++j) {
                const int col = y * p.stride + j - p.pad;
                if (col < 0 || col >= p.H) continue;
                acc += ifmaps.at({n, c0 + c, row, col}) * kernels.at({m, c, i, j});
              }
            }
          out.at({n, m, x, y}) = acc;
        }
    }
  return out;
}

RealTensor to_real(const SampleTensor& t, const FixedFormat& fmt) {
  RealTensor r(t.dims);
  for (size_t k = 0; k < t.size(); ++k) r.data[k] = dequantize(t.data[k], fmt);
  return r;
}

}  // namespace chainnn
