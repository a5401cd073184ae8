#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "chainnn/errors.hpp"
#include "chainnn/presets.hpp"
#include "chainnn/synth.hpp"
#include "chainnn/tensor.hpp"
#include "chainnn/tensor_io.hpp"

using namespace chainnn;

namespace {

// Independent direct convolution: exact integer sums over (j, i, c) with
// explicit bounds checks instead of a padded copy, then round half to even.
SampleTensor oracle_conv(const SampleTensor& x, const SampleTensor& w, const SampleTensor& b,
                         const LayerParams& p) {
  SampleTensor y({p.N, p.M, p.E, p.E});
  const int cg = p.C / p.groups, mg = p.M / p.groups;
  for (int n = 0; n < p.N; ++n)
    for (int m = 0; m < p.M; ++m)
      for (int r = 0; r < p.E; ++r)
        for (int s = 0; s < p.E; ++s) {
          __int128 acc = static_cast<__int128>(b.data[m]) * 256;
          for (int j = 0; j < p.K; ++j)
            for (int i = 0; i < p.K; ++i)
              for (int c = 0; c < cg; ++c) {
                const int row = r * p.stride + i - p.pad, col = s * p.stride + j - p.pad;
                if (row < 0 || col < 0 || row >= p.H || col >= p.H) continue;
                acc += static_cast<__int128>(x.at({n, (m / mg) * cg + c, row, col})) *
                       w.at({m, c, i, j});
              }
          __int128 q = acc >> 8;  // floor
          const __int128 rem = acc - q * 256;
          if (rem > 128 || (rem == 128 && (q & 1))) ++q;
          q = q > 32767 ? 32767 : q < -32768 ? -32768 : q;
          y.at({n, m, r, s}) = static_cast<int32_t>(q);
        }
  return y;
}

}  // namespace

TEST_CASE("output size and MAC count") {
  CHECK(output_size(227, 11, 4, 0) == 55);
  CHECK(output_size(27, 5, 1, 2) == 27);
  CHECK(output_size(13, 3, 1, 1) == 13);
  const auto alex = alexnet_layers(1);
  int64_t total = 0;
  for (const auto& l : alex) total += mac_count(l.params);
  // 96*55^2*3*121 + 256*27^2*48*25 + 384*13^2*256*9 + 384*13^2*192*9 + 256*13^2*192*9
  const int64_t by_hand = 96LL * 3025 * 363 + 256LL * 729 * 1200 + 384LL * 169 * 2304 +
                          384LL * 169 * 1728 + 256LL * 169 * 1728;
  CHECK(total == by_hand);
  CHECK(std::fabs(double(total) - 666e6) / 666e6 < 0.01);
}

TEST_CASE("layer validation names the bad axis") {
  CHECK_THROWS_AS(LayerParams::make(1, 3, 4, 8, 3, 1, 0, 2), ShapeError);  // C % groups
  CHECK_THROWS_AS(LayerParams::make(1, 4, 4, 2, 5, 1, 0, 1), ShapeError);  // K > H + 2 pad
  CHECK_THROWS_AS(LayerParams::make(1, 4, 4, 8, 3, 0, 0, 1), ShapeError);
  const auto p = LayerParams::make(1, 2, 2, 6, 3);
  try {
    check_conv_shapes({1, 3, 6, 6}, {2, 2, 3, 3}, {2}, p);
    FAIL("expected ShapeError");
  } catch (const ShapeError& e) {
    CHECK(std::string(e.what()).find("axis c") != std::string::npos);
  }
}

TEST_CASE("golden fixed convolution matches the integer oracle") {
  std::mt19937 rng(5);
  for (int it = 0; it < 150; ++it) {
    const int K = 1 + rng() % 5, stride = 1 + rng() % 3, pad = rng() % 3, g = 1 + rng() % 2;
    const int H = std::max(K, 1 + int(rng() % 12));
    const auto p = LayerParams::make(1 + rng() % 2, g * (1 + rng() % 3), g * (1 + rng() % 3), H, K,
                                     stride, pad, g);
    const auto t = synth_tensors(p, it);
    const auto got = golden_convolution(t.ifmaps, t.kernels, t.bias, p, Arithmetic::Fixed, FixedFormat{});
    REQUIRE(got.data == oracle_conv(t.ifmaps, t.kernels, t.bias, p).data);
  }
}

TEST_CASE("real-mode golden equals the real triple loop on representable data") {
  const auto p = LayerParams::make(1, 2, 3, 7, 3, 2, 1, 1);
  const auto t = synth_tensors(p, 9);
  const RealTensor xr = to_real(t.ifmaps, FixedFormat{});
  const RealTensor wr = to_real(t.kernels, FixedFormat{});
  const RealTensor br = to_real(t.bias, FixedFormat{});
  const RealTensor y = golden_convolution_real(xr, wr, br, p);
  const SampleTensor q = golden_convolution(t.ifmaps, t.kernels, t.bias, p, Arithmetic::Real, FixedFormat{});
  const SampleTensor f = golden_convolution(t.ifmaps, t.kernels, t.bias, p, Arithmetic::Fixed, FixedFormat{});
  // every product is a multiple of 2^-16, so the double sum is exact and both
  // modes round the same value
  CHECK(q.data == f.data);
  for (size_t i = 0; i < y.data.size(); ++i)
    CHECK(std::fabs(y.data[i] * 256.0 - f.data[i]) <= 0.5);
}

TEST_CASE("tensor files round-trip") {
  SampleTensor t({2, 3, 4, 5});
  for (size_t i = 0; i < t.data.size(); ++i) t.data[i] = int32_t(i * 37 % 65536) - 32768;
  std::stringstream ss;
  write_tensor(ss, t);
  const SampleTensor back = read_tensor(ss);
  CHECK(back.dims == t.dims);
  CHECK(back.data == t.data);
  std::stringstream bad("XXXX");
  CHECK_THROWS(read_tensor(bad));
}
