#pragma once

#include <cstdint>
#include <random>

#include "chainnn/tensor.hpp"

namespace chainnn {

// Knuth's MMIX LCG (modulus 2^64). The engine is fully specified by the
// standard, so output is identical on every platform.
using SynthEngine =
    std::linear_congruential_engine<uint64_t, 6364136223846793005ULL, 1442695040888963407ULL, 0>;

struct SynthTensors {
  SampleTensor ifmaps;   // [N][C][H][H]
  SampleTensor kernels;  // [M][C/groups][K][K]
  SampleTensor bias;     // [M]
  int32_t range = 0;     // samples are drawn from [-range, range]
};

// Largest sample magnitude R such that no partial or final sum can leave the
// output range: (C/groups)*K^2*R^2 + 2^(2f) < 2^(total_bits-1+f). Bias is
// limited to min(R, 2^f).
int32_t safe_sample_range(const LayerParams& p, const FixedFormat& fmt);

// Draws ifmaps, then kernels, then bias from one engine seeded with `seed`.
// Each sample is (x >> 32) mod (2R+1) - R for successive engine outputs x.
SynthTensors synth_tensors(const LayerParams& p, uint64_t seed, const FixedFormat& fmt = {});

// FNV-1a over the little-endian int16 encoding of the samples.
uint64_t tensor_checksum(const SampleTensor& t);

}  // namespace chainnn
