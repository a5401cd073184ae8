#include "chainnn/synth.hpp"

#include <algorithm>
#include <cmath>

namespace chainnn {

int32_t safe_sample_range(const LayerParams& p, const FixedFormat& fmt) {
  fmt.validate();
  const int64_t terms = int64_t{p.in_per_group()} * p.K * p.K;
  const int64_t out_limit = (int64_t{1} << (fmt.total_bits - 1 + fmt.frac_bits));
  const int64_t limit = std::min(out_limit, fmt.acc_max()) - (int64_t{1} << (2 * fmt.frac_bits));
  if (limit <= 0) return 0;
  int64_t r = static_cast<int64_t>(std::sqrt(double(limit) / double(terms)));
  while (r > 0 && terms * r * r >= limit) --r;
  while (terms * (r + 1) * (r + 1) < limit) ++r;
  return static_cast<int32_t>(std::min<int64_t>(r, fmt.sample_max()));
}

namespace {

void fill(SampleTensor& t, SynthEngine& eng, int32_t range) {
  const uint64_t span = 2 * uint64_t(range) + 1;
  for (auto& v : t.data) v = static_cast<int32_t>((eng() >> 32) % span) - range;
}

}  // namespace

SynthTensors synth_tensors(const LayerParams& p, uint64_t seed, const FixedFormat& fmt) {
  p.validate();
  SynthTensors s;
  s.range = safe_sample_range(p, fmt);
  SynthEngine eng(seed);
  s.ifmaps = SampleTensor({p.N, p.C, p.H, p.H});
  s.kernels = SampleTensor({p.M, p.in_per_group(), p.K, p.K});
  s.bias = SampleTensor({p.M});
  fill(s.ifmaps, eng, s.range);
  fill(s.kernels, eng, s.range);
  fill(s.bias, eng, std::min<int32_t>(s.range, int32_t{1} << fmt.frac_bits));
  return s;
}

uint64_t tensor_checksum(const SampleTensor& t) {
  uint64_t h = 14695981039346656037ULL;
  for (int32_t v : t.data) {
    const uint16_t u = static_cast<uint16_t>(v);
    for (int b = 0; b < 2; ++b) {
      h ^= (u >> (8 * b)) & 0xFF;
      h *= 1099511628211ULL;
    }
  }
  return h;
}

}  // namespace chainnn
