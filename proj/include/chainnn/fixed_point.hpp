#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace chainnn {

enum class Rounding { NearestEven };
enum class Overflow { Saturate, Wrap };

// Signed Qm.f samples with a wider accumulator. Products land at 2*frac_bits
// scaling; requantize() brings accumulators back to sample scaling.
struct FixedFormat {
  int total_bits = 16;
  int frac_bits = 8;
  int accumulator_bits = 32;
  Rounding rounding = Rounding::NearestEven;
  Overflow overflow = Overflow::Saturate;

  // Throws ConfigError when the format is not usable.
  void validate() const;

  int64_t sample_min() const { return -(int64_t{1} << (total_bits - 1)); }
  int64_t sample_max() const { return (int64_t{1} << (total_bits - 1)) - 1; }
  int64_t acc_min() const { return -(int64_t{1} << (accumulator_bits - 1)); }
  int64_t acc_max() const { return (int64_t{1} << (accumulator_bits - 1)) - 1; }

  bool operator==(const FixedFormat&) const = default;
};

struct QuantizeResult {
  std::vector<int32_t> samples;
  int64_t clamped = 0;
};

QuantizeResult quantize(std::span<const double> values, const FixedFormat& fmt);
int32_t quantize_one(double value, const FixedFormat& fmt, bool* clamped = nullptr);
double dequantize(int64_t raw, const FixedFormat& fmt);

struct MacResult {
  int64_t acc = 0;
  bool overflowed = false;
};

// acc + a*b evaluated exactly, then fitted to accumulator_bits.
MacResult fixed_mac(int32_t a, int32_t b, int64_t acc, const FixedFormat& fmt);

// Saturating/wrapping accumulator addition (oMemory partial accumulation).
MacResult fixed_add(int64_t acc, int64_t addend, const FixedFormat& fmt);

// Accumulator (scale 2^(2f)) -> sample (scale 2^f), round half to even.
int32_t requantize(int64_t acc, const FixedFormat& fmt, bool* clamped = nullptr);

// Bias sample (scale 2^f) promoted to accumulator scaling.
int64_t bias_to_acc(int32_t bias, const FixedFormat& fmt);

// Fits an exact integer into the accumulator range per fmt.overflow.
MacResult fit_accumulator(__int128 exact, const FixedFormat& fmt);

}  // namespace chainnn
