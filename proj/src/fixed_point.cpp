#include "chainnn/fixed_point.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "chainnn/errors.hpp"

namespace chainnn {

namespace {

int64_t wrap_to_bits(__int128 v, int bits) {
  const unsigned __int128 mask = (static_cast<unsigned __int128>(1) << bits) - 1;
  unsigned __int128 u = static_cast<unsigned __int128>(v) & mask;
  const unsigned __int128 sign = static_cast<unsigned __int128>(1) << (bits - 1);
  if (u & sign) return static_cast<int64_t>(static_cast<__int128>(u) - (static_cast<__int128>(1) << bits));
  return static_cast<int64_t>(u);
}

int64_t fit_bits(__int128 v, int bits, Overflow mode, bool* clamped) {
  const __int128 lo = -(static_cast<__int128>(1) << (bits - 1));
  const __int128 hi = (static_cast<__int128>(1) << (bits - 1)) - 1;
  if (v >= lo && v <= hi) {
    if (clamped) *clamped = false;
    return static_cast<int64_t>(v);
  }
  if (clamped) *clamped = true;
  if (mode == Overflow::Saturate) return static_cast<int64_t>(v < lo ? lo : hi);
  return wrap_to_bits(v, bits);
}

}  // namespace

void FixedFormat::validate() const {
  if (total_bits < 2 || total_bits > 16)
    throw ConfigError("total_bits must be in [2, 16], got " + std::to_string(total_bits));
  if (frac_bits < 0 || frac_bits >= total_bits)
    throw ConfigError("frac_bits must be in [0, total_bits), got " + std::to_string(frac_bits));
  if (accumulator_bits < total_bits || accumulator_bits > 62)
    throw ConfigError("accumulator_bits must be in [total_bits, 62], got " +
                      std::to_string(accumulator_bits));
}

int32_t quantize_one(double value, const FixedFormat& fmt, bool* clamped) {
  if (std::isnan(value)) {
    if (clamped) *clamped = true;
    return 0;
  }
  // Scaling by a power of two is exact; nearbyint rounds half to even under
  // the default floating-point environment.
  const double scaled = std::nearbyint(std::ldexp(value, fmt.frac_bits));
  constexpr double kLimit = 4.0e18;
  if (!(std::fabs(scaled) < kLimit)) {
    if (clamped) *clamped = true;
    return static_cast<int32_t>(scaled < 0 ? fmt.sample_min() : fmt.sample_max());
  }
  return static_cast<int32_t>(
      fit_bits(static_cast<__int128>(static_cast<int64_t>(scaled)), fmt.total_bits, fmt.overflow, clamped));
}

QuantizeResult quantize(std::span<const double> values, const FixedFormat& fmt) {
  QuantizeResult out;
  out.samples.reserve(values.size());
  for (double v : values) {
    bool c = false;
    out.samples.push_back(quantize_one(v, fmt, &c));
    out.clamped += c ? 1 : 0;
  }
  return out;
}

double dequantize(int64_t raw, const FixedFormat& fmt) {
  return std::ldexp(static_cast<double>(raw), -fmt.frac_bits);
}

MacResult fit_accumulator(__int128 exact, const FixedFormat& fmt) {
  bool c = false;
  const int64_t v = fit_bits(exact, fmt.accumulator_bits, fmt.overflow, &c);
  return {v, c};
}

MacResult fixed_mac(int32_t a, int32_t b, int64_t acc, const FixedFormat& fmt) {
  const __int128 exact = static_cast<__int128>(acc) +
                         static_cast<__int128>(a) * static_cast<__int128>(b);
  return fit_accumulator(exact, fmt);
}

MacResult fixed_add(int64_t acc, int64_t addend, const FixedFormat& fmt) {
  return fit_accumulator(static_cast<__int128>(acc) + addend, fmt);
}

int32_t requantize(int64_t acc, const FixedFormat& fmt, bool* clamped) {
  const int f = fmt.frac_bits;
  __int128 q = acc;
  if (f > 0) {
    const int64_t one = int64_t{1} << f;
    const int64_t half = one >> 1;
    int64_t fl = acc >> f;  // arithmetic shift = floor division
    const int64_t rem = acc - fl * one;
    if (rem > half || (rem == half && (fl & 1))) ++fl;
    q = fl;
  }
  return static_cast<int32_t>(fit_bits(q, fmt.total_bits, fmt.overflow, clamped));
}

int64_t bias_to_acc(int32_t bias, const FixedFormat& fmt) {
  return static_cast<int64_t>(bias) * (int64_t{1} << fmt.frac_bits);
}

}  // namespace chainnn
