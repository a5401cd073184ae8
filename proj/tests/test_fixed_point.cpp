#include <doctest.h>

#include <cmath>
#include <random>

#include "chainnn/errors.hpp"
#include "chainnn/fixed_point.hpp"

using namespace chainnn;

namespace {

// Exact rounding oracle: split the double into an integer mantissa and a
// binary exponent, then round mantissa * 2^(exp+f) in integer arithmetic.
__int128 exact_round_half_even(double x, int f) {
  int e = 0;
  const double m = std::frexp(x, &e);            // x = m * 2^e, 0.5 <= |m| < 1
  const auto mant = static_cast<int64_t>(std::ldexp(m, 53));  // exact
  const int shift = e - 53 + f;                  // value = mant * 2^shift
  if (shift >= 0) return static_cast<__int128>(mant) << shift;
  if (shift < -70) return 0;
  const __int128 den = static_cast<__int128>(1) << (-shift);
  const __int128 num = mant;
  __int128 q = num / den;
  __int128 r = num % den;
  if (r < 0) {  // floor
    q -= 1;
    r += den;
  }
  if (2 * r > den || (2 * r == den && (q & 1))) ++q;
  return q;
}

int64_t oracle_sat(__int128 v, int bits) {
  const __int128 hi = (static_cast<__int128>(1) << (bits - 1)) - 1;
  const __int128 lo = -hi - 1;
  return static_cast<int64_t>(v > hi ? hi : v < lo ? lo : v);
}

}  // namespace

TEST_CASE("quantize rounds half to even") {
  FixedFormat q88;
  CHECK(quantize_one(0.1, q88) == 26);  // 25.6 -> 26
  CHECK(quantize_one(1.0, q88) == 256);
  CHECK(quantize_one(-0.5, q88) == -128);
  CHECK(quantize_one(0.5 / 256.0, q88) == 0);   // 0.5 lsb -> even 0
  CHECK(quantize_one(1.5 / 256.0, q88) == 2);   // 1.5 lsb -> even 2
  CHECK(quantize_one(-1.5 / 256.0, q88) == -2);
  CHECK(quantize_one(1000.0, q88) == 32767);
  CHECK(quantize_one(-1000.0, q88) == -32768);
}

TEST_CASE("quantize matches the exact integer oracle") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-140.0, 140.0);
  for (int f : {0, 4, 8, 12}) {
    FixedFormat fmt;
    fmt.frac_bits = f;
    for (int i = 0; i < 4000; ++i) {
      double x = u(rng);
      if (i % 4 == 0) x = std::ldexp(std::round(std::ldexp(x, f + 1)), -(f + 1));  // exact half steps
      const int64_t want = oracle_sat(exact_round_half_even(x, f), 16);
      REQUIRE(quantize_one(x, fmt) == want);
    }
  }
}

TEST_CASE("quantize reports clamping and wraps on request") {
  FixedFormat wrap;
  wrap.overflow = Overflow::Wrap;
  bool clamped = false;
  CHECK(quantize_one(128.0, wrap, &clamped) == -32768);
  CHECK(clamped);
  const std::vector<double> v{0.0, 200.0, -200.0, 1.0};
  const auto r = quantize(v, FixedFormat{});
  CHECK(r.clamped == 2);
  CHECK(r.samples == std::vector<int32_t>{0, 32767, -32768, 256});
}

TEST_CASE("fixed_mac agrees with wide integer arithmetic") {
  std::mt19937_64 rng(3);
  FixedFormat fmt;
  for (int i = 0; i < 20000; ++i) {
    const int32_t a = static_cast<int32_t>(rng() % 65536) - 32768;
    const int32_t b = static_cast<int32_t>(rng() % 65536) - 32768;
    const int64_t acc = static_cast<int64_t>(rng() % (int64_t{1} << 32)) - (int64_t{1} << 31);
    const __int128 exact = static_cast<__int128>(acc) + static_cast<__int128>(a) * b;
    const MacResult r = fixed_mac(a, b, acc, fmt);
    REQUIRE(r.acc == oracle_sat(exact, 32));
    REQUIRE(r.overflowed == (exact != static_cast<__int128>(r.acc)));
  }
}

TEST_CASE("fixed_mac wraps modulo the accumulator width") {
  FixedFormat fmt;
  fmt.overflow = Overflow::Wrap;
  const MacResult r = fixed_mac(1, 1, fmt.acc_max(), fmt);
  CHECK(r.acc == fmt.acc_min());
  CHECK(r.overflowed);
}

TEST_CASE("requantize is round-half-even division by 2^f") {
  FixedFormat fmt;
  CHECK(requantize(128, fmt) == 0);    // 0.5 -> 0
  CHECK(requantize(384, fmt) == 2);    // 1.5 -> 2
  CHECK(requantize(-384, fmt) == -2);
  CHECK(requantize(-129, fmt) == -1);
  CHECK(requantize(int64_t{1} << 30, fmt) == 32767);
  std::mt19937_64 rng(11);
  for (int i = 0; i < 20000; ++i) {
    const int64_t acc = static_cast<int64_t>(rng() % (int64_t{1} << 28)) - (int64_t{1} << 27);
    // oracle: compare against the two neighbouring integers directly
    const double exact = static_cast<double>(acc) / 256.0;  // exact in double
    const double lo = std::floor(exact);
    const double frac = exact - lo;
    double want = frac < 0.5 ? lo : frac > 0.5 ? lo + 1 : (std::fmod(lo, 2.0) == 0 ? lo : lo + 1);
    want = std::clamp(want, -32768.0, 32767.0);
    REQUIRE(requantize(acc, fmt) == static_cast<int32_t>(want));
  }
}

TEST_CASE("format validation") {
  FixedFormat f;
  f.total_bits = 17;
  CHECK_THROWS_AS(f.validate(), ConfigError);
  f = {};
  f.frac_bits = 16;
  CHECK_THROWS_AS(f.validate(), ConfigError);
  f = {};
  f.accumulator_bits = 8;
  CHECK_THROWS_AS(f.validate(), ConfigError);
  CHECK(bias_to_acc(-3, FixedFormat{}) == -768);
  CHECK(dequantize(26, FixedFormat{}) == doctest::Approx(0.1015625));
}
