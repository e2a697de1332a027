/* Copyright 2026 The Spiketrum Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/
#include "spiketrum/fixed_point.hpp"

#include <charconv>
#include <cmath>

#include "spiketrum/error.hpp"

namespace spiketrum {

void FixedFormat::validate() const {
  if (!(0 < frac_bits && frac_bits < total_bits && total_bits <= 64)) {
    throw Error(ErrorKind::kInvalidConfig,
                "fixed format needs 0 < frac_bits < total_bits <= 64, got " +
                    to_string(*this));
  }
}

double FixedFormat::lsb() const { return std::ldexp(1.0, -frac_bits); }

FixedFormat parse_fixed_format(std::string_view text) {
  const auto colon = text.find(':');
  if (colon == std::string_view::npos) {
    throw Error(ErrorKind::kInvalidConfig,
                "fixed format must look like B:F, got '" + std::string(text) + "'");
  }
  FixedFormat fmt;
  auto parse_int = [&](std::string_view part, int& out) {
    const auto* end = part.data() + part.size();
    auto [ptr, ec] = std::from_chars(part.data(), end, out);
    if (ec != std::errc() || ptr != end) {
      throw Error(ErrorKind::kInvalidConfig,
                  "bad integer in fixed format '" + std::string(text) + "'");
    }
  };
  parse_int(text.substr(0, colon), fmt.total_bits);
  parse_int(text.substr(colon + 1), fmt.frac_bits);
  fmt.validate();
  return fmt;
}

std::string to_string(const FixedFormat& fmt) {
  return std::to_string(fmt.total_bits) + ":" + std::to_string(fmt.frac_bits);
}

std::int64_t fit_raw(__int128 value, const FixedFormat& fmt,
                     FixedStats* stats) {
  const __int128 hi = fmt.max_raw();
  const __int128 lo = fmt.min_raw();
  if (value >= lo && value <= hi) return static_cast<std::int64_t>(value);
  if (stats) ++stats->saturations;
  if (fmt.overflow == Overflow::kSaturate) {
    return static_cast<std::int64_t>(value > hi ? hi : lo);
  }
  // Keep the low total_bits bits and sign-extend.
  const auto bits = static_cast<unsigned __int128>(value);
  const unsigned shift = 128u - static_cast<unsigned>(fmt.total_bits);
  return static_cast<std::int64_t>(static_cast<__int128>(bits << shift) >> shift);
}

__int128 scaled_product(std::int64_t a, std::int64_t b, int frac_bits) {
  const __int128 p = static_cast<__int128>(a) * b;
  const __int128 q = p >> frac_bits;  // floor
  const __int128 rem = p - (q << frac_bits);
  const __int128 half = static_cast<__int128>(1) << (frac_bits - 1);
  if (rem > half || (rem == half && (q & 1) != 0)) return q + 1;
  return q;
}

std::int64_t quantize_raw(double x, const FixedFormat& fmt, FixedStats* stats) {
  if (std::isnan(x)) {
    throw Error(ErrorKind::kInvalidConfig, "cannot quantize NaN");
  }
  // nearbyint honours the default FE_TONEAREST mode: ties go to even.
  const double scaled = std::nearbyint(std::ldexp(x, fmt.frac_bits));
  const double limit = std::ldexp(1.0, 100);
  if (std::fabs(scaled) >= limit) {
    return fit_raw(scaled > 0 ? static_cast<__int128>(1) << 100
                              : -(static_cast<__int128>(1) << 100),
                   fmt, stats);
  }
  return fit_raw(static_cast<__int128>(scaled), fmt, stats);
}

FixedValue quantize(double x, const FixedFormat& fmt, FixedStats* stats) {
  return FixedValue{quantize_raw(x, fmt, stats), fmt};
}

double dequantize(std::int64_t raw, const FixedFormat& fmt) {
  return std::ldexp(static_cast<double>(raw), -fmt.frac_bits);
}

double dequantize(const FixedValue& v) { return dequantize(v.raw, v.format); }

FixedValue macc(const FixedValue& acc, const FixedValue& a, const FixedValue& b,
                FixedStats* stats) {
  if (!(acc.format == a.format) || !(a.format == b.format)) {
    throw Error(ErrorKind::kInvalidConfig, "macc operands differ in format");
  }
  return FixedValue{macc_raw(acc.raw, a.raw, b.raw, acc.format, stats),
                    acc.format};
}

}  // namespace spiketrum
