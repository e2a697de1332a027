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
#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>

namespace spiketrum {

enum class Overflow { kSaturate, kWrap };

// Signed two's-complement Q-format: total_bits wide, frac_bits after the
// binary point. 34:24 leaves 10 integer bits, enough for correlations of
// unit-norm kernels against full-scale 2048-sample segments.
struct FixedFormat {
  int total_bits = 34;
  int frac_bits = 24;
  Overflow overflow = Overflow::kSaturate;

  void validate() const;

  std::int64_t max_raw() const {
    return total_bits >= 64 ? INT64_MAX
                            : (std::int64_t{1} << (total_bits - 1)) - 1;
  }
  std::int64_t min_raw() const { return -max_raw() - 1; }
  double lsb() const;

  friend bool operator==(const FixedFormat&, const FixedFormat&) = default;
};

// Parses "B:F" (e.g. "34:24"). Throws Error(kInvalidConfig).
FixedFormat parse_fixed_format(std::string_view text);
std::string to_string(const FixedFormat& fmt);

// Saturation events, per encode; never shared across threads.
struct FixedStats {
  std::size_t saturations = 0;
};

struct FixedValue {
  std::int64_t raw = 0;
  FixedFormat format;
};

// Applies the format's overflow policy to an out-of-range intermediate.
std::int64_t fit_raw(__int128 value, const FixedFormat& fmt,
                     FixedStats* stats = nullptr);

// (a * b) >> frac_bits, rounded to nearest, ties to even.
__int128 scaled_product(std::int64_t a, std::int64_t b, int frac_bits);

std::int64_t quantize_raw(double x, const FixedFormat& fmt,
                          FixedStats* stats = nullptr);
FixedValue quantize(double x, const FixedFormat& fmt,
                    FixedStats* stats = nullptr);
double dequantize(std::int64_t raw, const FixedFormat& fmt);
double dequantize(const FixedValue& v);

// acc + a*b. Throws Error(kInvalidConfig) when the formats differ.
FixedValue macc(const FixedValue& acc, const FixedValue& a, const FixedValue& b,
                FixedStats* stats = nullptr);

// Raw-level form used by the encoder's inner loops.
inline std::int64_t macc_raw(std::int64_t acc, std::int64_t a, std::int64_t b,
                             const FixedFormat& fmt, FixedStats* stats) {
  return fit_raw(static_cast<__int128>(acc) +
                     scaled_product(a, b, fmt.frac_bits),
                 fmt, stats);
}

}  // namespace spiketrum
