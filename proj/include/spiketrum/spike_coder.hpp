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
#include <vector>

#include "spiketrum/encoder.hpp"

namespace spiketrum {

// Distance used to pick the nearest center intensity.
enum class ItpMetric { kLog, kLinear };

ItpMetric parse_itp_metric(const std::string& text);
const char* to_string(ItpMetric metric);

inline const std::vector<double>& default_centers() {
  static const std::vector<double> centers{0.0065, 0.4115, 25.8744};
  return centers;
}

// Intensity-to-place channel layout: each kernel owns `levels()` adjacent
// channels, channel = m * levels + level.
class ChannelTable {
 public:
  ChannelTable(std::size_t num_kernels, std::vector<double> centers,
               ItpMetric metric = ItpMetric::kLog);

  std::size_t num_kernels() const { return num_kernels_; }
  std::size_t levels() const { return centers_.size(); }
  std::size_t channels() const { return num_kernels_ * centers_.size(); }
  const std::vector<double>& centers() const { return centers_; }
  ItpMetric metric() const { return metric_; }

  std::size_t channel_of(std::size_t m, std::size_t level) const {
    return m * levels() + level;
  }

  // Nearest center to |intensity|; ties go to the lower level.
  std::size_t level_of(double intensity) const;

 private:
  std::size_t num_kernels_;
  std::vector<double> centers_;
  std::vector<double> log_centers_;
  ItpMetric metric_;
};

ChannelTable build_channel_table(std::size_t num_kernels,
                                 const std::vector<double>& centers,
                                 ItpMetric metric = ItpMetric::kLog);

// One spike in address-event form.
struct SpikeEvent {
  std::int64_t t = 0;  // absolute sample: segment * W + W/2 + tau
  std::size_t m = 0;
  std::size_t level = 0;
  std::size_t channel = 0;
  double center = 0.0;  // C_level
  double raw = 0.0;     // signed intensity of the code that fired it

  friend bool operator==(const SpikeEvent&, const SpikeEvent&) = default;
};

// Throws kZeroIntensity for s == 0, kShiftOutOfRange for |tau| > W/2,
// kCodeOutOfBounds when m is outside the table.
SpikeEvent map_code(const Code& code, const ChannelTable& table,
                    std::size_t width);

// Time-ordered stream, sorted by (t, channel); zero-intensity codes dropped.
std::vector<SpikeEvent> emit_stream(const std::vector<CodeSet>& codesets,
                                    const ChannelTable& table,
                                    std::size_t width);

}  // namespace spiketrum
