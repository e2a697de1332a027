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
#include "spiketrum/spike_coder.hpp"

#include <algorithm>
#include <cmath>

namespace spiketrum {

ItpMetric parse_itp_metric(const std::string& text) {
  if (text == "log") return ItpMetric::kLog;
  if (text == "linear") return ItpMetric::kLinear;
  throw Error(ErrorKind::kInvalidConfig, "unknown itp metric '" + text + "'");
}

const char* to_string(ItpMetric metric) {
  return metric == ItpMetric::kLog ? "log" : "linear";
}

ChannelTable::ChannelTable(std::size_t num_kernels, std::vector<double> centers,
                           ItpMetric metric)
    : num_kernels_(num_kernels), centers_(std::move(centers)), metric_(metric) {
  if (num_kernels_ == 0) {
    throw Error(ErrorKind::kInvalidConfig, "channel table needs kernels");
  }
  if (centers_.empty()) {
    throw Error(ErrorKind::kInvalidCenters, "no center intensities");
  }
  for (std::size_t l = 0; l < centers_.size(); ++l) {
    if (!(centers_[l] > 0.0) || !std::isfinite(centers_[l])) {
      throw Error(ErrorKind::kInvalidCenters, "centers must be positive");
    }
    if (l > 0 && !(centers_[l] > centers_[l - 1])) {
      throw Error(ErrorKind::kInvalidCenters,
                  "centers must be strictly increasing");
    }
    log_centers_.push_back(std::log(centers_[l]));
  }
}

std::size_t ChannelTable::level_of(double intensity) const {
  const double mag = std::fabs(intensity);
  const double x = metric_ == ItpMetric::kLog ? std::log(mag) : mag;
  const auto& ref = metric_ == ItpMetric::kLog ? log_centers_ : centers_;
  std::size_t best = 0;
  double best_dist = std::fabs(x - ref[0]);
  for (std::size_t l = 1; l < ref.size(); ++l) {
    const double d = std::fabs(x - ref[l]);
    if (d < best_dist) {
      best_dist = d;
      best = l;
    }
  }
  return best;
}

ChannelTable build_channel_table(std::size_t num_kernels,
                                 const std::vector<double>& centers,
                                 ItpMetric metric) {
  return ChannelTable(num_kernels, centers, metric);
}

SpikeEvent map_code(const Code& code, const ChannelTable& table,
                    std::size_t width) {
  if (code.s == 0.0) {
    throw Error(ErrorKind::kZeroIntensity, "code carries no intensity");
  }
  if (code.tau > half_width(width) || code.tau < -half_width(width)) {
    throw Error(ErrorKind::kShiftOutOfRange,
                "tau " + std::to_string(code.tau) + " outside the segment");
  }
  if (code.m >= table.num_kernels()) {
    throw Error(ErrorKind::kCodeOutOfBounds,
                "kernel " + std::to_string(code.m) + " has no channels");
  }
  SpikeEvent ev;
  ev.m = code.m;
  ev.level = table.level_of(code.s);
  ev.channel = table.channel_of(code.m, ev.level);
  ev.center = table.centers()[ev.level];
  ev.raw = code.s;
  ev.t = static_cast<std::int64_t>(code.segment_index * width) +
         half_width(width) + code.tau;
  return ev;
}

std::vector<SpikeEvent> emit_stream(const std::vector<CodeSet>& codesets,
                                    const ChannelTable& table,
                                    std::size_t width) {
  std::vector<SpikeEvent> events;
  for (const auto& set : codesets) {
    for (const auto& code : set.codes) {
      if (code.s == 0.0) continue;
      events.push_back(map_code(code, table, width));
    }
  }
  std::stable_sort(events.begin(), events.end(),
                   [](const SpikeEvent& a, const SpikeEvent& b) {
                     return a.t != b.t ? a.t < b.t : a.channel < b.channel;
                   });
  return events;
}

}  // namespace spiketrum
