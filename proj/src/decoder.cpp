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
#include "spiketrum/decoder.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace spiketrum {

WaveformXd reconstruct(const std::vector<CodeSet>& codesets,
                       const Dictionary& dict, std::size_t width,
                       std::size_t total_len, const ChannelTable* quantized_by) {
  WaveformXd out = WaveformXd::Zero(static_cast<Eigen::Index>(total_len));
  const auto w = static_cast<Eigen::Index>(width);
  const Eigen::Index len = static_cast<Eigen::Index>(dict.kernel_len());
  for (const auto& set : codesets) {
    const auto offset = static_cast<Eigen::Index>(set.segment_index * width);
    if (offset + w > out.size()) {
      throw Error(ErrorKind::kCodeOutOfBounds,
                  "segment " + std::to_string(set.segment_index) +
                      " extends past total_len " + std::to_string(total_len));
    }
    for (const auto& code : set.codes) {
      if (code.m >= dict.size()) {
        throw Error(ErrorKind::kCodeOutOfBounds,
                    "kernel index " + std::to_string(code.m));
      }
      if (code.tau > half_width(width) || code.tau < -half_width(width)) {
        throw Error(ErrorKind::kCodeOutOfBounds,
                    "tau " + std::to_string(code.tau));
      }
      double s = code.s;
      if (quantized_by != nullptr && s != 0.0) {
        s = std::copysign(quantized_by->centers()[quantized_by->level_of(s)], s);
      }
      if (s == 0.0) continue;
      const Eigen::Index lo = std::max<Eigen::Index>(0, code.tau);
      const Eigen::Index hi = std::min<Eigen::Index>(w, len + code.tau);
      if (hi <= lo) continue;
      out.segment(offset + lo, hi - lo) +=
          s * dict.kernel(code.m).segment(lo - code.tau, hi - lo).transpose();
    }
  }
  return out;
}

std::vector<CodeSet> codesets_from_events(const std::vector<SpikeEvent>& events,
                                          std::size_t width, bool use_raw) {
  std::map<std::size_t, CodeSet> by_segment;
  const auto w = static_cast<std::int64_t>(width);
  for (const auto& ev : events) {
    if (ev.t < 0) {
      throw Error(ErrorKind::kCodeOutOfBounds, "negative event time");
    }
    const auto seg = static_cast<std::size_t>(ev.t / w);
    Code code;
    code.m = ev.m;
    code.segment_index = seg;
    code.tau = static_cast<int>(ev.t - static_cast<std::int64_t>(seg) * w -
                                half_width(width));
    code.s = use_raw ? ev.raw : std::copysign(ev.center, ev.raw);
    auto& set = by_segment[seg];
    set.segment_index = seg;
    set.codes.push_back(code);
  }
  std::vector<CodeSet> out;
  out.reserve(by_segment.size());
  for (auto& [seg, set] : by_segment) out.push_back(std::move(set));
  return out;
}

ReconstructionReport reconstruction_error(const WaveformXd& x,
                                          const WaveformXd& x_hat) {
  if (x.size() != x_hat.size()) {
    throw Error(ErrorKind::kLengthMismatch,
                std::to_string(x.size()) + " vs " + std::to_string(x_hat.size()));
  }
  ReconstructionReport report;
  report.l2_error = (x - x_hat).norm();
  report.snr_db = report.l2_error == 0.0
                      ? kExactSnr
                      : 20.0 * std::log10(x.norm() / report.l2_error);
  return report;
}

std::vector<std::pair<std::size_t, double>> error_curve(
    const WaveformXd& x, const std::vector<CodeSet>& codesets,
    const Dictionary& dict, std::size_t width, std::size_t max_k,
    const ChannelTable* quantized_by) {
  std::vector<std::pair<std::size_t, double>> curve;
  std::vector<CodeSet> prefix(codesets.size());
  for (std::size_t i = 0; i < codesets.size(); ++i) {
    prefix[i].segment_index = codesets[i].segment_index;
  }
  for (std::size_t k = 1; k <= max_k; ++k) {
    for (std::size_t i = 0; i < codesets.size(); ++i) {
      const auto& codes = codesets[i].codes;
      prefix[i].codes.assign(codes.begin(),
                             codes.begin() + std::ptrdiff_t(std::min(k, codes.size())));
    }
    const WaveformXd x_hat =
        reconstruct(prefix, dict, width, std::size_t(x.size()), quantized_by);
    curve.emplace_back(k, (x - x_hat).norm());
  }
  return curve;
}

}  // namespace spiketrum
