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
#include <limits>
#include <utility>
#include <vector>

#include "spiketrum/dictionary.hpp"
#include "spiketrum/encoder.hpp"
#include "spiketrum/spike_coder.hpp"

namespace spiketrum {

// Returned as snr_db when the reconstruction is exact.
inline constexpr double kExactSnr = std::numeric_limits<double>::infinity();

struct ReconstructionReport {
  double l2_error = 0.0;
  double snr_db = 0.0;
  std::size_t codes_used = 0;
  // (k, l2_error) using the first k codes of every segment.
  std::vector<std::pair<std::size_t, double>> per_k_curve;
};

/// Superposes s * shift_kernel(kernel_m, tau) at each code's segment offset.
/// With `quantized_by` set, intensities are replaced by sign(s) * C_level.
WaveformXd reconstruct(const std::vector<CodeSet>& codesets,
                       const Dictionary& dict, std::size_t width,
                       std::size_t total_len,
                       const ChannelTable* quantized_by = nullptr);

// Rebuilds the code sets an event stream came from. The segment of an event
// is floor(t / W). With use_raw the raw intensity is used, otherwise the
// channel center carrying the raw intensity's sign.
std::vector<CodeSet> codesets_from_events(const std::vector<SpikeEvent>& events,
                                          std::size_t width, bool use_raw);

ReconstructionReport reconstruction_error(const WaveformXd& x,
                                          const WaveformXd& x_hat);

// Fills per_k_curve for k = 1..max_k (prefixes of each CodeSet).
std::vector<std::pair<std::size_t, double>> error_curve(
    const WaveformXd& x, const std::vector<CodeSet>& codesets,
    const Dictionary& dict, std::size_t width, std::size_t max_k,
    const ChannelTable* quantized_by = nullptr);

}  // namespace spiketrum
