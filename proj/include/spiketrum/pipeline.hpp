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
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "spiketrum/decoder.hpp"
#include "spiketrum/dictionary.hpp"
#include "spiketrum/encoder.hpp"
#include "spiketrum/io.hpp"
#include "spiketrum/spike_coder.hpp"

namespace spiketrum {

// Settings shared by every subcommand. Fields map 1:1 onto CLI flags and
// config-file keys (see apply_config_entry).
struct RunConfig {
  std::filesystem::path input;
  std::filesystem::path output;
  std::optional<InputFormat> input_format;
  std::optional<EventFormat> output_format;
  // Overrides the rate stored in a wav file; required for csv/raw input
  // (16 kHz assumed otherwise).
  std::optional<double> sample_rate;

  EncoderConfig encoder;
  std::size_t num_kernels = 40;
  double freq_lo = 20.0;
  double freq_hi = 8000.0;
  // Defaults to the segment width.
  std::optional<std::size_t> kernel_len;

  std::vector<double> centers = default_centers();
  ItpMetric itp = ItpMetric::kLog;
  bool with_raw_intensity = false;
  bool quantized = false;

  std::uint64_t seed = 1;
  std::size_t threads = 1;
};

inline constexpr double kDefaultSampleRate = 16000.0;

// Parses `key=value` lines; blank lines and '#' comments are skipped.
std::map<std::string, std::string> read_config_file(
    const std::filesystem::path& path);

// Applies one config key. Returns false for unknown keys; throws
// Error(kInvalidConfig) for bad values.
bool apply_config_entry(RunConfig& cfg, const std::string& key,
                        const std::string& value);

std::vector<double> parse_centers(const std::string& text);

DictionaryConfig dictionary_config(const RunConfig& cfg, double sample_rate);

// Encodes all segments, `threads` at a time; results keep segment order.
struct SignalEncoding {
  std::vector<CodeSet> codesets;
  std::size_t saturations = 0;
};

SignalEncoding encode_signal(const WaveformXd& samples, const Dictionary& dict,
                             const SpectralDictionary* sdict,
                             const EncoderConfig& cfg, std::size_t threads = 1);

struct EncodeSummary {
  double sample_rate = 0.0;
  std::size_t samples = 0;
  std::size_t segments = 0;
  std::size_t codes = 0;
  std::size_t events = 0;
  std::size_t saturations = 0;
};

/// read_input -> segment -> encode -> emit_stream -> write_events.
EncodeSummary run_encode(const RunConfig& cfg);

struct DecodeSummary {
  std::size_t events = 0;
  std::size_t samples = 0;
  std::optional<ReconstructionReport> report;  // when a reference is given
};

/// Events file (cfg.input) -> waveform (cfg.output). With `reference`, the
/// reconstruction is scored against that signal.
DecodeSummary run_decode(const RunConfig& cfg,
                         const std::optional<std::filesystem::path>& reference,
                         std::optional<std::size_t> total_len = {});

// Seeded noise plus kernel mixtures, `segments` segments long.
WaveformXd synthetic_corpus(const Dictionary& dict, std::size_t width,
                            std::size_t segments, std::uint64_t seed);

struct BenchReport {
  Backend backend = Backend::kDirect;
  std::optional<FixedFormat> fixed;
  std::size_t segments = 0;
  std::size_t codes = 0;
  double seconds = 0.0;
  double seconds_per_segment = 0.0;
  double codes_per_second = 0.0;
  double segments_per_second = 0.0;
};

struct BenchResult {
  std::vector<BenchReport> runs;
  // Direct and spectral (double arithmetic) emitted the same (m, tau) codes.
  bool backends_agree = false;
  std::size_t width = 0;
  std::size_t num_kernels = 0;
  std::size_t max_codes = 0;
};

BenchResult run_bench(const RunConfig& cfg, std::size_t segments);

}  // namespace spiketrum
