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

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "spiketrum/encoder.hpp"
#include "spiketrum/spike_coder.hpp"

namespace spiketrum {

enum class InputFormat { kWav16, kCsv, kRawF32 };
enum class EventFormat { kCsv, kJsonl };

InputFormat parse_input_format(const std::string& text);
EventFormat parse_event_format(const std::string& text);
const char* to_string(InputFormat fmt);
const char* to_string(EventFormat fmt);

// .wav -> wav16, .csv/.txt -> csv, .f32/.raw/.bin -> raw-f32.
InputFormat input_format_from_path(const std::filesystem::path& path);
// .jsonl/.json -> jsonl, anything else csv.
EventFormat event_format_from_path(const std::filesystem::path& path);

struct Signal {
  WaveformXd samples;
  std::optional<double> sample_rate;  // known only for wav input
};

// wav16 samples are scaled by 1/32768 and stereo is averaged to mono; csv and
// raw-f32 pass through unscaled. Throws kIoError, kUnsupportedFormat,
// kCorruptFile.
Signal read_input(const std::filesystem::path& path, InputFormat fmt);

void write_wav16(const std::filesystem::path& path, const WaveformXd& samples,
                 int sample_rate);
void write_raw_f32(const std::filesystem::path& path, const WaveformXd& samples);
void write_csv_samples(const std::filesystem::path& path,
                       const WaveformXd& samples);

/// Non-overlapping segments of width W, last one zero-padded.
std::vector<Segment> segment_stream(const WaveformXd& samples, std::size_t width);

struct EventWriteOptions {
  EventFormat format = EventFormat::kCsv;
  bool with_raw_intensity = false;
};

inline constexpr const char* kEventCsvHeader =
    "t_samples,channel,kernel,level,intensity_center";

void write_events(std::ostream& os, const std::vector<SpikeEvent>& events,
                  const EventWriteOptions& opts);
void write_events(const std::filesystem::path& path,
                  const std::vector<SpikeEvent>& events,
                  const EventWriteOptions& opts);

// Parses either format; the raw column is picked up when present.
std::vector<SpikeEvent> read_events(std::istream& is, EventFormat format);
std::vector<SpikeEvent> read_events(const std::filesystem::path& path);

}  // namespace spiketrum
