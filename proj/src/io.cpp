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
#include "spiketrum/io.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace spiketrum {

namespace {

std::string lower_ext(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext;
}

std::vector<char> slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIoError, "cannot open " + path.string());
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)),
                          std::istreambuf_iterator<char>());
  if (in.bad()) throw Error(ErrorKind::kIoError, "read failed: " + path.string());
  return bytes;
}

std::uint32_t le32(const char* p) {
  const auto* u = reinterpret_cast<const unsigned char*>(p);
  return std::uint32_t(u[0]) | std::uint32_t(u[1]) << 8 |
         std::uint32_t(u[2]) << 16 | std::uint32_t(u[3]) << 24;
}

std::uint16_t le16(const char* p) {
  const auto* u = reinterpret_cast<const unsigned char*>(p);
  return static_cast<std::uint16_t>(u[0] | u[1] << 8);
}

void put32(std::ostream& os, std::uint32_t v) {
  const char b[4] = {char(v & 0xff), char(v >> 8 & 0xff), char(v >> 16 & 0xff),
                     char(v >> 24 & 0xff)};
  os.write(b, 4);
}

void put16(std::ostream& os, std::uint16_t v) {
  const char b[2] = {char(v & 0xff), char(v >> 8 & 0xff)};
  os.write(b, 2);
}

Signal read_wav16(const std::filesystem::path& path) {
  const std::vector<char> bytes = slurp(path);
  auto corrupt = [&](const std::string& why) {
    return Error(ErrorKind::kCorruptFile, path.string() + ": " + why);
  };
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    throw corrupt("not a RIFF/WAVE file");
  }
  int channels = 0;
  int bits = 0;
  std::uint32_t rate = 0;
  const char* data = nullptr;
  std::size_t data_len = 0;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const char* id = bytes.data() + pos;
    const std::size_t len = le32(id + 4);
    const std::size_t body = pos + 8;
    if (body + len > bytes.size()) {
      // Truncated data chunk: keep what is there, as most readers do.
      if (std::memcmp(id, "data", 4) == 0) {
        data = bytes.data() + body;
        data_len = bytes.size() - body;
        break;
      }
      throw corrupt("chunk overruns file");
    }
    if (std::memcmp(id, "fmt ", 4) == 0) {
      if (len < 16) throw corrupt("short fmt chunk");
      const std::uint16_t tag = le16(id + 8);
      channels = le16(id + 10);
      rate = le32(id + 12);
      bits = le16(id + 22);
      bool pcm = tag == 1;
      if (tag == 0xFFFE && len >= 40) pcm = le16(id + 8 + 24) == 1;
      if (!pcm) throw Error(ErrorKind::kUnsupportedFormat, "wav is not PCM");
    } else if (std::memcmp(id, "data", 4) == 0) {
      data = bytes.data() + body;
      data_len = len;
    }
    pos = body + len + (len & 1);
  }
  if (channels == 0) throw corrupt("missing fmt chunk");
  if (data == nullptr) throw corrupt("missing data chunk");
  if (bits != 16) {
    throw Error(ErrorKind::kUnsupportedFormat,
                "only 16-bit PCM wav is supported, got " + std::to_string(bits));
  }
  const std::size_t frame = std::size_t(channels) * 2;
  const std::size_t frames = data_len / frame;
  Signal sig;
  sig.sample_rate = static_cast<double>(rate);
  sig.samples.resize(static_cast<Eigen::Index>(frames));
  for (std::size_t i = 0; i < frames; ++i) {
    double acc = 0.0;
    for (int c = 0; c < channels; ++c) {
      acc += static_cast<std::int16_t>(le16(data + i * frame + std::size_t(c) * 2));
    }
    sig.samples(Eigen::Index(i)) = acc / channels / 32768.0;
  }
  return sig;
}

Signal read_csv(const std::filesystem::path& path) {
  const std::vector<char> bytes = slurp(path);
  std::vector<double> values;
  const char* p = bytes.data();
  const char* end = p + bytes.size();
  auto is_sep = [](char c) {
    return c == ',' || c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == ';';
  };
  while (p < end) {
    while (p < end && is_sep(*p)) ++p;
    if (p == end) break;
    double v = 0.0;
    auto [next, ec] = std::from_chars(p, end, v);
    if (ec != std::errc() || (next < end && !is_sep(*next))) {
      throw Error(ErrorKind::kCorruptFile,
                  path.string() + ": bad number at byte " +
                      std::to_string(p - bytes.data()));
    }
    values.push_back(v);
    p = next;
  }
  Signal sig;
  sig.samples = Eigen::Map<const WaveformXd>(values.data(),
                                             static_cast<Eigen::Index>(values.size()));
  return sig;
}

Signal read_raw_f32(const std::filesystem::path& path) {
  const std::vector<char> bytes = slurp(path);
  if (bytes.size() % 4 != 0) {
    throw Error(ErrorKind::kCorruptFile,
                path.string() + ": size is not a multiple of 4 bytes");
  }
  Signal sig;
  sig.samples.resize(static_cast<Eigen::Index>(bytes.size() / 4));
  for (Eigen::Index i = 0; i < sig.samples.size(); ++i) {
    const std::uint32_t bits = le32(bytes.data() + i * 4);
    float f;
    std::memcpy(&f, &bits, 4);
    sig.samples(i) = f;
  }
  return sig;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::kIoError, "cannot write " + path.string());
  return out;
}

std::size_t parse_size(const std::string& s, const std::string& what) {
  std::size_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) {
    throw Error(ErrorKind::kCorruptFile, "bad " + what + " '" + s + "'");
  }
  return v;
}

double parse_double(const std::string& s, const std::string& what) {
  double v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) {
    throw Error(ErrorKind::kCorruptFile, "bad " + what + " '" + s + "'");
  }
  return v;
}

}  // namespace

InputFormat parse_input_format(const std::string& text) {
  if (text == "wav16" || text == "wav") return InputFormat::kWav16;
  if (text == "csv") return InputFormat::kCsv;
  if (text == "raw-f32" || text == "raw") return InputFormat::kRawF32;
  throw Error(ErrorKind::kUnsupportedFormat, "unknown input format '" + text + "'");
}

EventFormat parse_event_format(const std::string& text) {
  if (text == "csv") return EventFormat::kCsv;
  if (text == "jsonl") return EventFormat::kJsonl;
  throw Error(ErrorKind::kUnsupportedFormat, "unknown event format '" + text + "'");
}

const char* to_string(InputFormat fmt) {
  switch (fmt) {
    case InputFormat::kWav16: return "wav16";
    case InputFormat::kCsv: return "csv";
    case InputFormat::kRawF32: return "raw-f32";
  }
  return "?";
}

const char* to_string(EventFormat fmt) {
  return fmt == EventFormat::kCsv ? "csv" : "jsonl";
}

InputFormat input_format_from_path(const std::filesystem::path& path) {
  const std::string ext = lower_ext(path);
  if (ext == ".wav") return InputFormat::kWav16;
  if (ext == ".csv" || ext == ".txt") return InputFormat::kCsv;
  if (ext == ".f32" || ext == ".raw" || ext == ".bin") return InputFormat::kRawF32;
  throw Error(ErrorKind::kUnsupportedFormat,
              "cannot infer input format from '" + path.string() + "'");
}

EventFormat event_format_from_path(const std::filesystem::path& path) {
  const std::string ext = lower_ext(path);
  return ext == ".jsonl" || ext == ".json" ? EventFormat::kJsonl
                                           : EventFormat::kCsv;
}

Signal read_input(const std::filesystem::path& path, InputFormat fmt) {
  switch (fmt) {
    case InputFormat::kWav16: return read_wav16(path);
    case InputFormat::kCsv: return read_csv(path);
    case InputFormat::kRawF32: return read_raw_f32(path);
  }
  throw Error(ErrorKind::kUnsupportedFormat, "unknown input format");
}

void write_wav16(const std::filesystem::path& path, const WaveformXd& samples,
                 int sample_rate) {
  std::ofstream out = open_out(path);
  const auto n = static_cast<std::uint32_t>(samples.size());
  out.write("RIFF", 4);
  put32(out, 36 + n * 2);
  out.write("WAVEfmt ", 8);
  put32(out, 16);
  put16(out, 1);
  put16(out, 1);
  put32(out, static_cast<std::uint32_t>(sample_rate));
  put32(out, static_cast<std::uint32_t>(sample_rate) * 2);
  put16(out, 2);
  put16(out, 16);
  out.write("data", 4);
  put32(out, n * 2);
  for (Eigen::Index i = 0; i < samples.size(); ++i) {
    const double v = std::clamp(std::nearbyint(samples(i) * 32768.0), -32768.0, 32767.0);
    put16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(v)));
  }
  if (!out) throw Error(ErrorKind::kIoError, "write failed: " + path.string());
}

void write_raw_f32(const std::filesystem::path& path, const WaveformXd& samples) {
  std::ofstream out = open_out(path);
  for (Eigen::Index i = 0; i < samples.size(); ++i) {
    const float f = static_cast<float>(samples(i));
    std::uint32_t bits;
    std::memcpy(&bits, &f, 4);
    put32(out, bits);
  }
  if (!out) throw Error(ErrorKind::kIoError, "write failed: " + path.string());
}

void write_csv_samples(const std::filesystem::path& path,
                       const WaveformXd& samples) {
  std::ofstream out = open_out(path);
  char buf[32];
  for (Eigen::Index i = 0; i < samples.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g\n", samples(i));
    out << buf;
  }
  if (!out) throw Error(ErrorKind::kIoError, "write failed: " + path.string());
}

std::vector<Segment> segment_stream(const WaveformXd& samples, std::size_t width) {
  if (width < 1) throw Error(ErrorKind::kInvalidConfig, "width must be >= 1");
  const auto w = static_cast<Eigen::Index>(width);
  const Eigen::Index count = (samples.size() + w - 1) / w;
  std::vector<Segment> segments;
  segments.reserve(static_cast<std::size_t>(count));
  for (Eigen::Index i = 0; i < count; ++i) {
    Segment seg;
    seg.index = static_cast<std::size_t>(i);
    seg.samples = WaveformXd::Zero(w);
    const Eigen::Index n = std::min(w, samples.size() - i * w);
    seg.samples.head(n) = samples.segment(i * w, n);
    segments.push_back(std::move(seg));
  }
  return segments;
}

void write_events(std::ostream& os, const std::vector<SpikeEvent>& events,
                  const EventWriteOptions& opts) {
  if (opts.format == EventFormat::kCsv) {
    os << kEventCsvHeader;
    if (opts.with_raw_intensity) os << ",raw_intensity";
    os << '\n';
    char center[32];
    char raw[32];
    for (const auto& ev : events) {
      std::snprintf(center, sizeof center, "%#.6g", ev.center);
      os << ev.t << ',' << ev.channel << ',' << ev.m << ',' << ev.level << ','
         << center;
      if (opts.with_raw_intensity) {
        std::snprintf(raw, sizeof raw, "%.17g", ev.raw);
        os << ',' << raw;
      }
      os << '\n';
    }
    return;
  }
  for (const auto& ev : events) {
    nlohmann::ordered_json j;
    j["t_samples"] = ev.t;
    j["channel"] = ev.channel;
    j["kernel"] = ev.m;
    j["level"] = ev.level;
    j["intensity_center"] = ev.center;
    if (opts.with_raw_intensity) j["raw_intensity"] = ev.raw;
    os << j.dump() << '\n';
  }
}

void write_events(const std::filesystem::path& path,
                  const std::vector<SpikeEvent>& events,
                  const EventWriteOptions& opts) {
  std::ofstream out = open_out(path);
  write_events(out, events, opts);
  out.flush();
  if (!out) throw Error(ErrorKind::kIoError, "write failed: " + path.string());
}

std::vector<SpikeEvent> read_events(std::istream& is, EventFormat format) {
  std::vector<SpikeEvent> events;
  std::string line;
  if (format == EventFormat::kJsonl) {
    while (std::getline(is, line)) {
      if (line.empty()) continue;
      try {
        const auto j = nlohmann::json::parse(line);
        SpikeEvent ev;
        ev.t = j.at("t_samples").get<std::int64_t>();
        ev.channel = j.at("channel").get<std::size_t>();
        ev.m = j.at("kernel").get<std::size_t>();
        ev.level = j.at("level").get<std::size_t>();
        ev.center = j.at("intensity_center").get<double>();
        ev.raw = j.contains("raw_intensity") ? j["raw_intensity"].get<double>()
                                              : ev.center;
        events.push_back(ev);
      } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::kCorruptFile, std::string("bad event: ") + e.what());
      }
    }
    return events;
  }

  if (!std::getline(is, line) || line.rfind(kEventCsvHeader, 0) != 0) {
    throw Error(ErrorKind::kCorruptFile, "missing event CSV header");
  }
  const bool has_raw = line.find(",raw_intensity") != std::string::npos;
  std::vector<std::string> fields;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    fields.clear();
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (fields.size() != (has_raw ? 6u : 5u)) {
      throw Error(ErrorKind::kCorruptFile, "bad event line '" + line + "'");
    }
    SpikeEvent ev;
    ev.t = static_cast<std::int64_t>(parse_size(fields[0], "t_samples"));
    ev.channel = parse_size(fields[1], "channel");
    ev.m = parse_size(fields[2], "kernel");
    ev.level = parse_size(fields[3], "level");
    ev.center = parse_double(fields[4], "intensity_center");
    ev.raw = has_raw ? parse_double(fields[5], "raw_intensity") : ev.center;
    events.push_back(ev);
  }
  return events;
}

std::vector<SpikeEvent> read_events(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIoError, "cannot open " + path.string());
  return read_events(in, event_format_from_path(path));
}

}  // namespace spiketrum
