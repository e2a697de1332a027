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
#include "spiketrum/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <future>
#include <numbers>
#include <random>
#include <sstream>

namespace spiketrum {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  T out{};
  const char* end = value.data() + value.size();
  auto [p, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || p != end) {
    throw Error(ErrorKind::kInvalidConfig,
                "bad value '" + value + "' for " + key);
  }
  return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "1" || value == "true" || value == "yes" || value == "on") return true;
  if (value == "0" || value == "false" || value == "no" || value == "off") return false;
  throw Error(ErrorKind::kInvalidConfig, "bad boolean '" + value + "' for " + key);
}

double standard_normal(std::mt19937_64& rng) {
  // Box-Muller on our own uniforms keeps the corpus identical across stdlibs.
  auto uniform = [&] { return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53; };
  const double u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

using Clock = std::chrono::steady_clock;

}  // namespace

std::map<std::string, std::string> read_config_file(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIoError, "cannot open config " + path.string());
  std::map<std::string, std::string> entries;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorKind::kInvalidConfig,
                  path.string() + ":" + std::to_string(lineno) + ": expected key=value");
    }
    std::string key = trim(line.substr(0, eq));
    if (key.rfind("--", 0) == 0) key.erase(0, 2);
    entries[key] = trim(line.substr(eq + 1));
  }
  return entries;
}

std::vector<double> parse_centers(const std::string& text) {
  std::vector<double> centers;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ',')) {
    centers.push_back(parse_number<double>("centers", trim(part)));
  }
  return centers;
}

bool apply_config_entry(RunConfig& cfg, const std::string& key,
                        const std::string& value) {
  if (key == "input") cfg.input = value;
  else if (key == "output") cfg.output = value;
  else if (key == "input-format") cfg.input_format = parse_input_format(value);
  else if (key == "output-format") cfg.output_format = parse_event_format(value);
  else if (key == "fs") cfg.sample_rate = parse_number<double>(key, value);
  else if (key == "kernels") cfg.num_kernels = parse_number<std::size_t>(key, value);
  else if (key == "fmin") cfg.freq_lo = parse_number<double>(key, value);
  else if (key == "fmax") cfg.freq_hi = parse_number<double>(key, value);
  else if (key == "kernel-len") cfg.kernel_len = parse_number<std::size_t>(key, value);
  else if (key == "width") cfg.encoder.width = parse_number<std::size_t>(key, value);
  else if (key == "k") cfg.encoder.max_codes = parse_number<std::size_t>(key, value);
  else if (key == "threshold") cfg.encoder.halt_threshold = parse_number<double>(key, value);
  else if (key == "backend") cfg.encoder.backend = parse_backend(value);
  else if (key == "select") cfg.encoder.select = parse_select_rule(value);
  else if (key == "fixed") {
    if (value.empty() || value == "off" || value == "none") cfg.encoder.fixed.reset();
    else cfg.encoder.fixed = parse_fixed_format(value);
  }
  else if (key == "itp") cfg.itp = parse_itp_metric(value);
  else if (key == "centers") cfg.centers = parse_centers(value);
  else if (key == "with-raw-intensity") cfg.with_raw_intensity = parse_bool(key, value);
  else if (key == "quantized") cfg.quantized = parse_bool(key, value);
  else if (key == "seed") cfg.seed = parse_number<std::uint64_t>(key, value);
  else if (key == "threads") cfg.threads = parse_number<std::size_t>(key, value);
  else return false;
  return true;
}

DictionaryConfig dictionary_config(const RunConfig& cfg, double sample_rate) {
  DictionaryConfig dc;
  dc.num_kernels = cfg.num_kernels;
  dc.sample_rate = sample_rate;
  dc.freq_lo = cfg.freq_lo;
  dc.freq_hi = cfg.freq_hi;
  dc.kernel_len = cfg.kernel_len.value_or(cfg.encoder.width);
  return dc;
}

SignalEncoding encode_signal(const WaveformXd& samples, const Dictionary& dict,
                             const SpectralDictionary* sdict,
                             const EncoderConfig& cfg, std::size_t threads) {
  cfg.validate();
  const std::vector<Segment> segments = segment_stream(samples, cfg.width);
  SignalEncoding out;
  out.codesets.resize(segments.size());
  std::vector<std::size_t> saturations(segments.size(), 0);

  auto encode_one = [&](std::size_t i) {
    SegmentEncoding enc = encode_segment_traced(segments[i], dict, sdict, cfg);
    out.codesets[i] = std::move(enc.codes);
    saturations[i] = enc.saturations;
  };

  const std::size_t workers = std::max<std::size_t>(1, std::min(threads, segments.size()));
  if (workers <= 1) {
    for (std::size_t i = 0; i < segments.size(); ++i) encode_one(i);
  } else {
    // Strided assignment; each worker writes only its own slots.
    std::vector<std::future<void>> jobs;
    for (std::size_t w = 0; w < workers; ++w) {
      jobs.push_back(std::async(std::launch::async, [&, w] {
        for (std::size_t i = w; i < segments.size(); i += workers) encode_one(i);
      }));
    }
    for (auto& job : jobs) job.get();
  }
  for (auto s : saturations) out.saturations += s;
  return out;
}

EncodeSummary run_encode(const RunConfig& cfg) {
  const InputFormat in_fmt =
      cfg.input_format.value_or(input_format_from_path(cfg.input));
  const Signal signal = read_input(cfg.input, in_fmt);
  const double fs =
      cfg.sample_rate.value_or(signal.sample_rate.value_or(kDefaultSampleRate));

  const Dictionary dict = build_dictionary(dictionary_config(cfg, fs));
  std::optional<SpectralDictionary> sdict;
  if (cfg.encoder.backend == Backend::kSpectral) {
    sdict = kernel_spectra(dict, default_fft_len(cfg.encoder.width, dict.kernel_len()),
                           cfg.encoder.width);
  }
  const ChannelTable table(dict.size(), cfg.centers, cfg.itp);

  const SignalEncoding enc = encode_signal(
      signal.samples, dict, sdict ? &*sdict : nullptr, cfg.encoder, cfg.threads);
  const std::vector<SpikeEvent> events =
      emit_stream(enc.codesets, table, cfg.encoder.width);

  EventWriteOptions opts;
  opts.format = cfg.output_format.value_or(event_format_from_path(cfg.output));
  opts.with_raw_intensity = cfg.with_raw_intensity;
  write_events(cfg.output, events, opts);

  EncodeSummary summary;
  summary.sample_rate = fs;
  summary.samples = static_cast<std::size_t>(signal.samples.size());
  summary.segments = enc.codesets.size();
  for (const auto& set : enc.codesets) summary.codes += set.size();
  summary.events = events.size();
  summary.saturations = enc.saturations;
  return summary;
}

DecodeSummary run_decode(const RunConfig& cfg,
                         const std::optional<std::filesystem::path>& reference,
                         std::optional<std::size_t> total_len) {
  const std::vector<SpikeEvent> events = read_events(cfg.input);
  const std::size_t width = cfg.encoder.width;

  std::optional<Signal> ref;
  if (reference) {
    ref = read_input(*reference, cfg.input_format.value_or(
                                     input_format_from_path(*reference)));
  }
  const double fs = cfg.sample_rate.value_or(
      ref && ref->sample_rate ? *ref->sample_rate : kDefaultSampleRate);
  const Dictionary dict = build_dictionary(dictionary_config(cfg, fs));

  std::vector<CodeSet> codesets =
      codesets_from_events(events, width, /*use_raw=*/!cfg.quantized);
  std::size_t segments = codesets.empty() ? 0 : codesets.back().segment_index + 1;
  if (ref) {
    segments = std::max<std::size_t>(
        segments, (std::size_t(ref->samples.size()) + width - 1) / width);
  }
  const std::size_t padded = segments * width;
  const std::size_t length = total_len.value_or(
      ref ? std::size_t(ref->samples.size()) : padded);

  WaveformXd x_hat = reconstruct(codesets, dict, width, std::max(padded, length));
  x_hat.conservativeResize(static_cast<Eigen::Index>(length));

  DecodeSummary summary;
  summary.events = events.size();
  summary.samples = length;
  if (ref) {
    summary.report = reconstruction_error(ref->samples, x_hat);
    summary.report->codes_used = events.size();
  }

  if (!cfg.output.empty()) {
    const std::string ext = cfg.output.extension().string();
    if (ext == ".wav") {
      write_wav16(cfg.output, x_hat, static_cast<int>(std::lround(fs)));
    } else if (ext == ".csv" || ext == ".txt") {
      write_csv_samples(cfg.output, x_hat);
    } else {
      write_raw_f32(cfg.output, x_hat);
    }
  }
  return summary;
}

WaveformXd synthetic_corpus(const Dictionary& dict, std::size_t width,
                            std::size_t segments, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const auto w = static_cast<Eigen::Index>(width);
  WaveformXd out = WaveformXd::Zero(w * Eigen::Index(segments));
  const int half = half_width(width);
  for (std::size_t s = 0; s < segments; ++s) {
    auto seg = out.segment(Eigen::Index(s) * w, w);
    for (Eigen::Index t = 0; t < w; ++t) seg(t) = 0.02 * standard_normal(rng);
    for (int i = 0; i < 4; ++i) {
      const auto m = static_cast<std::size_t>(rng() % dict.size());
      const int tau = static_cast<int>(rng() % std::uint64_t(2 * half + 1)) - half;
      const double amp = 0.2 + 0.8 * standard_normal(rng);
      seg += amp * shift_kernel(dict.kernel(m).transpose(), tau, width);
    }
  }
  return out;
}

BenchResult run_bench(const RunConfig& cfg, std::size_t segments) {
  const double fs = cfg.sample_rate.value_or(kDefaultSampleRate);
  const Dictionary dict = build_dictionary(dictionary_config(cfg, fs));
  const std::size_t width = cfg.encoder.width;
  const SpectralDictionary sdict =
      kernel_spectra(dict, default_fft_len(width, dict.kernel_len()), width);
  const WaveformXd corpus = synthetic_corpus(dict, width, segments, cfg.seed);

  BenchResult result;
  result.width = width;
  result.num_kernels = dict.size();
  result.max_codes = cfg.encoder.max_codes;

  const FixedFormat fixed = cfg.encoder.fixed.value_or(FixedFormat{});
  std::vector<std::vector<CodeSet>> float_codes;
  for (Backend backend : {Backend::kDirect, Backend::kSpectral}) {
    for (bool use_fixed : {false, true}) {
      EncoderConfig ec = cfg.encoder;
      ec.backend = backend;
      ec.fixed = use_fixed ? std::optional<FixedFormat>(fixed) : std::nullopt;

      const auto start = Clock::now();
      SignalEncoding enc = encode_signal(corpus, dict, &sdict, ec, 1);
      const double secs = std::chrono::duration<double>(Clock::now() - start).count();

      BenchReport r;
      r.backend = backend;
      r.fixed = ec.fixed;
      r.segments = enc.codesets.size();
      for (const auto& set : enc.codesets) r.codes += set.size();
      r.seconds = std::max(secs, 1e-9);
      r.seconds_per_segment = r.seconds / static_cast<double>(std::max<std::size_t>(1, r.segments));
      r.codes_per_second = static_cast<double>(r.codes) / r.seconds;
      r.segments_per_second = static_cast<double>(r.segments) / r.seconds;
      result.runs.push_back(r);
      if (!use_fixed) float_codes.push_back(std::move(enc.codesets));
    }
  }

  result.backends_agree = float_codes[0].size() == float_codes[1].size();
  for (std::size_t s = 0; result.backends_agree && s < float_codes[0].size(); ++s) {
    const auto& a = float_codes[0][s].codes;
    const auto& b = float_codes[1][s].codes;
    if (a.size() != b.size()) {
      result.backends_agree = false;
      break;
    }
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (a[i].m != b[i].m || a[i].tau != b[i].tau) {
        result.backends_agree = false;
        break;
      }
    }
  }
  return result;
}

}  // namespace spiketrum
