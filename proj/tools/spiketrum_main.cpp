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
// spiketrum command-line front end.
//
// Exit codes: 0 success, 2 configuration error, 3 I/O error, 4 numeric failure.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "spiketrum/decoder.hpp"
#include "spiketrum/dictionary.hpp"
#include "spiketrum/eval.hpp"
#include "spiketrum/io.hpp"
#include "spiketrum/pipeline.hpp"

namespace fs = std::filesystem;
using namespace spiketrum;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;
constexpr int kExitNumeric = 4;

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidConfig:
    case ErrorKind::kInvalidCenters:
    case ErrorKind::kLengthTooSmall:
      return kExitConfig;
    case ErrorKind::kIoError:
    case ErrorKind::kCorruptFile:
    case ErrorKind::kUnsupportedFormat:
      return kExitIo;
    default:
      return kExitNumeric;
  }
}

// Value flags shared by the subcommands; names double as config-file keys.
const std::vector<std::pair<std::string, std::string>> kValueFlags = {
    {"kernels", "number of gammatone kernels"},
    {"fs", "sample rate in Hz (overrides the wav header)"},
    {"fmin", "lowest kernel center frequency in Hz"},
    {"fmax", "highest kernel center frequency in Hz"},
    {"kernel-len", "kernel length in samples (default: width)"},
    {"width", "segment width W in samples"},
    {"k", "maximum codes per segment"},
    {"threshold", "halting threshold on |s|"},
    {"backend", "direct|spectral"},
    {"fixed", "fixed-point format B:F, e.g. 34:24"},
    {"select", "abs|signed"},
    {"itp", "log|linear nearest-center metric"},
    {"centers", "comma-separated channel center intensities"},
    {"input-format", "wav16|csv|raw-f32"},
    {"output-format", "csv|jsonl"},
    {"seed", "seed for synthetic data"},
    {"threads", "encoder worker threads"},
};
const std::vector<std::pair<std::string, std::string>> kBoolFlags = {
    {"quantized", "reconstruct from channel centers instead of raw intensities"},
    {"with-raw-intensity", "append the raw signed intensity to event files"},
};

struct CommonFlags {
  std::map<std::string, std::string> values;
  std::map<std::string, bool> bools;
  std::string config_path;
  CLI::App* app = nullptr;

  void attach(CLI::App* sub) {
    app = sub;
    sub->add_option("--config", config_path, "key=value config file (flags win)");
    for (const auto& [name, help] : kValueFlags) {
      sub->add_option("--" + name, values[name], help);
    }
    for (const auto& [name, help] : kBoolFlags) {
      sub->add_flag("--" + name, bools[name], help);
    }
  }

  // Config file first, then whatever was given on the command line.
  void resolve(RunConfig& cfg) const {
    if (!config_path.empty()) {
      for (const auto& [key, value] : read_config_file(config_path)) {
        if (!apply_config_entry(cfg, key, value)) {
          throw Error(ErrorKind::kInvalidConfig, "unknown config key '" + key + "'");
        }
      }
    }
    for (const auto& [name, help] : kValueFlags) {
      if (app->count("--" + name) > 0) apply_config_entry(cfg, name, values.at(name));
    }
    for (const auto& [name, help] : kBoolFlags) {
      if (app->count("--" + name) > 0) apply_config_entry(cfg, name, "true");
    }
  }
};

void print_bench(const BenchResult& r) {
  std::printf("bench corpus: %zu segments, W=%zu, %zu kernels, k=%zu\n",
              r.runs.empty() ? 0 : r.runs.front().segments, r.width, r.num_kernels,
              r.max_codes);
  std::printf("%-9s %-10s %8s %12s %14s %12s %14s\n", "backend", "arithmetic",
              "codes", "seconds", "s/segment", "codes/s", "segments/s");
  for (const auto& run : r.runs) {
    const std::string arith = run.fixed ? "fixed " + to_string(*run.fixed) : "float";
    std::printf("%-9s %-10s %8zu %12.6f %14.6e %12.2f %14.2f\n", to_string(run.backend),
                arith.c_str(), run.codes, run.seconds, run.seconds_per_segment,
                run.codes_per_second, run.segments_per_second);
  }
  std::printf("direct/spectral (m, tau) sequences identical: %s\n",
              r.backends_agree ? "yes" : "NO");
  std::printf(
      "context (FPGA at 200 MHz, not measured here): time-domain MACC design "
      "4.7 ms per spike generation, frequency-domain design 0.5 ms\n");
}

struct LabeledFile {
  fs::path path;
  std::string label;
};

std::vector<LabeledFile> read_labels(const fs::path& labels, const fs::path& dir) {
  std::ifstream in(labels);
  if (!in) throw Error(ErrorKind::kIoError, "cannot open " + labels.string());
  std::vector<LabeledFile> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto comma = line.rfind(',');
    if (comma == std::string::npos) {
      throw Error(ErrorKind::kCorruptFile, "label line needs 'file,label': " + line);
    }
    out.push_back({dir / line.substr(0, comma), line.substr(comma + 1)});
  }
  return out;
}

void print_scores(const char* title, const Prf1Report& report,
                  const std::vector<std::string>& names, double accuracy) {
  std::printf("%s: accuracy %.4f, macro P %.4f R %.4f F1 %.4f\n", title, accuracy,
              report.macro.precision, report.macro.recall, report.macro.f1);
  for (std::size_t c = 0; c < report.per_class.size(); ++c) {
    const auto& s = report.per_class[c];
    std::printf("  %-16s P %.4f R %.4f F1 %.4f\n", names[c].c_str(), s.precision,
                s.recall, s.f1);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spiketrum spike encoder: matching pursuit over gammatone kernels"};
  app.require_subcommand(1);

  RunConfig cfg;

  // encode
  CommonFlags encode_flags;
  auto* encode = app.add_subcommand("encode", "encode a signal into a spike event file");
  encode_flags.attach(encode);
  std::string encode_in, encode_out;
  encode->add_option("-i,--input", encode_in, "wav16, csv or raw-f32 signal")->required();
  encode->add_option("-o,--output", encode_out, "event file (.csv or .jsonl)")->required();

  // decode
  CommonFlags decode_flags;
  auto* decode = app.add_subcommand("decode", "reconstruct a waveform from events");
  decode_flags.attach(decode);
  std::string decode_in, decode_out, reference;
  std::size_t total_len = 0;
  decode->add_option("-i,--input", decode_in, "event file")->required();
  decode->add_option("-o,--output", decode_out, "waveform (.wav, .csv or raw-f32)");
  decode->add_option("--reference", reference, "original signal to score against");
  decode->add_option("--total-len", total_len, "output length in samples");

  // bench
  CommonFlags bench_flags;
  auto* bench = app.add_subcommand("bench", "time both backends and arithmetic modes");
  bench_flags.attach(bench);
  std::size_t bench_segments = 10;
  bench->add_option("--segments", bench_segments, "synthetic corpus length");

  // eval
  CommonFlags eval_flags;
  auto* eval = app.add_subcommand("eval", "temporal-average features + MLP classifier");
  eval_flags.attach(eval);
  std::string features_dir, labels_path, model_out, lr_decay = "0.9@50";
  std::size_t epochs = 400, batch = 64;
  double lr = 1e-3, holdout = 0.0;
  std::int64_t bin = 0, duration = 0;
  bool counts = false;
  eval->add_option("--features-from", features_dir, "directory of event files")->required();
  eval->add_option("--labels", labels_path, "lines of 'event_file,label'")->required();
  eval->add_option("--epochs", epochs, "training epochs");
  eval->add_option("--batch", batch, "mini-batch size");
  eval->add_option("--lr", lr, "initial learning rate");
  eval->add_option("--lr-decay", lr_decay, "FACTOR@EPOCHS step decay");
  eval->add_option("--bin", bin, "averaging bin in samples (default: width)");
  eval->add_option("--duration", duration, "recording length in samples (default: per file)");
  eval->add_option("--holdout", holdout, "fraction of files held out for testing");
  eval->add_option("--model-out", model_out, "write the trained weights here");
  eval->add_flag("--counts", counts, "mean spike counts per bin instead of binary activity");

  // dict-dump
  CommonFlags dump_flags;
  auto* dump = app.add_subcommand("dict-dump", "write the kernel dictionary as CSV");
  dump_flags.attach(dump);
  std::string dump_out;
  dump->add_option("-o,--output", dump_out, "CSV path (stdout when omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*encode) {
      encode_flags.resolve(cfg);
      cfg.input = encode_in;
      cfg.output = encode_out;
      const EncodeSummary s = run_encode(cfg);
      std::fprintf(stderr,
                   "encoded %zu samples @ %.0f Hz: %zu segments, %zu codes, %zu events"
                   " (%.1f spikes/s)\n",
                   s.samples, s.sample_rate, s.segments, s.codes, s.events,
                   s.segments ? s.codes * s.sample_rate / (s.segments * double(cfg.encoder.width)) : 0.0);
      if (s.saturations) std::fprintf(stderr, "fixed-point saturations: %zu\n", s.saturations);
    } else if (*decode) {
      decode_flags.resolve(cfg);
      cfg.input = decode_in;
      cfg.output = decode_out;
      std::optional<fs::path> ref;
      if (!reference.empty()) ref = reference;
      std::optional<std::size_t> len;
      if (decode->count("--total-len")) len = total_len;
      const DecodeSummary s = run_decode(cfg, ref, len);
      std::printf("decoded %zu events into %zu samples\n", s.events, s.samples);
      if (s.report) {
        if (std::isinf(s.report->snr_db)) {
          std::printf("l2_error %.9g snr_db inf\n", s.report->l2_error);
        } else {
          std::printf("l2_error %.9g snr_db %.4f\n", s.report->l2_error, s.report->snr_db);
        }
      }
    } else if (*bench) {
      bench_flags.resolve(cfg);
      print_bench(run_bench(cfg, bench_segments));
    } else if (*dump) {
      dump_flags.resolve(cfg);
      const Dictionary dict = build_dictionary(
          dictionary_config(cfg, cfg.sample_rate.value_or(kDefaultSampleRate)));
      if (dump_out.empty()) {
        write_dictionary_csv(std::cout, dict);
      } else {
        std::ofstream out(dump_out, std::ios::trunc);
        if (!out) throw Error(ErrorKind::kIoError, "cannot write " + dump_out);
        write_dictionary_csv(out, dict);
      }
    } else if (*eval) {
      eval_flags.resolve(cfg);
      MlpTrainConfig tc;
      tc.epochs = epochs;
      tc.batch = batch;
      tc.learning_rate = lr;
      tc.seed = cfg.seed;
      const auto at = lr_decay.find('@');
      if (at == std::string::npos) {
        throw Error(ErrorKind::kInvalidConfig, "--lr-decay expects FACTOR@EPOCHS");
      }
      try {
        tc.decay_factor = std::stod(lr_decay.substr(0, at));
        tc.decay_every = std::stoul(lr_decay.substr(at + 1));
      } catch (const std::exception&) {
        throw Error(ErrorKind::kInvalidConfig, "bad --lr-decay '" + lr_decay + "'");
      }
      if (!(holdout >= 0.0 && holdout < 1.0)) {
        throw Error(ErrorKind::kInvalidConfig, "--holdout must be in [0, 1)");
      }

      const ChannelTable table(cfg.num_kernels, cfg.centers, cfg.itp);
      const auto files = read_labels(labels_path, features_dir);
      std::set<std::string> label_set;
      for (const auto& f : files) label_set.insert(f.label);
      const std::vector<std::string> names(label_set.begin(), label_set.end());

      const std::int64_t w = static_cast<std::int64_t>(cfg.encoder.width);
      std::vector<FeatureVector> features;
      std::vector<int> labels;
      for (const auto& f : files) {
        const auto events = read_events(f.path);
        std::int64_t len = duration;
        if (len <= 0) {
          std::int64_t last = 0;
          for (const auto& ev : events) last = std::max(last, ev.t + 1);
          len = std::max<std::int64_t>(w, (last + w - 1) / w * w);
        }
        features.push_back(temporal_average(events, len, bin > 0 ? bin : w, table,
                                            counts ? ActivityMode::kCounts
                                                   : ActivityMode::kBinary));
        labels.push_back(static_cast<int>(
            std::lower_bound(names.begin(), names.end(), f.label) - names.begin()));
      }

      // Every n-th file goes to the holdout set so the split is reproducible.
      std::vector<FeatureVector> train_x, test_x;
      std::vector<int> train_y, test_y;
      const std::size_t stride =
          holdout > 0.0 ? std::max<std::size_t>(2, std::size_t(std::lround(1.0 / holdout))) : 0;
      for (std::size_t i = 0; i < features.size(); ++i) {
        const bool test = stride > 0 && i % stride == stride - 1;
        (test ? test_x : train_x).push_back(features[i]);
        (test ? test_y : train_y).push_back(labels[i]);
      }

      const MlpTrainResult trained = mlp_train(train_x, train_y, names.size(), tc);
      std::printf("mlp widths:");
      for (auto wd : trained.model.widths()) std::printf(" %zu", wd);
      std::printf(", %zu MACs per inference, final loss %.6f\n", mac_count(trained.model),
                  trained.epoch_loss.empty() ? 0.0 : trained.epoch_loss.back());

      auto score = [&](const char* title, const std::vector<FeatureVector>& x,
                       const std::vector<int>& y) {
        if (x.empty()) return;
        const auto pred = mlp_predict(trained.model, x);
        std::size_t hits = 0;
        for (std::size_t i = 0; i < y.size(); ++i) hits += pred[i] == y[i];
        print_scores(title, prf1(confusion_counts(y, pred, names.size())), names,
                     double(hits) / double(y.size()));
      };
      score("train", train_x, train_y);
      score("holdout", test_x, test_y);
      if (!model_out.empty()) save_mlp(model_out, trained.model);
    }
  } catch (const Error& e) {
    std::fprintf(stderr, "spiketrum: %s\n", e.what());
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "spiketrum: %s\n", e.what());
    return kExitNumeric;
  }
  return kExitOk;
}
