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
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>

#include <sys/wait.h>

#include <gtest/gtest.h>

#include "spiketrum/pipeline.hpp"
#include "test_support.hpp"

namespace spiketrum {
namespace {

namespace fs = std::filesystem;
using testing::expect_kind;

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "spiketrum_test_pipeline";
  fs::create_directories(dir);
  return dir / name;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

int cli(const std::string& args) {
  const int status = std::system((std::string(SPIKETRUM_CLI) + " " + args + " >/dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

const std::string kPluck = std::string(SPIKETRUM_TEST_DATA) + "/pluck.wav";

TEST(Config, FileParsingAndEntries) {
  const fs::path p = scratch("run.cfg");
  std::ofstream(p) << "# comment\nkernels = 12\n--width=512\n\nbackend=spectral  # trailing\n";
  const auto entries = read_config_file(p);
  ASSERT_EQ(entries.size(), 3u);
  RunConfig cfg;
  for (const auto& [k, v] : entries) EXPECT_TRUE(apply_config_entry(cfg, k, v));
  EXPECT_EQ(cfg.num_kernels, 12u);
  EXPECT_EQ(cfg.encoder.width, 512u);
  EXPECT_EQ(cfg.encoder.backend, Backend::kSpectral);

  EXPECT_FALSE(apply_config_entry(cfg, "colour", "blue"));
  expect_kind(ErrorKind::kInvalidConfig, [&] { apply_config_entry(cfg, "k", "many"); });
  expect_kind(ErrorKind::kInvalidConfig, [&] { apply_config_entry(cfg, "quantized", "maybe"); });
  EXPECT_TRUE(apply_config_entry(cfg, "fixed", "40:30"));
  EXPECT_EQ(cfg.encoder.fixed->frac_bits, 30);
  EXPECT_TRUE(apply_config_entry(cfg, "fixed", "off"));
  EXPECT_FALSE(cfg.encoder.fixed.has_value());
  EXPECT_EQ(parse_centers("0.1, 1,10"), (std::vector<double>{0.1, 1.0, 10.0}));

  std::ofstream(scratch("bad.cfg")) << "kernels 12\n";
  expect_kind(ErrorKind::kInvalidConfig, [&] { read_config_file(scratch("bad.cfg")); });
}

TEST(EncodeSignal, ThreadCountDoesNotChangeOutput) {
  RunConfig cfg;
  cfg.encoder.width = 128;
  cfg.encoder.max_codes = 5;
  cfg.num_kernels = 6;
  const Dictionary dict = build_dictionary(dictionary_config(cfg, 16000.0));
  const WaveformXd x = synthetic_corpus(dict, 128, 9, 3);
  EXPECT_EQ(x, synthetic_corpus(dict, 128, 9, 3));
  const SignalEncoding one = encode_signal(x, dict, nullptr, cfg.encoder, 1);
  const SignalEncoding four = encode_signal(x, dict, nullptr, cfg.encoder, 4);
  ASSERT_EQ(one.codesets.size(), 9u);
  for (std::size_t i = 0; i < 9; ++i) {
    EXPECT_EQ(one.codesets[i].segment_index, i);
    EXPECT_EQ(one.codesets[i].codes, four.codesets[i].codes);
  }
}

TEST(Pipeline, EncodeDecodeImprovesWithBudget) {
  RunConfig cfg;
  cfg.input = kPluck;
  cfg.freq_hi = 5000.0;
  cfg.encoder.backend = Backend::kSpectral;
  cfg.with_raw_intensity = true;
  double prev_err = 1e300;
  for (std::size_t k : {2u, 16u, 128u}) {
    cfg.encoder.max_codes = k;
    cfg.output = scratch("pluck_events.csv");
    const EncodeSummary enc = run_encode(cfg);
    EXPECT_EQ(enc.samples, 3307u);
    EXPECT_EQ(enc.segments, 2u);
    EXPECT_EQ(enc.events, enc.codes);

    RunConfig dec = cfg;
    dec.input = cfg.output;
    dec.output = scratch("pluck_rec.wav");
    dec.sample_rate = 11025.0;
    const DecodeSummary d = run_decode(dec, fs::path(kPluck));
    ASSERT_TRUE(d.report.has_value());
    EXPECT_EQ(d.samples, 3307u);
    EXPECT_LT(d.report->l2_error, prev_err);
    prev_err = d.report->l2_error;
  }
}

TEST(Cli, EncodeIsByteDeterministicAcrossThreads) {
  const std::string base = "encode -i " + kPluck + " --fmax 5000 --k 12 --with-raw-intensity ";
  ASSERT_EQ(cli(base + "-o " + scratch("a.jsonl").string()), 0);
  ASSERT_EQ(cli(base + "-o " + scratch("b.jsonl").string() + " --threads 3"), 0);
  const std::string a = slurp(scratch("a.jsonl"));
  EXPECT_FALSE(a.empty());
  EXPECT_EQ(a, slurp(scratch("b.jsonl")));
}

TEST(Cli, FlagsOverrideConfigFile) {
  const fs::path conf = scratch("cli.cfg");
  std::ofstream(conf) << "k=2\nfmax=5000\nwith-raw-intensity=true\n";
  ASSERT_EQ(cli("encode -i " + kPluck + " -o " + scratch("c1.csv").string() + " --config " +
                conf.string()),
            0);
  ASSERT_EQ(cli("encode -i " + kPluck + " -o " + scratch("c2.csv").string() + " --config " +
                conf.string() + " --k 5"),
            0);
  EXPECT_EQ(read_events(scratch("c1.csv")).size(), 4u);   // 2 segments x 2 codes
  EXPECT_EQ(read_events(scratch("c2.csv")).size(), 10u);  // 2 segments x 5 codes
  EXPECT_NE(slurp(scratch("c1.csv")).find("raw_intensity"), std::string::npos);
}

TEST(Cli, ExitCodes) {
  const std::string out = " -o " + scratch("x.csv").string();
  EXPECT_EQ(cli("encode -i " + kPluck + out + " --fmax 5000"), 0);
  EXPECT_EQ(cli("encode -i " + kPluck + out), 2);  // default fmax above Nyquist at 11025 Hz
  EXPECT_EQ(cli("encode -i " + kPluck + out + " --fmax 5000 --backend fft"), 2);
  EXPECT_EQ(cli("encode -i " + kPluck + out + " --fmax 5000 --fixed 34"), 2);
  EXPECT_EQ(cli("encode --bogus"), 2);
  EXPECT_EQ(cli("encode -i /nonexistent.wav" + out), 3);
  std::ofstream(scratch("broken.csv")) << "not,an,event,file\n";
  EXPECT_EQ(cli("decode -i " + scratch("broken.csv").string() + " -o " + scratch("y.wav").string()), 3);
  EXPECT_EQ(cli("dict-dump --kernels 4 --width 32 -o " + scratch("dict.csv").string()), 0);
  EXPECT_NE(slurp(scratch("dict.csv")).find("kernel_index,center_freq_hz"), std::string::npos);
}

TEST(Cli, EvalTrainsOnEventFiles) {
  // Two classes of event files: spikes on low vs high channels.
  const fs::path dir = scratch("eval");
  fs::create_directories(dir);
  std::ofstream labels(dir / "labels.txt");
  for (int i = 0; i < 12; ++i) {
    const std::string name = "f" + std::to_string(i) + ".csv";
    std::ofstream ev(dir / name);
    ev << "t_samples,channel,kernel,level,intensity_center\n";
    for (int j = 0; j < 10; ++j) {
      const int m = (i % 2 ? 30 : 3) + (i + j) % 5;
      ev << j * 300 << ',' << m * 3 + 1 << ',' << m << ",1,0.411500\n";
    }
    labels << name << ',' << (i % 2 ? "high" : "low") << '\n';
  }
  labels.close();
  EXPECT_EQ(cli("eval --features-from " + dir.string() + " --labels " +
                (dir / "labels.txt").string() + " --epochs 50 --lr 0.05 --batch 4 --model-out " +
                (dir / "model.txt").string()),
            0);
  EXPECT_TRUE(fs::exists(dir / "model.txt"));
}

TEST(Cli, BenchReportsBothBackends) {
  const fs::path out = scratch("bench.txt");
  const int status = std::system((std::string(SPIKETRUM_CLI) +
                                  " bench --width 128 --kernels 4 --k 4 --segments 3 > " +
                                  out.string()).c_str());
  ASSERT_EQ(WEXITSTATUS(status), 0);
  const std::string text = slurp(out);
  EXPECT_NE(text.find("direct    float"), std::string::npos);
  EXPECT_NE(text.find("spectral  float"), std::string::npos);
  EXPECT_NE(text.find("identical: yes"), std::string::npos);
}

}  // namespace
}  // namespace spiketrum
