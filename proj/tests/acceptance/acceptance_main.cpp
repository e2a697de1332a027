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
// Acceptance suite: one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "spiketrum/decoder.hpp"
#include "spiketrum/dictionary.hpp"
#include "spiketrum/encoder.hpp"
#include "spiketrum/eval.hpp"
#include "spiketrum/fixed_point.hpp"
#include "spiketrum/io.hpp"
#include "spiketrum/spike_coder.hpp"

namespace fs = std::filesystem;
using namespace spiketrum;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

Dictionary make_dict(std::size_t kernels, std::size_t width, double fs = 16000.0,
                     double fmax = 8000.0) {
  DictionaryConfig dc;
  dc.num_kernels = kernels;
  dc.kernel_len = width;
  dc.sample_rate = fs;
  dc.freq_hi = fmax;
  return build_dictionary(dc);
}

EncoderConfig make_cfg(std::size_t width, std::size_t k, Backend backend) {
  EncoderConfig cfg;
  cfg.width = width;
  cfg.max_codes = k;
  cfg.backend = backend;
  return cfg;
}

WaveformXd noise(std::mt19937_64& rng, std::size_t n, double sigma) {
  std::normal_distribution<double> dist(0.0, sigma);
  WaveformXd x(static_cast<Eigen::Index>(n));
  for (auto& v : x) v = dist(rng);
  return x;
}

// Oracle: shifted kernel written out index by index.
WaveformXd placed(const Dictionary& dict, std::size_t m, int tau, std::size_t w) {
  WaveformXd out = WaveformXd::Zero(Eigen::Index(w));
  const auto len = static_cast<long>(dict.kernel_len());
  for (long t = 0; t < long(w); ++t) {
    const long src = t - tau;
    if (src >= 0 && src < len) out(t) = dict.kernels()(Eigen::Index(m), src);
  }
  return out;
}

bool in_support(const Dictionary& dict, std::size_t m, int tau, std::size_t w) {
  return placed(dict, m, tau, w).squaredNorm() >= 1.0 - 1e-12;
}

// ---------------------------------------------------------------------------

Outcome kernel_recovery() {
  const std::size_t w = 2048;
  const Dictionary dict = make_dict(40, w);
  const EncoderConfig cfg = make_cfg(w, 1, Backend::kDirect);
  std::mt19937_64 rng(101);
  std::uniform_int_distribution<std::size_t> pick_m(0, 39);
  std::uniform_int_distribution<int> pick_tau(-half_width(w), half_width(w));
  std::uniform_real_distribution<double> pick_mag(0.05, 5.0);
  int ok = 0;
  double worst_s = 0.0, worst_energy = 0.0;
  for (int c = 0; c < 50; ++c) {
    std::size_t m;
    int tau;
    do {
      m = pick_m(rng);
      tau = pick_tau(rng);
    } while (!in_support(dict, m, tau, w));
    const double s = (rng() & 1 ? 1.0 : -1.0) * pick_mag(rng);
    Segment seg{s * placed(dict, m, tau, w), 0};
    const SegmentEncoding enc = encode_segment_traced(seg, dict, nullptr, cfg);
    const Code& got = enc.codes.codes.at(0);
    const double rel_s = std::abs(got.s - s) / std::abs(s);
    const double energy = enc.residual.squaredNorm() / seg.samples.squaredNorm();
    worst_s = std::max(worst_s, rel_s);
    worst_energy = std::max(worst_energy, energy);
    if (got.m == m && got.tau == tau && rel_s <= 1e-6 && energy < 1e-10) ++ok;
  }
  char buf[160];
  std::snprintf(buf, sizeof buf, "%d/50 exact (m, tau); max rel |s| err %.2e; max residual ratio %.2e",
                ok, worst_s, worst_energy);
  return {ok == 50, buf};
}

Outcome backend_equivalence() {
  const std::size_t w = 256;
  const Dictionary dict = make_dict(8, w);
  const SpectralDictionary sdict =
      kernel_spectra(dict, default_fft_len(w, dict.kernel_len()), w);
  std::mt19937_64 rng(202);
  int ok = 0;
  double worst = 0.0;
  for (int c = 0; c < 100; ++c) {
    Segment seg{noise(rng, w, 1.0), std::size_t(c)};
    const CodeSet a = encode_segment(seg, dict, nullptr, make_cfg(w, 8, Backend::kDirect));
    const CodeSet b = encode_segment(seg, dict, &sdict, make_cfg(w, 8, Backend::kSpectral));
    bool same = a.size() == b.size() && a.size() == 8;
    for (std::size_t i = 0; same && i < a.size(); ++i) {
      const auto& x = a.codes[i];
      const auto& y = b.codes[i];
      const double rel = std::abs(std::abs(x.s) - std::abs(y.s)) / std::abs(x.s);
      worst = std::max(worst, rel);
      same = x.m == y.m && x.tau == y.tau && rel <= 1e-6;
    }
    ok += same;
  }
  char buf[128];
  std::snprintf(buf, sizeof buf, "%d/100 identical sequences; max rel |s| diff %.2e", ok, worst);
  return {ok == 100, buf};
}

Outcome energy_monotonicity() {
  const std::size_t w = 2048;
  const Dictionary dict = make_dict(40, w);
  const SpectralDictionary sdict =
      kernel_spectra(dict, default_fft_len(w, dict.kernel_len()), w);
  std::mt19937_64 rng(303);
  int energy_ok = 0, greedy_ok = 0;
  for (int c = 0; c < 20; ++c) {
    Segment seg{noise(rng, w, 0.1), std::size_t(c)};
    const SegmentEncoding enc =
        encode_segment_traced(seg, dict, &sdict, make_cfg(w, 16, Backend::kSpectral));
    // Recompute residual energies with the oracle rather than trusting the trace.
    WaveformXd r = seg.samples;
    bool dec = true, greedy = true;
    double prev_energy = r.squaredNorm();
    for (std::size_t i = 0; i < enc.codes.size(); ++i) {
      const Code& code = enc.codes.codes[i];
      r -= code.s * placed(dict, code.m, code.tau, w);
      const double e = r.squaredNorm();
      dec = dec && e < prev_energy;
      prev_energy = e;
      if (i > 0) greedy = greedy && std::abs(code.s) <= std::abs(enc.codes.codes[i - 1].s);
    }
    energy_ok += dec && enc.codes.size() == 16;
    greedy_ok += greedy;
  }
  char buf[128];
  std::snprintf(buf, sizeof buf, "strictly decreasing energy %d/20; non-increasing |s| %d/20",
                energy_ok, greedy_ok);
  return {energy_ok == 20 && greedy_ok == 20, buf};
}

Outcome itp_equivalence() {
  const std::vector<double> centers{0.0065, 0.4115, 25.8744};
  const ChannelTable table(40, centers, ItpMetric::kLog);
  int ok = 0;
  for (int i = 0; i < 1000; ++i) {
    const double x = std::pow(10.0, -4.0 + 7.0 * i / 999.0);
    std::size_t best = 0;
    double best_d = std::abs(std::log(x) - std::log(centers[0]));
    for (std::size_t l = 1; l < centers.size(); ++l) {
      const double d = std::abs(std::log(x) - std::log(centers[l]));
      if (d < best_d) {
        best_d = d;
        best = l;
      }
    }
    ok += table.level_of(x) == best && table.level_of(-x) == best;
  }
  char buf[96];
  std::snprintf(buf, sizeof buf, "%d/1000 levels match; channels = %zu", ok, table.channels());
  return {ok == 1000 && table.channels() == 120, buf};
}

// Brute-force margin between the best and second-best |correlation|.
double selection_margin(const WaveformXd& r, const Dictionary& dict, std::size_t w) {
  double first = -1.0, second = -1.0;
  const int h = half_width(w);
  for (std::size_t m = 0; m < dict.size(); ++m) {
    for (int tau = -h; tau <= h; ++tau) {
      const double v = std::abs(r.dot(placed(dict, m, tau, w)));
      if (v > first) {
        second = first;
        first = v;
      } else if (v > second) {
        second = v;
      }
    }
  }
  return first - second;
}

Outcome fixed_fidelity() {
  const std::size_t w = 256;
  const Dictionary dict = make_dict(8, w);
  const FixedFormat fmt = parse_fixed_format("34:24");
  const double margin = 1e-4;
  std::mt19937_64 rng(505);
  int kept = 0, ok = 0, tried = 0;
  while (kept < 50 && tried < 5000) {
    ++tried;
    Segment seg{noise(rng, w, 0.3), std::size_t(tried)};
    const CodeSet ref = encode_segment(seg, dict, nullptr, make_cfg(w, 8, Backend::kDirect));
    WaveformXd r = seg.samples;
    bool separated = true;
    for (const Code& code : ref.codes) {
      if (selection_margin(r, dict, w) <= margin) {
        separated = false;
        break;
      }
      r -= code.s * placed(dict, code.m, code.tau, w);
    }
    if (!separated) continue;
    ++kept;
    EncoderConfig fcfg = make_cfg(w, 8, Backend::kDirect);
    fcfg.fixed = fmt;
    const CodeSet got = encode_segment(seg, dict, nullptr, fcfg);
    bool same = got.size() == ref.size();
    for (std::size_t i = 0; same && i < ref.size(); ++i) {
      same = got.codes[i].m == ref.codes[i].m && got.codes[i].tau == ref.codes[i].tau;
    }
    ok += same;
  }

  std::uniform_real_distribution<double> uni(-400.0, 400.0);
  double worst = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const double x = uni(rng);
    worst = std::max(worst, std::abs(dequantize(quantize(x, fmt)) - x));
  }
  const double half_lsb = std::ldexp(1.0, -25);
  char buf[160];
  std::snprintf(buf, sizeof buf,
                "%d/%d margin-separated segments match (%d drawn); max round-trip err %.3e "
                "(half LSB %.3e)",
                ok, kept, tried, worst, half_lsb);
  return {kept == 50 && ok == 50 && worst <= half_lsb, buf};
}

Outcome reconstruction() {
  const std::size_t w = 2048;
  const Dictionary dict = make_dict(40, w);
  std::mt19937_64 rng(606);
  std::uniform_int_distribution<std::size_t> pick_m(0, 39), pick_k(1, 8);
  std::uniform_int_distribution<int> pick_tau(-half_width(w), half_width(w));
  std::normal_distribution<double> amp(0.0, 1.0);
  double worst = 0.0;
  for (int c = 0; c < 50; ++c) {
    CodeSet set;
    set.segment_index = 0;
    WaveformXd x = WaveformXd::Zero(Eigen::Index(w));
    const std::size_t k = pick_k(rng);
    for (std::size_t i = 0; i < k; ++i) {
      Code code;
      do {
        code.m = pick_m(rng);
        code.tau = pick_tau(rng);
      } while (!in_support(dict, code.m, code.tau, w));
      code.s = amp(rng);
      x += code.s * placed(dict, code.m, code.tau, w);
      set.codes.push_back(code);
    }
    const WaveformXd x_hat = reconstruct({set}, dict, w, w);
    worst = std::max(worst, (x - x_hat).norm() / x.norm());
  }

  const Signal clip = read_input(fs::path(SPIKETRUM_TEST_DATA) / "pluck.wav", InputFormat::kWav16);
  const Dictionary audio_dict = make_dict(40, w, *clip.sample_rate, 5000.0);
  const SpectralDictionary sdict =
      kernel_spectra(audio_dict, default_fft_len(w, w), w);
  std::vector<CodeSet> sets;
  for (const Segment& seg : segment_stream(clip.samples, w)) {
    sets.push_back(encode_segment(seg, audio_dict, &sdict, make_cfg(w, 64, Backend::kSpectral)));
  }
  const std::size_t padded = sets.size() * w;
  WaveformXd x = WaveformXd::Zero(Eigen::Index(padded));
  x.head(clip.samples.size()) = clip.samples;
  const auto curve = error_curve(x, sets, audio_dict, w, 64);
  std::size_t rises = 0;
  for (std::size_t i = 1; i < curve.size(); ++i) rises += curve[i].second > curve[i - 1].second;

  char buf[200];
  std::snprintf(buf, sizeof buf,
                "max rel L2 err %.2e over 50 combos; pluck.wav curve k=1..64 %.4f -> %.4f, "
                "%zu increases",
                worst, curve.front().second, curve.back().second, rises);
  return {worst < 1e-6 && rises == 0 && curve.size() == 64, buf};
}

Outcome metrics() {
  const ClassScores s = prf1(ClassCounts{50, 25, 10});
  double worst = std::abs(s.f1 - 20.0 / 27.0);
  std::mt19937_64 rng(707);
  std::uniform_int_distribution<std::size_t> count(0, 200);
  for (int i = 0; i < 1000; ++i) {
    const ClassCounts c{count(rng) + 1, count(rng), count(rng)};
    const double p = double(c.tp) / double(c.tp + c.fp);
    const double r = double(c.tp) / double(c.tp + c.fn);
    const double f1 = 2.0 * double(c.tp) / double(2 * c.tp + c.fp + c.fn);
    const ClassScores got = prf1(c);
    worst = std::max({worst, std::abs(got.precision - p), std::abs(got.recall - r),
                      std::abs(got.f1 - f1)});
  }
  char buf[128];
  std::snprintf(buf, sizeof buf, "F1(50,25,10) = %.15f; max abs err %.2e over 1000 matrices",
                s.f1, worst);
  return {worst <= 1e-12, buf};
}

Outcome mlp_health() {
  const std::size_t classes = 3;
  // Softmax normalization on the full-size network.
  MlpModel model = init_mlp({120, 256, 64, classes}, 11);
  std::mt19937_64 rng(808);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  double norm_err = 0.0;
  for (int i = 0; i < 200; ++i) {
    FeatureVector x(120);
    for (auto& v : x) v = 4.0 * uni(rng);
    norm_err = std::max(norm_err, std::abs(mlp_forward(model, x).sum() - 1.0));
  }

  // Central differences on a sample of parameters.
  Eigen::MatrixXd xb(120, 16);
  for (auto& v : xb.reshaped()) v = uni(rng);
  std::vector<int> yb(16);
  for (int i = 0; i < 16; ++i) yb[std::size_t(i)] = i % int(classes);
  const MlpGradients g = mlp_gradients(model, xb, yb);
  double grad_err = 0.0;
  std::uniform_int_distribution<int> pick(0, 1 << 30);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t layer = std::size_t(trial % 3);
    const bool bias = trial % 5 == 0;
    double* param;
    double analytic;
    if (bias) {
      const Eigen::Index i = pick(rng) % model.biases[layer].size();
      param = &model.biases[layer](i);
      analytic = g.biases[layer](i);
    } else {
      const Eigen::Index i = pick(rng) % model.weights[layer].rows();
      const Eigen::Index j = pick(rng) % model.weights[layer].cols();
      param = &model.weights[layer](i, j);
      analytic = g.weights[layer](i, j);
    }
    const double saved = *param;
    const double h = 1e-5;
    *param = saved + h;
    const double up = mlp_loss(model, xb, yb);
    *param = saved - h;
    const double down = mlp_loss(model, xb, yb);
    *param = saved;
    const double numeric = (up - down) / (2.0 * h);
    const double scale = std::max(std::abs(analytic), std::abs(numeric));
    if (scale > 1e-7) grad_err = std::max(grad_err, std::abs(analytic - numeric) / scale);
  }

  // Linearly separable 120-d task: class means on a simplex, small spread.
  const std::size_t per_class = 200;
  std::vector<Eigen::VectorXd> means;
  for (std::size_t c = 0; c < classes; ++c) {
    Eigen::VectorXd mu(120);
    for (auto& v : mu) v = uni(rng);
    means.push_back(mu);
  }
  std::normal_distribution<double> spread(0.0, 0.1);
  std::vector<FeatureVector> xs;
  std::vector<int> ys;
  for (std::size_t i = 0; i < per_class * classes; ++i) {
    const std::size_t c = i % classes;
    FeatureVector x = means[c];
    for (auto& v : x) v += spread(rng);
    xs.push_back(x);
    ys.push_back(int(c));
  }
  MlpTrainConfig tc;  // 400 epochs, batch 64, lr 1e-3, x0.9 every 50
  tc.seed = 99;
  const MlpTrainResult trained = mlp_train(xs, ys, classes, tc);
  const auto pred = mlp_predict(trained.model, xs);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < ys.size(); ++i) hits += pred[i] == ys[i];
  const double acc = double(hits) / double(ys.size());

  char buf[200];
  std::snprintf(buf, sizeof buf,
                "softmax |sum-1| %.2e; max grad rel err %.2e; train acc %.4f (loss %.4f -> %.4f)",
                norm_err, grad_err, acc, trained.epoch_loss.front(), trained.epoch_loss.back());
  return {norm_err <= 1e-9 && grad_err <= 1e-4 && acc >= 0.99, buf};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

int run(const std::string& cmd) { return std::system(cmd.c_str()); }

Outcome determinism() {
  const fs::path dir = fs::temp_directory_path() / "spiketrum_acceptance";
  fs::create_directories(dir);
  const std::string base = std::string(SPIKETRUM_CLI) + " encode -i " +
                           (fs::path(SPIKETRUM_TEST_DATA) / "pluck.wav").string() +
                           " --fmax 5000 --k 16 --with-raw-intensity -o ";
  const fs::path a = dir / "a.csv", b = dir / "b.csv";
  const int rc = run(base + a.string() + " 2>/dev/null") | run(base + b.string() + " 2>/dev/null");
  const std::string sa = slurp(a), sb = slurp(b);
  char buf[128];
  std::snprintf(buf, sizeof buf, "exit %d, %zu vs %zu bytes, identical=%s", rc, sa.size(),
                sb.size(), sa == sb ? "yes" : "no");
  return {rc == 0 && !sa.empty() && sa == sb, buf};
}

Outcome bench_reporting() {
  const fs::path out = fs::temp_directory_path() / "spiketrum_acceptance" / "bench.txt";
  fs::create_directories(out.parent_path());
  const int rc = run(std::string(SPIKETRUM_CLI) +
                     " bench --width 256 --kernels 8 --k 8 --segments 8 > " + out.string());
  const std::string text = slurp(out);
  std::istringstream lines(text);
  std::string line;
  int direct = 0, spectral = 0;
  bool context = false;
  while (std::getline(lines, line)) {
    double seconds = -1.0;
    char name[32] = {0};
    if (std::sscanf(line.c_str(), "%31s", name) == 1) {
      const std::string n = name;
      if ((n == "direct" || n == "spectral") && line.find("float") != std::string::npos) {
        std::istringstream fields(line);
        std::string tok;
        fields >> tok >> tok >> tok >> seconds;
        (n == "direct" ? direct : spectral) += seconds >= 0.0;
      }
    }
    context = context || line.find("4.7 ms") != std::string::npos;
  }
  char buf[128];
  std::snprintf(buf, sizeof buf, "exit %d; direct timing rows %d, spectral %d; context line %s", rc,
                direct, spectral, context ? "present" : "missing");
  return {rc == 0 && direct > 0 && spectral > 0 && context, buf};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double budget_s;
    std::function<Outcome()> check;
  };
  const std::array<Criterion, 10> criteria{{
      {1, "kernel recovery", 30.0, kernel_recovery},
      {2, "backend equivalence", 10.0, backend_equivalence},
      {3, "energy monotonicity + greedy dominance", 10.0, energy_monotonicity},
      {4, "ITP brute-force equivalence", 1.0, itp_equivalence},
      {5, "fixed-point fidelity", 30.0, fixed_fidelity},
      {6, "round-trip reconstruction", 30.0, reconstruction},
      {7, "metrics", 1e9, metrics},
      {8, "MLP health", 120.0, mlp_health},
      {9, "determinism", 1e9, determinism},
      {10, "bench reporting", 1e9, bench_reporting},
  }};
  int failed = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = secs < c.budget_s;
    const bool pass = o.pass && in_time;
    failed += !pass;
    std::printf("[%s] %2d %s: %s (%.2f s%s)\n", pass ? "PASS" : "FAIL", c.id, c.name,
                o.detail.c_str(), secs, in_time ? "" : ", over budget");
    std::fflush(stdout);
  }
  std::printf("%d/10 criteria passed\n", 10 - failed);
  return failed;
}
