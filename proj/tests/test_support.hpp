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

#include <random>

#include <gtest/gtest.h>

#include "spiketrum/dictionary.hpp"
#include "spiketrum/error.hpp"

namespace spiketrum::testing {

template <typename F>
void expect_kind(ErrorKind kind, F&& f) {
  try {
    f();
    ADD_FAILURE() << "expected " << to_string(kind);
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), kind) << e.what();
  }
}

// Shifted kernel written out index by index.
inline WaveformXd placed(const Dictionary& dict, std::size_t m, int tau, std::size_t w) {
  WaveformXd out = WaveformXd::Zero(Eigen::Index(w));
  const auto len = static_cast<long>(dict.kernel_len());
  for (long t = 0; t < long(w); ++t) {
    const long src = t - tau;
    if (src >= 0 && src < len) out(t) = dict.kernels()(Eigen::Index(m), src);
  }
  return out;
}

inline WaveformXd gaussian(std::mt19937_64& rng, std::size_t n, double sigma = 1.0) {
  std::normal_distribution<double> dist(0.0, sigma);
  WaveformXd x(static_cast<Eigen::Index>(n));
  for (auto& v : x) v = dist(rng);
  return x;
}

inline Dictionary small_dictionary(std::size_t kernels, std::size_t len,
                                   double fs = 16000.0) {
  DictionaryConfig cfg;
  cfg.num_kernels = kernels;
  cfg.kernel_len = len;
  cfg.sample_rate = fs;
  cfg.freq_hi = fs / 2.0;
  return build_dictionary(cfg);
}

}  // namespace spiketrum::testing
