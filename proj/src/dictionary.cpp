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
#include "spiketrum/dictionary.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>
#include <string>

#include <unsupported/Eigen/FFT>

#include "spiketrum/error.hpp"

namespace spiketrum {

namespace {

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

}  // namespace

void DictionaryConfig::validate() const {
  auto fail = [](const std::string& msg) {
    throw Error(ErrorKind::kInvalidConfig, msg);
  };
  if (num_kernels < 1) fail("num_kernels must be >= 1");
  if (kernel_len < 1) fail("kernel_len must be >= 1");
  if (!(sample_rate > 0.0)) fail("sample_rate must be positive");
  if (!(freq_lo > 0.0) || !(freq_lo < freq_hi))
    fail("need 0 < freq_lo < freq_hi");
  if (freq_hi > sample_rate / 2.0) fail("freq_hi exceeds the Nyquist frequency");
  if (gammatone_order < 1) fail("gammatone_order must be >= 1");
  if (!(bandwidth_factor > 0.0)) fail("bandwidth_factor must be positive");
  if (onset() >= kernel_len) fail("onset_offset must lie inside the kernel");
}

double erb_hz(double freq_hz) { return 24.7 * (4.37e-3 * freq_hz + 1.0); }

double erb_rate(double freq_hz) {
  return 21.4 * std::log10(4.37e-3 * freq_hz + 1.0);
}

double erb_rate_to_hz(double erb) {
  return (std::pow(10.0, erb / 21.4) - 1.0) / 4.37e-3;
}

Eigen::VectorXd erb_space(double freq_lo, double freq_hi, std::size_t count) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(count));
  if (count == 0) return out;
  if (count == 1) {
    out(0) = freq_lo;
    return out;
  }
  const double lo = erb_rate(freq_lo);
  const double hi = erb_rate(freq_hi);
  const double step = (hi - lo) / static_cast<double>(count - 1);
  for (std::size_t i = 0; i < count; ++i) {
    out(Eigen::Index(i)) = erb_rate_to_hz(lo + step * static_cast<double>(i));
  }
  // Pin the ends so round-off never pushes them outside [lo, hi].
  out(0) = freq_lo;
  out(Eigen::Index(count - 1)) = freq_hi;
  return out;
}

Dictionary::Dictionary(KernelMatrix<double> kernels,
                       Eigen::VectorXd center_freqs, DictionaryConfig config)
    : kernels_(std::move(kernels)),
      center_freqs_(std::move(center_freqs)),
      config_(std::move(config)) {
  if (kernels_.rows() == 0 || kernels_.cols() == 0) {
    throw Error(ErrorKind::kInvalidConfig, "empty kernel matrix");
  }
  if (center_freqs_.size() != 0 && center_freqs_.size() != kernels_.rows()) {
    throw Error(ErrorKind::kDimensionMismatch,
                "one center frequency per kernel expected");
  }
  for (Eigen::Index m = 0; m < kernels_.rows(); ++m) {
    const double norm = kernels_.row(m).norm();
    if (!(norm > 0.0) || !std::isfinite(norm)) {
      throw Error(ErrorKind::kInvalidConfig,
                  "kernel " + std::to_string(m) + " has no finite energy");
    }
    kernels_.row(m) /= norm;
  }
  config_.num_kernels = static_cast<std::size_t>(kernels_.rows());
  config_.kernel_len = static_cast<std::size_t>(kernels_.cols());
}

Dictionary build_dictionary(const DictionaryConfig& config) {
  config.validate();
  const Eigen::VectorXd centers =
      erb_space(config.freq_lo, config.freq_hi, config.num_kernels);

  const auto rows = static_cast<Eigen::Index>(config.num_kernels);
  const auto cols = static_cast<Eigen::Index>(config.kernel_len);
  const auto onset = static_cast<Eigen::Index>(config.onset());
  const int order = config.gammatone_order;
  constexpr double kTwoPi = 2.0 * std::numbers::pi;

  KernelMatrix<double> kernels = KernelMatrix<double>::Zero(rows, cols);
  for (Eigen::Index m = 0; m < rows; ++m) {
    const double fc = centers(m);
    const double decay = kTwoPi * config.bandwidth_factor * erb_hz(fc);
    for (Eigen::Index i = onset; i < cols; ++i) {
      const double t = static_cast<double>(i - onset) / config.sample_rate;
      kernels(m, i) = std::pow(t, order - 1) * std::exp(-decay * t) *
                      std::cos(kTwoPi * fc * t);
    }
  }
  return Dictionary(std::move(kernels), centers, config);
}

std::size_t min_fft_len(std::size_t width, std::size_t kernel_len) {
  const std::size_t linear = width + kernel_len - 1;
  const std::size_t lag_window = width + width / 2;
  return std::max(linear, lag_window);
}

std::size_t default_fft_len(std::size_t width, std::size_t kernel_len) {
  std::size_t n = 1;
  while (n < min_fft_len(width, kernel_len)) n <<= 1;
  return n;
}

SpectralDictionary kernel_spectra(const Dictionary& dict, std::size_t fft_len,
                                  std::optional<std::size_t> width) {
  const std::size_t w = width.value_or(dict.kernel_len());
  if (w < 1) throw Error(ErrorKind::kInvalidConfig, "width must be >= 1");
  if (fft_len < min_fft_len(w, dict.kernel_len())) {
    throw Error(ErrorKind::kLengthTooSmall,
                "fft_len " + std::to_string(fft_len) + " < " +
                    std::to_string(min_fft_len(w, dict.kernel_len())));
  }
  if (!is_power_of_two(fft_len)) {
    throw Error(ErrorKind::kInvalidConfig, "fft_len must be a power of two");
  }

  SpectralDictionary out;
  out.fft_len = fft_len;
  out.width = w;
  out.kernel_len = dict.kernel_len();
  out.spectra.resize(Eigen::Index(dict.size()), Eigen::Index(fft_len));

  Eigen::FFT<double> fft;
  fft.SetFlag(Eigen::FFT<double>::Unscaled);
  Eigen::VectorXd padded(static_cast<Eigen::Index>(fft_len));
  Eigen::VectorXcd spectrum(static_cast<Eigen::Index>(fft_len));
  for (std::size_t m = 0; m < dict.size(); ++m) {
    padded.setZero();
    padded.head(Eigen::Index(dict.kernel_len())) = dict.kernel(m).transpose();
    fft.fwd(spectrum, padded);
    out.spectra.row(Eigen::Index(m)) = spectrum.transpose();
  }
  return out;
}

void write_dictionary_csv(std::ostream& os, const Dictionary& dict) {
  os << "kernel_index,center_freq_hz";
  for (std::size_t i = 0; i < dict.kernel_len(); ++i) os << ",s" << i;
  os << '\n';
  char buf[40];
  for (std::size_t m = 0; m < dict.size(); ++m) {
    const double fc = dict.center_freqs().size() > 0
                          ? dict.center_freqs()(Eigen::Index(m))
                          : 0.0;
    std::snprintf(buf, sizeof buf, "%.17g", fc);
    os << m << ',' << buf;
    for (std::size_t i = 0; i < dict.kernel_len(); ++i) {
      std::snprintf(buf, sizeof buf, "%.17g", dict.kernels()(Eigen::Index(m), Eigen::Index(i)));
      os << ',' << buf;
    }
    os << '\n';
  }
}

}  // namespace spiketrum
