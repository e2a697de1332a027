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

#include <complex>
#include <cstddef>
#include <iosfwd>
#include <optional>

#include <Eigen/Dense>

namespace spiketrum {

// Row-major so that one kernel is a contiguous row.
template <typename Scalar>
using KernelMatrix =
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename Scalar>
using Waveform = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using WaveformXd = Waveform<double>;

struct DictionaryConfig {
  std::size_t num_kernels = 40;
  double sample_rate = 16000.0;
  double freq_lo = 20.0;
  double freq_hi = 8000.0;
  std::size_t kernel_len = 2048;
  int gammatone_order = 4;
  double bandwidth_factor = 1.019;
  // Sample index inside the kernel buffer where the gammatone starts. When
  // unset the onset sits at kernel_len / 2, so a kernel shifted by tau starts
  // at sample W/2 + tau of the segment.
  std::optional<std::size_t> onset_offset;

  std::size_t onset() const { return onset_offset.value_or(kernel_len / 2); }

  // Throws Error(kInvalidConfig) describing the first violated invariant.
  void validate() const;
};

// Glasberg & Moore equivalent rectangular bandwidth.
double erb_hz(double freq_hz);
// ERB-rate scale (number of ERBs below freq_hz) and its inverse.
double erb_rate(double freq_hz);
double erb_rate_to_hz(double erb);

// ERB-rate spaced centers, inclusive of both ends.
Eigen::VectorXd erb_space(double freq_lo, double freq_hi, std::size_t count);

/// A set of unit-norm kernels, one per row. Immutable once built.
class Dictionary {
 public:
  Dictionary() = default;

  // Rows are L2-normalized on construction. center_freqs may be empty for
  // dictionaries that do not come from the gammatone generator.
  Dictionary(KernelMatrix<double> kernels, Eigen::VectorXd center_freqs,
             DictionaryConfig config);

  const KernelMatrix<double>& kernels() const { return kernels_; }
  const Eigen::VectorXd& center_freqs() const { return center_freqs_; }
  const DictionaryConfig& config() const { return config_; }

  std::size_t size() const { return static_cast<std::size_t>(kernels_.rows()); }
  std::size_t kernel_len() const {
    return static_cast<std::size_t>(kernels_.cols());
  }
  auto kernel(std::size_t m) const { return kernels_.row(Eigen::Index(m)); }

 private:
  KernelMatrix<double> kernels_;
  Eigen::VectorXd center_freqs_;
  DictionaryConfig config_;
};

Dictionary build_dictionary(const DictionaryConfig& config);

// Forward transforms of the zero-padded kernels, for FFT correlation.
struct SpectralDictionary {
  KernelMatrix<std::complex<double>> spectra;
  std::size_t fft_len = 0;
  std::size_t width = 0;
  std::size_t kernel_len = 0;
};

// Smallest transform length that keeps every lag in [-W/2, W/2] free of
// circular wrap: max(W + L - 1, W + W/2).
std::size_t min_fft_len(std::size_t width, std::size_t kernel_len);

// Next power of two >= min_fft_len(width, kernel_len).
std::size_t default_fft_len(std::size_t width, std::size_t kernel_len);

// `width` defaults to the kernel length. Throws kLengthTooSmall when fft_len
// is under min_fft_len, kInvalidConfig when it is not a power of two.
SpectralDictionary kernel_spectra(const Dictionary& dict, std::size_t fft_len,
                                  std::optional<std::size_t> width = {});

// CSV: kernel_index,center_freq_hz,s0,s1,...
void write_dictionary_csv(std::ostream& os, const Dictionary& dict);

}  // namespace spiketrum
