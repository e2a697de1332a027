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
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "spiketrum/dictionary.hpp"
#include "spiketrum/error.hpp"
#include "spiketrum/fixed_point.hpp"

namespace spiketrum {

enum class Backend { kDirect, kSpectral };
// kAbsolute picks the largest |correlation|; kSigned the largest raw value.
enum class SelectRule { kAbsolute, kSigned };

Backend parse_backend(const std::string& text);
SelectRule parse_select_rule(const std::string& text);
const char* to_string(Backend backend);
const char* to_string(SelectRule rule);

// One matching-pursuit result: kernel index, shift, signed intensity.
struct Code {
  std::size_t m = 0;
  int tau = 0;
  double s = 0.0;
  std::size_t segment_index = 0;

  friend bool operator==(const Code&, const Code&) = default;
};

// Codes of one segment, in emission order (|s| non-increasing).
struct CodeSet {
  std::size_t segment_index = 0;
  std::vector<Code> codes;

  std::size_t size() const { return codes.size(); }
  bool empty() const { return codes.empty(); }
};

struct Segment {
  WaveformXd samples;
  std::size_t index = 0;
};

struct EncoderConfig {
  std::size_t width = 2048;
  std::size_t max_codes = 16;
  double halt_threshold = 0.0;
  Backend backend = Backend::kDirect;
  SelectRule select = SelectRule::kAbsolute;
  // Unset: double-precision arithmetic.
  std::optional<FixedFormat> fixed;

  void validate() const;
};

// Shifts live in [-half_width(W), +half_width(W)]; column j of a correlation
// surface holds tau = j - half_width(W).
inline int half_width(std::size_t width) { return static_cast<int>(width / 2); }
inline Eigen::Index surface_cols(std::size_t width) {
  return 2 * half_width(width) + 1;
}

// values(m, j) = sum_t residual[t] * kernel_m[t - tau_j].
using CorrelationSurface = Eigen::MatrixXd;

/// Logical shift of `kernel` into a window of `width` samples:
/// out[t] = kernel[t - tau] where that index exists, zero elsewhere.
template <typename Derived>
Waveform<typename Derived::Scalar> shift_kernel(
    const Eigen::MatrixBase<Derived>& kernel, int tau, std::size_t width) {
  using Scalar = typename Derived::Scalar;
  if (tau > half_width(width) || tau < -half_width(width)) {
    throw Error(ErrorKind::kShiftOutOfRange,
                "tau " + std::to_string(tau) + " outside +/-" +
                    std::to_string(half_width(width)));
  }
  const auto w = static_cast<Eigen::Index>(width);
  const Eigen::Index len = kernel.size();
  Waveform<Scalar> out = Waveform<Scalar>::Zero(w);
  const Eigen::Index lo = std::max<Eigen::Index>(0, tau);
  const Eigen::Index hi = std::min<Eigen::Index>(w, len + tau);
  for (Eigen::Index t = lo; t < hi; ++t) out(t) = kernel(t - tau);
  return out;
}

/// Time-domain correlation of a residual against every kernel at every
/// admissible shift. Kernels shifted partly out of the window are used
/// truncated, without renormalization.
template <typename Derived, typename KernelDerived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic>
correlate_direct(const Eigen::MatrixBase<Derived>& residual,
                 const Eigen::MatrixBase<KernelDerived>& kernels) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index w = residual.size();
  const Eigen::Index len = kernels.cols();
  const int half = half_width(static_cast<std::size_t>(w));
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> values(
      kernels.rows(), surface_cols(static_cast<std::size_t>(w)));
  for (Eigen::Index m = 0; m < kernels.rows(); ++m) {
    for (Eigen::Index j = 0; j < values.cols(); ++j) {
      const Eigen::Index tau = j - half;
      const Eigen::Index lo = std::max<Eigen::Index>(0, tau);
      const Eigen::Index hi = std::min<Eigen::Index>(w, len + tau);
      values(m, j) = hi > lo ? residual.segment(lo, hi - lo).dot(
                                   kernels.row(m).segment(lo - tau, hi - lo).transpose())
                             : Scalar(0);
    }
  }
  return values;
}

CorrelationSurface correlate_direct(const WaveformXd& residual,
                                    const Dictionary& dict);

/// FFT correlation; same contract as correlate_direct.
CorrelationSurface correlate_spectral(const WaveformXd& residual,
                                      const SpectralDictionary& sdict);

/// Location of the winning entry. Scans m then tau ascending and only moves on
/// strict improvement, so ties resolve to the smallest m, then smallest tau.
template <typename Derived>
std::pair<Eigen::Index, Eigen::Index> select_index(
    const Eigen::MatrixBase<Derived>& values, SelectRule rule) {
  using std::abs;
  Eigen::Index best_m = 0, best_j = 0;
  auto score = [&](Eigen::Index m, Eigen::Index j) {
    return rule == SelectRule::kAbsolute ? abs(values(m, j)) : values(m, j);
  };
  auto best = score(0, 0);
  for (Eigen::Index m = 0; m < values.rows(); ++m) {
    for (Eigen::Index j = 0; j < values.cols(); ++j) {
      const auto v = score(m, j);
      if (v > best) {
        best = v;
        best_m = m;
        best_j = j;
      }
    }
  }
  return {best_m, best_j};
}

Code select_code(const CorrelationSurface& surface,
                 SelectRule rule = SelectRule::kAbsolute);

/// residual - s * shift_kernel(kernel_m, tau).
WaveformXd subtract_component(const WaveformXd& residual, const Code& code,
                              const Dictionary& dict);

// Everything an encode produced, for callers that inspect the residual.
struct SegmentEncoding {
  CodeSet codes;
  WaveformXd residual;
  // residual_energy[i] is the energy before code i; the last entry is final.
  std::vector<double> residual_energy;
  std::size_t saturations = 0;
};

/// Greedy matching pursuit on one segment: correlate, pick, subtract, until
/// max_codes codes or the best |s| drops below halt_threshold. sdict is
/// required for the spectral backend.
SegmentEncoding encode_segment_traced(const Segment& segment,
                                      const Dictionary& dict,
                                      const SpectralDictionary* sdict,
                                      const EncoderConfig& cfg);

CodeSet encode_segment(const Segment& segment, const Dictionary& dict,
                       const SpectralDictionary* sdict,
                       const EncoderConfig& cfg);

}  // namespace spiketrum
