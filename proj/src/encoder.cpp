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
#include "spiketrum/encoder.hpp"

#include <cmath>

#include <unsupported/Eigen/FFT>

namespace spiketrum {

namespace {

using RawVector = Eigen::Matrix<std::int64_t, Eigen::Dynamic, 1>;
using RawMatrix = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic,
                                Eigen::RowMajor>;

// [first, last) range of nonzero samples of a kernel row.
std::pair<Eigen::Index, Eigen::Index> support_of(
    const Eigen::Ref<const Eigen::RowVectorXd>& kernel) {
  Eigen::Index first = 0;
  Eigen::Index last = kernel.size();
  while (first < last && kernel(first) == 0.0) ++first;
  while (last > first && kernel(last - 1) == 0.0) --last;
  return {first, last};
}

void check_width(const WaveformXd& residual, std::size_t width) {
  if (static_cast<std::size_t>(residual.size()) != width) {
    throw Error(ErrorKind::kDimensionMismatch,
                "residual has " + std::to_string(residual.size()) +
                    " samples, expected " + std::to_string(width));
  }
}

void check_code(const Code& code, const Dictionary& dict) {
  if (code.m >= dict.size()) {
    throw Error(ErrorKind::kCodeOutOfBounds,
                "kernel index " + std::to_string(code.m) + " >= " +
                    std::to_string(dict.size()));
  }
}

Code code_at(const CorrelationSurface& surface, Eigen::Index m, Eigen::Index j) {
  const int half = static_cast<int>((surface.cols() - 1) / 2);
  Code code;
  code.m = static_cast<std::size_t>(m);
  code.tau = static_cast<int>(j) - half;
  code.s = surface(m, j);
  return code;
}

// Ascending-sample MACC correlation, the time-domain hardware datapath.
RawMatrix correlate_fixed(const RawVector& residual, const RawMatrix& kernels,
                          const FixedFormat& fmt, FixedStats& stats) {
  const Eigen::Index w = residual.size();
  const Eigen::Index len = kernels.cols();
  const int half = half_width(static_cast<std::size_t>(w));
  RawMatrix values(kernels.rows(), surface_cols(static_cast<std::size_t>(w)));

  // When no product can leave int64 and no partial sum can reach the format
  // limits, the saturating MACC reduces to plain int64 arithmetic with the
  // same per-product rounding.
  const auto max_abs = [](auto&& v) -> std::uint64_t {
    std::uint64_t out = 0;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      const std::int64_t x = v.data()[i];
      out = std::max<std::uint64_t>(out, x < 0 ? 0ull - std::uint64_t(x) : std::uint64_t(x));
    }
    return out;
  };
  const unsigned __int128 peak =
      static_cast<unsigned __int128>(max_abs(residual)) * max_abs(kernels);
  const unsigned __int128 sum_bound =
      (static_cast<unsigned __int128>(w) * ((peak >> fmt.frac_bits) + 1));
  if (peak < (static_cast<unsigned __int128>(1) << 62) &&
      sum_bound <= static_cast<unsigned __int128>(fmt.max_raw())) {
    const int f = fmt.frac_bits;
    const std::int64_t mask = (std::int64_t{1} << f) - 1;
    const std::int64_t half_lsb = std::int64_t{1} << (f - 1);
    for (Eigen::Index m = 0; m < kernels.rows(); ++m) {
      const std::int64_t* k = kernels.row(m).data();
      for (Eigen::Index j = 0; j < values.cols(); ++j) {
        const Eigen::Index tau = j - half;
        const Eigen::Index lo = std::max<Eigen::Index>(0, tau);
        const Eigen::Index hi = std::min<Eigen::Index>(w, len + tau);
        const std::int64_t* r = residual.data();
        const std::int64_t* kk = k - tau;
        std::int64_t acc = 0;
        for (Eigen::Index t = lo; t < hi; ++t) {
          const std::int64_t p = r[t] * kk[t];
          const std::int64_t q = p >> f;
          acc += q + (((p & mask) + (q & 1)) > half_lsb);
        }
        values(m, j) = acc;
      }
    }
    return values;
  }

  for (Eigen::Index m = 0; m < kernels.rows(); ++m) {
    const std::int64_t* k = kernels.row(m).data();
    for (Eigen::Index j = 0; j < values.cols(); ++j) {
      const Eigen::Index tau = j - half;
      const Eigen::Index lo = std::max<Eigen::Index>(0, tau);
      const Eigen::Index hi = std::min<Eigen::Index>(w, len + tau);
      std::int64_t acc = 0;
      for (Eigen::Index t = lo; t < hi; ++t) {
        acc = macc_raw(acc, residual(t), k[t - tau], fmt, &stats);
      }
      values(m, j) = acc;
    }
  }
  return values;
}

class SpectralCorrelator {
 public:
  explicit SpectralCorrelator(const SpectralDictionary& sdict)
      : sdict_(sdict),
        padded_(Eigen::VectorXd::Zero(Eigen::Index(sdict.fft_len))),
        product_(Eigen::Index(sdict.fft_len)),
        lagged_(Eigen::Index(sdict.fft_len)) {}

  CorrelationSurface operator()(const WaveformXd& residual) {
    check_width(residual, sdict_.width);
    const auto n = static_cast<Eigen::Index>(sdict_.fft_len);
    const int half = half_width(sdict_.width);
    padded_.setZero();
    padded_.head(residual.size()) = residual;
    fft_.fwd(spectrum_, padded_);

    CorrelationSurface values(sdict_.spectra.rows(), surface_cols(sdict_.width));
    for (Eigen::Index m = 0; m < sdict_.spectra.rows(); ++m) {
      product_ = spectrum_.array() *
                 sdict_.spectra.row(m).transpose().array().conjugate();
      fft_.inv(lagged_, product_);
      // lagged_[l] = sum_t r[t] k[t - l] (circular); negative lags wrap to n + l.
      for (Eigen::Index j = 0; j < values.cols(); ++j) {
        const Eigen::Index tau = j - half;
        values(m, j) = lagged_(tau >= 0 ? tau : n + tau);
      }
    }
    return values;
  }

 private:
  const SpectralDictionary& sdict_;
  Eigen::FFT<double> fft_;
  Eigen::VectorXd padded_;
  Eigen::VectorXcd spectrum_;
  Eigen::VectorXcd product_;
  Eigen::VectorXd lagged_;
};

}  // namespace

Backend parse_backend(const std::string& text) {
  if (text == "direct") return Backend::kDirect;
  if (text == "spectral") return Backend::kSpectral;
  throw Error(ErrorKind::kInvalidConfig, "unknown backend '" + text + "'");
}

SelectRule parse_select_rule(const std::string& text) {
  if (text == "abs") return SelectRule::kAbsolute;
  if (text == "signed") return SelectRule::kSigned;
  throw Error(ErrorKind::kInvalidConfig, "unknown select rule '" + text + "'");
}

const char* to_string(Backend backend) {
  return backend == Backend::kDirect ? "direct" : "spectral";
}

const char* to_string(SelectRule rule) {
  return rule == SelectRule::kAbsolute ? "abs" : "signed";
}

void EncoderConfig::validate() const {
  if (width < 1) throw Error(ErrorKind::kInvalidConfig, "width must be >= 1");
  if (!(halt_threshold >= 0.0)) {
    throw Error(ErrorKind::kInvalidConfig, "halt_threshold must be >= 0");
  }
  if (fixed) fixed->validate();
}

CorrelationSurface correlate_direct(const WaveformXd& residual,
                                    const Dictionary& dict) {
  const std::size_t width = static_cast<std::size_t>(residual.size());
  if (width == 0) throw Error(ErrorKind::kDimensionMismatch, "empty residual");
  const Eigen::Index w = residual.size();
  const int half = half_width(width);
  CorrelationSurface values =
      CorrelationSurface::Zero(Eigen::Index(dict.size()), surface_cols(width));
  for (std::size_t m = 0; m < dict.size(); ++m) {
    const auto kernel = dict.kernel(m);
    const auto [first, last] = support_of(kernel);
    for (Eigen::Index j = 0; j < values.cols(); ++j) {
      const Eigen::Index tau = j - half;
      const Eigen::Index lo = std::max<Eigen::Index>(0, first + tau);
      const Eigen::Index hi = std::min<Eigen::Index>(w, last + tau);
      if (hi > lo) {
        values(Eigen::Index(m), j) =
            residual.segment(lo, hi - lo)
                .dot(kernel.segment(lo - tau, hi - lo).transpose());
      }
    }
  }
  return values;
}

CorrelationSurface correlate_spectral(const WaveformXd& residual,
                                      const SpectralDictionary& sdict) {
  SpectralCorrelator correlate(sdict);
  return correlate(residual);
}

Code select_code(const CorrelationSurface& surface, SelectRule rule) {
  if (surface.size() == 0) {
    throw Error(ErrorKind::kDimensionMismatch, "empty correlation surface");
  }
  const auto [m, j] = select_index(surface, rule);
  return code_at(surface, m, j);
}

WaveformXd subtract_component(const WaveformXd& residual, const Code& code,
                              const Dictionary& dict) {
  check_code(code, dict);
  if (code.s == 0.0) return residual;
  const auto width = static_cast<std::size_t>(residual.size());
  return residual - code.s * shift_kernel(dict.kernel(code.m).transpose(),
                                          code.tau, width);
}

SegmentEncoding encode_segment_traced(const Segment& segment,
                                      const Dictionary& dict,
                                      const SpectralDictionary* sdict,
                                      const EncoderConfig& cfg) {
  cfg.validate();
  check_width(segment.samples, cfg.width);
  if (cfg.backend == Backend::kSpectral) {
    if (sdict == nullptr) {
      throw Error(ErrorKind::kInvalidConfig,
                  "spectral backend needs a spectral dictionary");
    }
    if (sdict->width != cfg.width || sdict->kernel_len != dict.kernel_len() ||
        std::size_t(sdict->spectra.rows()) != dict.size()) {
      throw Error(ErrorKind::kDimensionMismatch,
                  "spectral dictionary does not match dictionary/width");
    }
  }

  SegmentEncoding out;
  out.codes.segment_index = segment.index;
  std::optional<SpectralCorrelator> spectral;
  if (cfg.backend == Backend::kSpectral) spectral.emplace(*sdict);

  auto accept = [&](Code code) {
    if (code.s == 0.0 || std::fabs(code.s) < cfg.halt_threshold) return false;
    code.segment_index = segment.index;
    out.codes.codes.push_back(code);
    return true;
  };

  if (!cfg.fixed) {
    WaveformXd residual = segment.samples;
    out.residual_energy.push_back(residual.squaredNorm());
    for (std::size_t i = 0; i < cfg.max_codes; ++i) {
      const CorrelationSurface surface = spectral
                                             ? (*spectral)(residual)
                                             : correlate_direct(residual, dict);
      const Code code = select_code(surface, cfg.select);
      if (!accept(code)) break;
      residual = subtract_component(residual, code, dict);
      out.residual_energy.push_back(residual.squaredNorm());
    }
    out.residual = std::move(residual);
    return out;
  }

  const FixedFormat& fmt = *cfg.fixed;
  FixedStats stats;
  const RawMatrix kernels = dict.kernels().unaryExpr(
      [&](double v) { return quantize_raw(v, fmt, &stats); });
  RawVector residual = segment.samples.unaryExpr(
      [&](double v) { return quantize_raw(v, fmt, &stats); });
  auto energy = [&] {
    return residual.unaryExpr([&](std::int64_t r) { return dequantize(r, fmt); })
        .squaredNorm();
  };
  const int half = half_width(cfg.width);
  const auto w = static_cast<Eigen::Index>(cfg.width);
  const Eigen::Index len = kernels.cols();

  out.residual_energy.push_back(energy());
  for (std::size_t i = 0; i < cfg.max_codes; ++i) {
    RawMatrix raw_surface;
    if (spectral) {
      const WaveformXd real_residual = residual.unaryExpr(
          [&](std::int64_t r) { return dequantize(r, fmt); });
      raw_surface = (*spectral)(real_residual).unaryExpr([&](double v) {
        return quantize_raw(v, fmt, &stats);
      });
    } else {
      raw_surface = correlate_fixed(residual, kernels, fmt, stats);
    }
    const auto [m, j] = select_index(raw_surface, cfg.select);
    const std::int64_t s_raw = raw_surface(m, j);
    Code code;
    code.m = static_cast<std::size_t>(m);
    code.tau = static_cast<int>(j) - half;
    code.s = dequantize(s_raw, fmt);
    if (!accept(code)) break;

    const Eigen::Index lo = std::max<Eigen::Index>(0, code.tau);
    const Eigen::Index hi = std::min<Eigen::Index>(w, len + code.tau);
    for (Eigen::Index t = lo; t < hi; ++t) {
      const __int128 scaled =
          scaled_product(s_raw, kernels(m, t - code.tau), fmt.frac_bits);
      residual(t) = fit_raw(static_cast<__int128>(residual(t)) - scaled, fmt,
                            &stats);
    }
    out.residual_energy.push_back(energy());
  }
  out.residual =
      residual.unaryExpr([&](std::int64_t r) { return dequantize(r, fmt); });
  out.saturations = stats.saturations;
  return out;
}

CodeSet encode_segment(const Segment& segment, const Dictionary& dict,
                       const SpectralDictionary* sdict,
                       const EncoderConfig& cfg) {
  return encode_segment_traced(segment, dict, sdict, cfg).codes;
}

}  // namespace spiketrum
