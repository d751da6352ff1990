#ifndef QCHAOS_SPECTRAL_HPP
#define QCHAOS_SPECTRAL_HPP

#include <cmath>
#include <complex>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "error.hpp"
#include "signal.hpp"

namespace qchaos {

/// One-sided PSD over angular frequency, normalised so that sum(S) * d_omega equals
/// the mean-square value of the signal.
struct Spectrum {
  std::vector<double> omega;
  std::vector<double> power;
  std::vector<double> db;  // 10 log10(S / 1)
  double d_omega = 0.0;
  std::size_t segment_length = 0;
  std::size_t segments = 0;
  double overlap = 0.0;
  std::string window = "hann";

  double nyquist() const { return omega.empty() ? 0.0 : omega.back(); }

  /// sum S d_omega over bins with omega >= lo
  double band_power(double lo, double hi = INFINITY) const {
    double s = 0.0;
    for (std::size_t k = 0; k < omega.size(); ++k)
      if (omega[k] >= lo && omega[k] <= hi) s += power[k];
    return s * d_omega;
  }
};

/// Welch estimate with a periodic Hann window. The segment length is the largest even
/// length for which `segments` windows at the given overlap fit the record.
inline Spectrum psd(const Signal& signal, std::size_t segments = 16, double overlap = 0.5) {
  detail::require(signal.dt > 0.0, "psd: dt must be positive");
  detail::require(segments >= 1, "psd: need at least one segment");
  detail::require(overlap >= 0.0 && overlap < 1.0, "psd: overlap must lie in [0, 1)");
  const std::size_t n = signal.size();
  const double span = 1.0 + (static_cast<double>(segments) - 1.0) * (1.0 - overlap);
  std::size_t len = static_cast<std::size_t>(std::floor(static_cast<double>(n) / span));
  len -= len % 2;
  if (len < 8 || n < 4 * len)
    throw config_error("psd: signal too short (" + std::to_string(n) + " samples for " +
                       std::to_string(segments) + " segments; need length >= 4 x segment length)");
  const auto hop = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::llround(static_cast<double>(len) * (1.0 - overlap))));

  std::vector<double> window(len);
  double w2 = 0.0;
  for (std::size_t i = 0; i < len; ++i) {
    window[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(len));
    w2 += window[i] * window[i];
  }

  const std::size_t bins = len / 2 + 1;
  std::vector<double> acc(bins, 0.0);
  Eigen::FFT<double> fft;
  std::vector<double> buf(len);
  std::vector<std::complex<double>> spec;
  std::size_t used = 0;
  for (std::size_t start = 0; start + len <= n && used < segments; start += hop, ++used) {
    for (std::size_t i = 0; i < len; ++i) buf[i] = signal.values[start + i] * window[i];
    fft.fwd(spec, buf);
    for (std::size_t k = 0; k < bins; ++k) acc[k] += std::norm(spec[k]);
  }

  Spectrum out;
  out.segment_length = len;
  out.segments = used;
  out.overlap = overlap;
  out.d_omega = 2.0 * std::numbers::pi / (static_cast<double>(len) * signal.dt);
  out.omega.resize(bins);
  out.power.resize(bins);
  out.db.resize(bins);
  // |X_k|^2 / (len * sum w^2) is the mean-square per bin for a two-sided spectrum
  const double norm = 1.0 / (static_cast<double>(used) * static_cast<double>(len) * w2 * out.d_omega);
  for (std::size_t k = 0; k < bins; ++k) {
    const double fold = (k == 0 || k == bins - 1) ? 1.0 : 2.0;
    out.omega[k] = static_cast<double>(k) * out.d_omega;
    out.power[k] = fold * acc[k] * norm;
    out.db[k] = 10.0 * std::log10(std::max(out.power[k], 1e-300));
  }
  return out;
}

/// Phi(t) = integral_0^t delta_q, trapezoidal; Phi(0) = 0.
inline Signal cumulative_phase(const Signal& delta_q) {
  return Signal{delta_q.dt, cumulative_trapezoid(delta_q.values, delta_q.dt)};
}

struct CorrectionFactor {
  double value = 1.0;
  double exponent = 0.0;          // the integral in the exponent
  double truncation_bound = 0.0;  // tail beyond Nyquist assuming a flat spectrum
  std::vector<std::string> warnings;
};

/// F = exp(-integral_{omega_cd}^{Nyquist} S(omega) / omega^2 domega), trapezoidal.
/// With S normalised to mean square this is the delta-line form exp(-A^2 / (2 omega_d^2)).
inline CorrectionFactor correction_factor(const Spectrum& spec, double omega_cd) {
  detail::require(omega_cd > 0.0, "correction_factor: omega_cd must be positive");
  if (spec.omega.empty() || omega_cd > spec.nyquist())
    throw config_error("correction_factor: omega_cd beyond Nyquist");
  double integral = 0.0;
  for (std::size_t k = 1; k < spec.omega.size(); ++k) {
    const double a = spec.omega[k - 1], b = spec.omega[k];
    if (b <= omega_cd) continue;
    const double fa = spec.power[k - 1] / (a * a), fb = spec.power[k] / (b * b);
    if (a >= omega_cd) {
      integral += 0.5 * (b - a) * (fa + fb);
    } else {
      const double u = (omega_cd - a) / (b - a);
      const double fc = fa + u * (fb - fa);
      integral += 0.5 * (b - omega_cd) * (fc + fb);
    }
  }
  CorrectionFactor f;
  f.exponent = integral;
  f.value = std::exp(-integral);
  f.truncation_bound = spec.power.back() / spec.nyquist();
  return f;
}

struct SpectralLine {
  double amplitude = 0.0;
  double omega = 1.0;
};

/// Closed form for line spectra: F = exp(-sum A^2 / (2 omega^2)). Phases do not enter.
inline CorrectionFactor f_from_sinusoids(const std::vector<SpectralLine>& lines) {
  CorrectionFactor f;
  for (const auto& l : lines) {
    detail::require(l.omega > 0.0, "f_from_sinusoids: line frequency must be positive");
    const double ratio = std::abs(l.amplitude) / l.omega;
    detail::require(ratio <= 0.2, "f_from_sinusoids: A/omega = " + std::to_string(ratio) +
                                      " exceeds 0.2, small-modulation expansion invalid");
    if (ratio > 0.1)
      f.warnings.push_back("A/omega = " + std::to_string(ratio) + " above 0.1 at omega = " +
                           std::to_string(l.omega));
    f.exponent += l.amplitude * l.amplitude / (2.0 * l.omega * l.omega);
  }
  f.value = std::exp(-f.exponent);
  return f;
}

/// 10 x max distance of the bath domain edges from the qubit frequency.
inline double default_omega_cd(double domain_lo, double domain_hi, double omega_q = 1.0) {
  return 10.0 * std::max(std::abs(domain_hi - omega_q), std::abs(omega_q - domain_lo));
}

}  // namespace qchaos

#endif
