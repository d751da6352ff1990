#ifndef QCHAOS_SIGNAL_HPP
#define QCHAOS_SIGNAL_HPP

#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "error.hpp"

namespace qchaos {

using cplx = std::complex<double>;

/// Uniformly sampled real time series starting at t = 0.
struct Signal {
  double dt = 0.0;
  std::vector<double> values;

  std::size_t size() const noexcept { return values.size(); }
  double time(std::size_t i) const noexcept { return static_cast<double>(i) * dt; }
  double duration() const noexcept { return values.empty() ? 0.0 : time(values.size() - 1); }

  std::vector<double> times() const {
    std::vector<double> t(values.size());
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = time(i);
    return t;
  }

  double mean() const {
    if (values.empty()) return 0.0;
    double s = 0.0;
    for (double v : values) s += v;
    return s / static_cast<double>(values.size());
  }

  double mean_square() const {
    if (values.empty()) return 0.0;
    double s = 0.0;
    for (double v : values) s += v * v;
    return s / static_cast<double>(values.size());
  }
};

inline Signal make_signal(double dt, std::vector<double> values) {
  detail::require(dt > 0.0 && std::isfinite(dt), "signal: dt must be positive and finite");
  for (double v : values)
    detail::require(std::isfinite(v), "signal: non-finite sample");
  return Signal{dt, std::move(values)};
}

/// Trapezoidal time integral of samples with spacing dt.
inline double trapezoid(std::span<const double> y, double dt) {
  if (y.size() < 2) return 0.0;
  double s = 0.5 * (y.front() + y.back());
  for (std::size_t i = 1; i + 1 < y.size(); ++i) s += y[i];
  return s * dt;
}

/// Running trapezoidal integral; out[0] = 0.
inline std::vector<double> cumulative_trapezoid(std::span<const double> y, double dt) {
  std::vector<double> out(y.size(), 0.0);
  for (std::size_t i = 1; i < y.size(); ++i)
    out[i] = out[i - 1] + 0.5 * dt * (y[i - 1] + y[i]);
  return out;
}

}  // namespace qchaos

#endif
