#ifndef QCHAOS_DECOHERENCE_HPP
#define QCHAOS_DECOHERENCE_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>

#include "error.hpp"
#include "noise_spectra.hpp"
#include "signal.hpp"

namespace qchaos {

/// Lag kernel of the bath on a uniform grid s_k = k ds.
///
/// `c[k]` is C(s_k) = int J(w) exp(-i w s_k) dw. For the time integration the kernel
/// K(s) = C(s) exp(i omega_ref s) is also stored as interval moments
///   w0[k] = int_{s_k}^{s_k+ds} K(s) (1 - u) ds,  w1[k] = int K(s) u ds,  u = (s - s_k)/ds,
/// evaluated exactly in s, so a modulation phasor only needs to be interpolated linearly.
struct BathCorrelation {
  double ds = 0.0;
  double omega_ref = 1.0;
  std::vector<cplx> c;
  std::vector<cplx> w0;
  std::vector<cplx> w1;
  double achieved_tolerance = 0.0;
  std::size_t nodes = 0;

  std::size_t lags() const noexcept { return c.size(); }
};

namespace detail {

/// int_0^1 (1-u) e^{z u} du and int_0^1 u e^{z u} du for purely imaginary z.
inline std::pair<cplx, cplx> linear_moments(cplx z) {
  if (std::abs(z) < 0.25) {
    // sum z^m / (m+2)!  and  sum z^m / (m! (m+2))
    cplx a = 0.0, b = 0.0, zm = 1.0;
    double fact = 1.0;  // m!
    for (int m = 0; m < 18; ++m) {
      if (m > 0) fact *= m;
      a += zm / (fact * (m + 1) * (m + 2));
      b += zm / (fact * (m + 2));
      zm *= z;
    }
    return {a, b};
  }
  const cplx ez = std::exp(z);
  return {(ez - 1.0 - z) / (z * z), (z * ez - ez + 1.0) / (z * z)};
}

/// Panel edges over [lo, hi]: geometric ratio <= 2 (for 1/w), table knots, and widths
/// no larger than `max_width`.
inline std::vector<double> panel_edges(const SpectralDensity& sd, double max_width,
                                       std::span<const double> extra_cuts = {}) {
  std::vector<double> cuts{sd.domain_lo(), sd.domain_hi()};
  for (double b : sd.breakpoints()) cuts.push_back(b);
  for (double b : extra_cuts)
    if (b > sd.domain_lo() && b < sd.domain_hi()) cuts.push_back(b);
  for (double w = 2.0 * sd.domain_lo(); w < sd.domain_hi(); w *= 2.0) cuts.push_back(w);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  std::vector<double> edges{cuts.front()};
  for (std::size_t i = 1; i < cuts.size(); ++i) {
    const double a = cuts[i - 1], b = cuts[i];
    const int parts = std::max(1, static_cast<int>(std::ceil((b - a) / max_width)));
    for (int p = 1; p <= parts; ++p) edges.push_back(p == parts ? b : a + (b - a) * p / parts);
  }
  return edges;
}

struct QuadratureNodes {
  std::vector<double> omega;
  std::vector<double> weight;  // quadrature weight times J(omega)
};

inline QuadratureNodes gauss_nodes(const SpectralDensity& sd, double max_width,
                                   std::span<const double> extra_cuts = {}) {
  using rule = boost::math::quadrature::gauss<double, 16>;
  const auto edges = panel_edges(sd, max_width, extra_cuts);
  QuadratureNodes q;
  const auto& abscissa = rule::abscissa();
  const auto& weights = rule::weights();
  for (std::size_t p = 1; p < edges.size(); ++p) {
    const double a = edges[p - 1], b = edges[p];
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    for (std::size_t i = 0; i < abscissa.size(); ++i) {
      const double x = abscissa[i];
      // boost stores the non-negative half of a symmetric rule
      const int signs = (x == 0.0) ? 1 : 2;
      for (int s = 0; s < signs; ++s) {
        const double w = mid + (s == 0 ? x : -x) * half;
        q.omega.push_back(w);
        q.weight.push_back(weights[i] * half * sd(w));
      }
    }
  }
  return q;
}

/// Accumulate C, w0, w1 for all lags from a fixed node set.
inline void accumulate_kernel(const QuadratureNodes& q, double ds, double omega_ref,
                              std::size_t lags, std::vector<cplx>& c, std::vector<cplx>& w0,
                              std::vector<cplx>& w1) {
  c.assign(lags, 0.0);
  w0.assign(lags, 0.0);
  w1.assign(lags, 0.0);
  constexpr std::size_t resync = 256;
  for (std::size_t j = 0; j < q.omega.size(); ++j) {
    const double w = q.omega[j];
    const double wt = q.weight[j];
    const auto [ma, mb] = linear_moments(cplx(0.0, (omega_ref - w) * ds));
    const cplx a = wt * ds * ma, b = wt * ds * mb;
    const cplx step = std::polar(1.0, -w * ds);
    cplx p = 1.0;
    for (std::size_t k = 0; k < lags; ++k) {
      if (k % resync == 0) p = std::polar(1.0, -w * ds * static_cast<double>(k));
      c[k] += wt * p;
      w0[k] += a * p;
      w1[k] += b * p;
      p *= step;
    }
  }
  for (std::size_t k = 0; k < lags; ++k) {
    const cplx rot = std::polar(1.0, omega_ref * ds * static_cast<double>(k));
    w0[k] *= rot;
    w1[k] *= rot;
  }
}

}  // namespace detail

/// Lag kernel for lags 0..s_max. Composite 16-point Gauss-Legendre with panels at most half
/// an oscillation wide at s_max; the panel width is halved until two successive
/// refinements agree to `tol` relative to the total bath power.
inline BathCorrelation bath_correlation(const SpectralDensity& sd, double s_max, double ds,
                                        double omega_ref = 1.0, double tol = 1e-9) {
  detail::require(ds > 0.0 && std::isfinite(ds), "bath_correlation: ds must be positive");
  detail::require(s_max >= 0.0 && std::isfinite(s_max), "bath_correlation: s_max must be >= 0");
  detail::require(ds <= 2.0 * std::numbers::pi / (20.0 * sd.domain_hi()) * (1.0 + 1e-12),
                  "bath_correlation: ds must resolve the fastest bath frequency (ds <= 2pi/(20 w_c2))");
  const std::size_t lags = static_cast<std::size_t>(std::llround(s_max / ds)) + 1;

  BathCorrelation bc;
  bc.ds = ds;
  bc.omega_ref = omega_ref;
  const double scale = std::max(total_power(sd), 1e-300);
  if (sd.amplitude() == 0.0) {
    bc.c.assign(lags, 0.0);
    bc.w0.assign(lags, 0.0);
    bc.w1.assign(lags, 0.0);
    return bc;
  }

  // the oscillation rate in omega is the lag (for c) or lag + ds (for the moments)
  double width = std::min(sd.domain_hi() - sd.domain_lo(),
                          std::numbers::pi / std::max(s_max + ds, 1.0));
  // probe lags used for the refinement test: a spread including the largest
  std::vector<std::size_t> probes;
  for (std::size_t k : {std::size_t{0}, lags / 7, lags / 3, lags / 2, (2 * lags) / 3, lags - 1})
    probes.push_back(std::min(k, lags - 1));

  auto probe_values = [&](const detail::QuadratureNodes& q) {
    std::vector<cplx> out;
    for (std::size_t k : probes) {
      const double s = ds * static_cast<double>(k);
      cplx acc = 0.0, acc0 = 0.0;
      const auto zrot = std::polar(1.0, omega_ref * s);
      for (std::size_t j = 0; j < q.omega.size(); ++j) {
        acc += q.weight[j] * std::polar(1.0, -q.omega[j] * s);
        const auto [ma, mb] = detail::linear_moments(cplx(0.0, (omega_ref - q.omega[j]) * ds));
        acc0 += q.weight[j] * ds * (ma + mb) * std::polar(1.0, -q.omega[j] * s);
      }
      out.push_back(acc);
      out.push_back(acc0 * zrot);
    }
    return out;
  };

  detail::QuadratureNodes nodes = detail::gauss_nodes(sd, width);
  std::vector<cplx> current = probe_values(nodes);
  double achieved = INFINITY;
  for (int refine = 0; refine < 8; ++refine) {
    detail::QuadratureNodes finer = detail::gauss_nodes(sd, 0.5 * width);
    std::vector<cplx> next = probe_values(finer);
    double diff = 0.0;
    for (std::size_t i = 0; i < next.size(); ++i) diff = std::max(diff, std::abs(next[i] - current[i]));
    achieved = diff / scale;
    if (achieved <= tol) break;
    nodes = std::move(finer);
    current = std::move(next);
    width *= 0.5;
  }
  if (achieved > tol)
    throw numerical_error("bath_correlation", "quadrature did not converge, achieved relative error " +
                                                  std::to_string(achieved));
  bc.achieved_tolerance = achieved;
  bc.nodes = nodes.omega.size();
  detail::accumulate_kernel(nodes, ds, omega_ref, lags, bc.c, bc.w0, bc.w1);
  return bc;
}

struct RateSeries {
  double dt = 0.0;
  std::vector<double> gamma;        // Gamma_q(t)
  std::vector<double> delta_omega;  // Delta omega_q(t)
};

/// Modified rate and shift under the accumulated phase Phi(t):
///   I(t) = int_0^t K(t - t') exp(i (Phi(t) - Phi(t'))) dt',
///   Gamma_q = 2 Re I,  Delta omega_q = (1/2) Im I.
/// Product integration over the stored lag moments; O(N^2).
inline RateSeries gamma_delta(const BathCorrelation& corr, double omega_q, const Signal& phi) {
  const std::size_t n = phi.size();
  if (std::abs(phi.dt - corr.ds) > 1e-12 * corr.ds)
    throw config_error("gamma_delta: grid mismatch, phase dt " + std::to_string(phi.dt) +
                       " vs lag step " + std::to_string(corr.ds));
  if (n > corr.lags())
    throw config_error("gamma_delta: grid mismatch, bath correlation covers " +
                       std::to_string(corr.lags()) + " lags but the phase has " + std::to_string(n) +
                       " samples");
  if (std::abs(omega_q - corr.omega_ref) > 1e-12 * std::max(1.0, std::abs(omega_q)))
    throw config_error("gamma_delta: kernel was built for a different qubit frequency");

  std::vector<cplx> q(n);
  for (std::size_t i = 0; i < n; ++i) q[i] = std::polar(1.0, -phi.values[i]);

  RateSeries r{phi.dt, std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)};
  for (std::size_t m = 1; m < n; ++m) {
    cplx acc = 0.0;
    const cplx* w0 = corr.w0.data();
    const cplx* w1 = corr.w1.data();
    for (std::size_t k = 0; k < m; ++k) acc += w0[k] * q[m - k] + w1[k] * q[m - k - 1];
    acc *= std::conj(q[m]);
    r.gamma[m] = 2.0 * acc.real();
    r.delta_omega[m] = 0.5 * acc.imag();
  }
  return r;
}

/// Unmodulated closed forms:
///   Gamma_q0(t) = 2 int J sin((w_q - w) t)/(w_q - w) dw,
///   Delta omega_q0(t) = int J [1 - cos((w_q - w) t)] / (2 (w_q - w)) dw.
/// Composite 16-point Gauss-Legendre, panels at most half an oscillation wide at the last
/// sample and cut at w_q; checked against a halved panel width at probe times.
inline RateSeries gamma_unmodified(const SpectralDensity& sd, double omega_q, double dt,
                                   std::size_t samples, double tol = 1e-11) {
  detail::require(dt > 0.0, "gamma_unmodified: dt must be positive");
  RateSeries r{dt, std::vector<double>(samples, 0.0), std::vector<double>(samples, 0.0)};
  if (sd.amplitude() == 0.0 || samples < 2) return r;
  const double scale = std::max(total_power(sd), 1e-300);
  const double t_max = dt * static_cast<double>(samples - 1);

  const double cut[] = {omega_q};
  auto nodes_for = [&](double width) { return detail::gauss_nodes(sd, width, cut); };
  // i (1 - e^{i x}) / d with x = d t, as (sin x, 1 - cos x) / d
  auto value = [&](const detail::QuadratureNodes& q, double t) {
    cplx sum = 0.0;
    for (std::size_t j = 0; j < q.omega.size(); ++j) {
      const double d = omega_q - q.omega[j];
      const double x = d * t;
      if (std::abs(x) < 1e-3) {
        const cplx ix(0.0, x);
        sum += q.weight[j] * t * (1.0 + ix / 2.0 + ix * ix / 6.0 + ix * ix * ix / 24.0);
      } else {
        const double h = std::sin(0.5 * x);
        sum += q.weight[j] * cplx(std::sin(x), 2.0 * h * h) / d;
      }
    }
    return sum;
  };

  const double width = std::min(sd.domain_hi() - sd.domain_lo(), std::numbers::pi / std::max(t_max, 1.0));
  const auto nodes = nodes_for(width);
  const auto check = nodes_for(0.5 * width);
  double diff = 0.0;
  for (double t : {t_max, 0.5 * t_max, t_max / 3.0, std::min(t_max, 1.0)})
    diff = std::max(diff, std::abs(value(nodes, t) - value(check, t)) / std::max(1.0, t));
  if (diff > tol * scale)
    throw numerical_error("gamma_unmodified", "quadrature did not converge, relative error " +
                                                  std::to_string(diff / scale));

  for (std::size_t i = 1; i < samples; ++i) {
    const cplx sum = value(nodes, dt * static_cast<double>(i));
    r.gamma[i] = 2.0 * sum.real();
    r.delta_omega[i] = 0.5 * sum.imag();
  }
  return r;
}

using DensityMatrix = std::array<std::array<cplx, 2>, 2>;

/// (|0> + |1>)/sqrt(2)
inline DensityMatrix plus_state() {
  return {{{cplx(0.5), cplx(0.5)}, {cplx(0.5), cplx(0.5)}}};
}

inline void validate(const DensityMatrix& rho) {
  const double tol = 1e-10;
  detail::require(std::abs(rho[0][0].imag()) < tol && std::abs(rho[1][1].imag()) < tol,
                  "qubit state: diagonal must be real");
  detail::require(std::abs(rho[0][1] - std::conj(rho[1][0])) < tol, "qubit state: not Hermitian");
  detail::require(std::abs(rho[0][0].real() + rho[1][1].real() - 1.0) < tol, "qubit state: trace != 1");
  detail::require(rho[0][0].real() >= -tol && rho[1][1].real() >= -tol, "qubit state: negative population");
  detail::require(std::norm(rho[0][1]) <= rho[0][0].real() * rho[1][1].real() + tol,
                  "qubit state: not positive semidefinite");
}

struct QubitEvolution {
  double dt = 0.0;
  std::vector<double> cxy;        // <S_x>^2 + <S_y>^2 with S = sigma/2, equal to |rho01|^2
  std::vector<double> excited;    // population of |1>, zero-temperature relaxation
  std::vector<cplx> rho01;
  std::size_t negative_gamma_samples = 0;
};

/// rho01(t) = rho01(0) exp(-1/2 int Gamma - i int (w_q + Delta w)) sqrt(M(t)).
inline QubitEvolution evolve_qubit(std::span<const double> gamma, std::span<const double> delta_omega,
                                   std::optional<std::span<const double>> echo_magnitude,
                                   const DensityMatrix& rho0, double omega_q, double dt) {
  validate(rho0);
  detail::require(gamma.size() == delta_omega.size(), "evolve_qubit: gamma and shift grids differ");
  if (echo_magnitude)
    detail::require(echo_magnitude->size() == gamma.size(), "evolve_qubit: echo grid differs");
  detail::require(dt > 0.0, "evolve_qubit: dt must be positive");

  const std::size_t n = gamma.size();
  QubitEvolution q;
  q.dt = dt;
  q.cxy.resize(n);
  q.excited.resize(n);
  q.rho01.resize(n);
  const auto decay = cumulative_trapezoid(gamma, dt);
  const auto shift = cumulative_trapezoid(delta_omega, dt);
  for (std::size_t i = 0; i < n; ++i) {
    if (gamma[i] < 0.0) ++q.negative_gamma_samples;
    const double t = dt * static_cast<double>(i);
    double amp = std::exp(-0.5 * decay[i]);
    if (echo_magnitude) amp *= std::sqrt(std::max(0.0, (*echo_magnitude)[i]));
    q.rho01[i] = rho0[0][1] * amp * std::polar(1.0, -(omega_q * t + shift[i]));
    q.cxy[i] = std::norm(q.rho01[i]);
    q.excited[i] = rho0[1][1].real() * std::exp(-decay[i]);
  }
  return q;
}

/// Decay rate of C_xy: negated least-squares slope of ln C_xy over [t_a, t_b].
inline double average_rate(std::span<const double> cxy, double dt, double t_a, double t_b) {
  detail::require(dt > 0.0 && t_b > t_a, "average_rate: empty window");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t cnt = 0;
  for (std::size_t i = 0; i < cxy.size(); ++i) {
    const double t = dt * static_cast<double>(i);
    if (t < t_a - 1e-12 * dt || t > t_b + 1e-12 * dt) continue;
    if (!(cxy[i] > 0.0))
      throw numerical_error("average_rate", "non-positive coherence at t = " + std::to_string(t));
    const double y = std::log(cxy[i]);
    sx += t;
    sy += y;
    sxx += t * t;
    sxy += t * y;
    ++cnt;
  }
  detail::require(cnt >= 2, "average_rate: fewer than two samples in window");
  const double nn = static_cast<double>(cnt);
  const double slope = (nn * sxy - sx * sy) / (nn * sxx - sx * sx);
  return -slope;
}

}  // namespace qchaos

#endif
