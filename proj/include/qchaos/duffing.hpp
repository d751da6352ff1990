#ifndef QCHAOS_DUFFING_HPP
#define QCHAOS_DUFFING_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "error.hpp"
#include "signal.hpp"

namespace qchaos {

/// Sign of the quartic term in the oscillator Hamiltonian
///   H = omega_o a^+a + s (lambda/4)(a + a^+)^4 - I(t)(a + a^+)/sqrt(2).
/// AsWritten is s = -1 (unbounded, softening), Confining is s = +1.
enum class QuarticSign { AsWritten, Confining };

inline double sign_value(QuarticSign s) { return s == QuarticSign::Confining ? 1.0 : -1.0; }

inline std::string_view to_string(QuarticSign s) {
  return s == QuarticSign::Confining ? "confining" : "as_written";
}

inline QuarticSign quartic_sign_from_string(std::string_view s) {
  if (s == "confining" || s == "+") return QuarticSign::Confining;
  if (s == "as_written" || s == "-") return QuarticSign::AsWritten;
  throw config_error("unknown quartic_sign '" + std::string(s) + "'");
}

struct DuffingParams {
  double omega_o = 1.0;
  double lambda = 0.25;
  double gamma = 0.05;
  QuarticSign quartic_sign = QuarticSign::Confining;

  void validate() const {
    detail::require(std::isfinite(omega_o) && omega_o > 0.0, "duffing: omega_o must be positive");
    detail::require(std::isfinite(gamma) && gamma >= 0.0, "duffing: gamma must be >= 0");
    detail::require(std::isfinite(lambda), "duffing: lambda must be finite");
  }
};

/// I(t) = i0 cos(omega_d t + phase)
struct DriveParams {
  double i0 = 0.0;
  double omega_d = 0.7;
  double phase = 0.0;

  double operator()(double t) const { return i0 * std::cos(omega_d * t + phase); }
  double period() const { return 2.0 * std::numbers::pi / omega_d; }

  void validate() const {
    detail::require(std::isfinite(i0) && i0 >= 0.0, "drive: i0 must be >= 0");
    detail::require(std::isfinite(omega_d) && omega_d > 0.0, "drive: omega_d must be positive");
    detail::require(std::isfinite(phase), "drive: phase must be finite");
  }
};

struct Trajectory {
  double dt = 0.0;
  std::vector<cplx> alpha;  // alpha[i] at t = i*dt
  DuffingParams params;
  DriveParams drive;
  std::optional<double> escaped;  // time at which |alpha| crossed the escape bound

  std::size_t size() const noexcept { return alpha.size(); }
  double time(std::size_t i) const noexcept { return static_cast<double>(i) * dt; }
};

namespace detail {

/// Mean-field equation of motion for <a>, damping as amplitude decay -gamma/2.
inline cplx duffing_rhs(const DuffingParams& p, const DriveParams& d, double t, cplx a) {
  constexpr cplx I{0.0, 1.0};
  const double x = 2.0 * a.real();  // a + a*
  const double s = sign_value(p.quartic_sign);
  return -I * p.omega_o * a - I * (s * p.lambda * x * x * x) + I * (d(t) / std::numbers::sqrt2) -
         0.5 * p.gamma * a;
}

inline cplx rk4_step(const DuffingParams& p, const DriveParams& d, double t, cplx a, double dt) {
  const cplx k1 = duffing_rhs(p, d, t, a);
  const cplx k2 = duffing_rhs(p, d, t + 0.5 * dt, a + 0.5 * dt * k1);
  const cplx k3 = duffing_rhs(p, d, t + 0.5 * dt, a + 0.5 * dt * k2);
  const cplx k4 = duffing_rhs(p, d, t + dt, a + dt * k3);
  return a + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

/// Largest stable RK4 step we accept: 50 steps per fastest linear period.
inline double max_classical_step(const DuffingParams& p, const DriveParams& d) {
  return 2.0 * std::numbers::pi / (50.0 * std::max(p.omega_o, d.omega_d));
}

inline std::size_t step_count(double t_end, double dt) {
  return static_cast<std::size_t>(std::llround(t_end / dt));
}

}  // namespace detail

/// Fixed-step RK4 integration of the mean-field amplitude. Integration stops, and the
/// trajectory is flagged, once |alpha| exceeds `escape_bound`.
inline Trajectory simulate_classical(const DuffingParams& params, const DriveParams& drive,
                                     cplx alpha0, double t_end, double dt,
                                     double escape_bound = 1e3) {
  params.validate();
  drive.validate();
  detail::require(t_end > 0.0 && std::isfinite(t_end), "simulate_classical: t_end must be positive");
  detail::require(dt > 0.0, "simulate_classical: dt must be positive");
  detail::require(dt <= detail::max_classical_step(params, drive) * (1.0 + 1e-12),
                  "simulate_classical: dt exceeds 2*pi/(50*max(omega_o, omega_d))");
  detail::require(escape_bound > 0.0, "simulate_classical: escape bound must be positive");

  const std::size_t n = detail::step_count(t_end, dt);
  Trajectory tr{dt, {}, params, drive, std::nullopt};
  tr.alpha.reserve(n + 1);
  cplx a = alpha0;
  tr.alpha.push_back(a);
  for (std::size_t i = 0; i < n; ++i) {
    a = detail::rk4_step(params, drive, static_cast<double>(i) * dt, a, dt);
    if (!(std::abs(a) <= escape_bound)) {
      tr.escaped = static_cast<double>(i + 1) * dt;
      break;
    }
    tr.alpha.push_back(a);
  }
  return tr;
}

/// Semiclassical frequency modulation delta_q(t) = 2 g |alpha(t)|^2.
/// The factor 2 is the mean-field limit of the echo phase derivative dTheta/dt
/// (branches H +/- g n differ by 2 g n), so both delta_q routes share one convention.
inline Signal delta_q_semiclassical(const Trajectory& tr, double g_qo) {
  detail::require(g_qo >= 0.0, "delta_q_semiclassical: g_qo must be >= 0");
  if (tr.escaped)
    throw numerical_error("delta_q_semiclassical",
                          "trajectory escaped at t = " + std::to_string(*tr.escaped));
  Signal s{tr.dt, std::vector<double>(tr.alpha.size())};
  for (std::size_t i = 0; i < tr.alpha.size(); ++i) s.values[i] = 2.0 * g_qo * std::norm(tr.alpha[i]);
  return s;
}

struct LyapunovSettings {
  double t_transient_periods = 50.0;
  double t_measure_periods = 250.0;
  double renorm_periods = 1.0;  // renormalisation interval in drive periods
  int steps_per_period = 400;
  int blocks = 25;              // stderr is taken over this many renormalisation blocks
  double offset_norm = 1e-8;
  unsigned seed_offset = 0;     // selects the initial offset direction
  cplx alpha0{0.0, 0.0};
};

struct LyapunovEstimate {
  double exponent = 0.0;  // units of omega_q
  double standard_error = 0.0;
  std::size_t renormalisations = 0;
};

/// Benettin two-trajectory estimate of the largest Lyapunov exponent in the
/// (Re alpha, Im alpha) phase space.
inline LyapunovEstimate largest_lyapunov(const DuffingParams& params, const DriveParams& drive,
                                         const LyapunovSettings& s = {}) {
  params.validate();
  drive.validate();
  using detail::require;
  require(s.t_transient_periods >= 50.0, "largest_lyapunov: transient must be >= 50 drive periods");
  require(s.t_measure_periods >= 200.0, "largest_lyapunov: measurement must be >= 200 drive periods");
  require(s.renorm_periods > 0.0, "largest_lyapunov: renormalisation interval must be positive");
  require(s.blocks >= 2, "largest_lyapunov: need at least two blocks");
  require(s.offset_norm > 0.0, "largest_lyapunov: offset norm must be positive");

  const double period = drive.period();
  const double dt = period / s.steps_per_period;
  require(dt <= detail::max_classical_step(params, drive) * (1.0 + 1e-12),
          "largest_lyapunov: steps_per_period too small for the oscillator frequency");
  const auto renorm_steps =
      std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(s.renorm_periods * s.steps_per_period)));
  const auto transient_steps = static_cast<std::size_t>(std::llround(s.t_transient_periods * s.steps_per_period));
  const std::size_t n_renorm = static_cast<std::size_t>(
      std::llround(s.t_measure_periods * s.steps_per_period / static_cast<double>(renorm_steps)));
  require(n_renorm >= static_cast<std::size_t>(s.blocks), "largest_lyapunov: too few renormalisations");

  auto escaped = [](cplx a) { return !(std::abs(a) <= 1e3); };
  cplx ref = s.alpha0;
  std::size_t step = 0;
  for (; step < transient_steps; ++step) {
    ref = detail::rk4_step(params, drive, static_cast<double>(step) * dt, ref, dt);
    if (escaped(ref)) throw numerical_error("largest_lyapunov", "reference trajectory escaped in transient");
  }
  // golden-angle direction keyed by seed_offset
  const double angle = 2.399963229728653 * static_cast<double>(s.seed_offset);
  cplx other = ref + s.offset_norm * cplx(std::cos(angle), std::sin(angle));

  std::vector<double> logs;
  logs.reserve(n_renorm);
  for (std::size_t r = 0; r < n_renorm; ++r) {
    for (std::size_t k = 0; k < renorm_steps; ++k, ++step) {
      const double t = static_cast<double>(step) * dt;
      ref = detail::rk4_step(params, drive, t, ref, dt);
      other = detail::rk4_step(params, drive, t, other, dt);
    }
    if (escaped(ref) || escaped(other))
      throw numerical_error("largest_lyapunov", "trajectory escaped at t = " +
                                                    std::to_string(static_cast<double>(step) * dt));
    const cplx sep = other - ref;
    const double d = std::abs(sep);
    if (!(d > 0.0) || !std::isfinite(d))
      throw numerical_error("largest_lyapunov", "degenerate separation");
    logs.push_back(std::log(d / s.offset_norm));
    other = ref + sep * (s.offset_norm / d);
  }

  const double t_interval = static_cast<double>(renorm_steps) * dt;
  const std::size_t per_block = logs.size() / static_cast<std::size_t>(s.blocks);
  std::vector<double> rates;
  for (int b = 0; b < s.blocks; ++b) {
    double sum = 0.0;
    for (std::size_t k = 0; k < per_block; ++k) sum += logs[b * per_block + k];
    rates.push_back(sum / (static_cast<double>(per_block) * t_interval));
  }
  double total = 0.0;
  for (double l : logs) total += l;
  LyapunovEstimate est;
  est.renormalisations = logs.size();
  est.exponent = total / (static_cast<double>(logs.size()) * t_interval);
  double mean = 0.0;
  for (double r : rates) mean += r;
  mean /= static_cast<double>(rates.size());
  double var = 0.0;
  for (double r : rates) var += (r - mean) * (r - mean);
  var /= static_cast<double>(rates.size() - 1);
  est.standard_error = std::sqrt(var / static_cast<double>(rates.size()));
  return est;
}

enum class Regime { Periodic, Chaotic, Indeterminate };

inline std::string_view to_string(Regime r) {
  switch (r) {
    case Regime::Periodic: return "periodic";
    case Regime::Chaotic: return "chaotic";
    case Regime::Indeterminate: return "indeterminate";
  }
  return "indeterminate";
}

inline Regime classify_regime(double exponent, double standard_error) {
  if (exponent - 2.0 * standard_error > 0.0) return Regime::Chaotic;
  if (exponent + 2.0 * standard_error < 0.0) return Regime::Periodic;
  return Regime::Indeterminate;
}

}  // namespace qchaos

#endif
