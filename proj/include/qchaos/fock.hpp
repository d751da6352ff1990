#ifndef QCHAOS_FOCK_HPP
#define QCHAOS_FOCK_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/special_functions/gamma.hpp>

#include "duffing.hpp"
#include "error.hpp"
#include "signal.hpp"

namespace qchaos {

struct FockConfig {
  int dim = 48;
  double dt = 0.01;
  cplx alpha0{0.0, 0.0};
};

/// Poisson mass of |alpha> on levels n >= dim.
inline double coherent_tail_mass(cplx alpha, int dim) {
  const double mu = std::norm(alpha);
  if (mu == 0.0) return 0.0;
  return boost::math::gamma_p(static_cast<double>(dim), mu);
}

inline void validate(const FockConfig& cfg) {
  detail::require(cfg.dim >= 8, "fock: dimension must be >= 8");
  detail::require(cfg.dim <= 512, "fock: dimension must be <= 512 (dense propagation)");
  detail::require(cfg.dt > 0.0 && std::isfinite(cfg.dt), "fock: dt must be positive");
  const double tail = coherent_tail_mass(cfg.alpha0, cfg.dim);
  detail::require(tail < 1e-12, "fock: initial coherent state tail mass " + std::to_string(tail) +
                                    " beyond the truncation exceeds 1e-12");
}

inline Eigen::VectorXcd coherent_state(cplx alpha, int dim) {
  Eigen::VectorXcd v(dim);
  v(0) = std::exp(-0.5 * std::norm(alpha));
  for (int n = 1; n < dim; ++n) v(n) = v(n - 1) * alpha / std::sqrt(static_cast<double>(n));
  return v;
}

namespace detail {

inline Eigen::MatrixXd position_operator(int dim) {  // a + a^+
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(dim, dim);
  for (int n = 1; n < dim; ++n) x(n - 1, n) = x(n, n - 1) = std::sqrt(static_cast<double>(n));
  return x;
}

/// (a + a^+)^4 with exact matrix elements inside the truncated block: built in a
/// padded space and cut back, so the top levels are not corrupted by truncation.
inline Eigen::MatrixXd quartic_operator(int dim) {
  const Eigen::MatrixXd x = position_operator(dim + 4);
  const Eigen::MatrixXd x2 = x * x;
  return (x2 * x2).topLeftCorner(dim, dim);
}

/// Static parts of the oscillator Hamiltonian, cached per dimension.
struct FockOperators {
  explicit FockOperators(int dim)
      : number(Eigen::VectorXd::LinSpaced(dim, 0.0, dim - 1.0)),
        position(position_operator(dim)),
        quartic(quartic_operator(dim)) {}

  Eigen::VectorXd number;
  Eigen::MatrixXd position;
  Eigen::MatrixXd quartic;
};

inline Eigen::MatrixXd shifted_hamiltonian(const FockOperators& ops, const DuffingParams& p,
                                           double g_shift, double drive_value) {
  Eigen::MatrixXd h = (sign_value(p.quartic_sign) * p.lambda / 4.0) * ops.quartic -
                      (drive_value / std::numbers::sqrt2) * ops.position;
  h.diagonal() += (p.omega_o + g_shift) * ops.number;
  return h;
}

}  // namespace detail

/// H_Duf + g_shift a^+a at drive value I, on the truncated number basis (real symmetric).
inline Eigen::MatrixXd build_shifted_hamiltonian(const DuffingParams& params, double g_shift,
                                                 double drive_value, int dim) {
  params.validate();
  detail::require(dim >= 2, "build_shifted_hamiltonian: dimension must be >= 2");
  return detail::shifted_hamiltonian(detail::FockOperators(dim), params, g_shift, drive_value);
}

inline Eigen::MatrixXd build_shifted_hamiltonian(const DuffingParams& params, double g_shift,
                                                 const DriveParams& drive, double t, int dim) {
  return build_shifted_hamiltonian(params, g_shift, drive(t), dim);
}

struct EchoResult {
  double dt = 0.0;
  std::vector<cplx> f01;
  std::vector<double> sigma;  // ln|f01|
  std::vector<double> theta;  // unwrapped arg f01
  int dim = 0;
  double leak = 0.0;          // max population on the top two levels, either branch
  double max_norm_drift = 0.0;
  bool converged = true;

  std::size_t size() const noexcept { return f01.size(); }
  double time(std::size_t i) const noexcept { return static_cast<double>(i) * dt; }
  /// Loschmidt echo M(t) = |f01|^2 = exp(2 sigma)
  std::vector<double> loschmidt() const {
    std::vector<double> m(sigma.size());
    for (std::size_t i = 0; i < m.size(); ++i) m[i] = std::exp(2.0 * sigma[i]);
    return m;
  }
};

/// Drive-resolution bound on the propagation step: each step is exponentiated exactly,
/// so only the time dependence of the drive needs resolving.
inline double max_echo_step(const DuffingParams& p, const DriveParams& d) {
  return 2.0 * std::numbers::pi / (100.0 * std::max(p.omega_o, d.omega_d));
}

/// Echo factor f01(t) = <psi_+(t)|psi_-(t)>, psi_{+/-} evolved from |alpha0> under the
/// time-ordered propagators of H_Duf +/- g a^+a (closed system, midpoint exponentials).
inline EchoResult evolve_echo(const DuffingParams& params, const DriveParams& drive, double g_qo,
                              const FockConfig& cfg, double t_end) {
  params.validate();
  drive.validate();
  validate(cfg);
  detail::require(t_end > 0.0 && std::isfinite(t_end), "evolve_echo: t_end must be positive");
  detail::require(cfg.dt <= max_echo_step(params, drive) * (1.0 + 1e-12),
                  "evolve_echo: dt exceeds 2*pi/(100*max(omega_o, omega_d))");

  const int dim = cfg.dim;
  const detail::FockOperators ops(dim);
  const std::size_t steps = detail::step_count(t_end, cfg.dt);

  Eigen::VectorXcd plus = coherent_state(cfg.alpha0, dim);
  plus /= plus.norm();
  Eigen::VectorXcd minus = plus;

  EchoResult r;
  r.dt = cfg.dt;
  r.dim = dim;
  r.f01.reserve(steps + 1);
  r.f01.push_back(plus.dot(minus));

  auto leak_of = [dim](const Eigen::VectorXcd& v) {
    return std::norm(v(dim - 1)) + std::norm(v(dim - 2));
  };
  r.leak = std::max(leak_of(plus), leak_of(minus));

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(dim);
  auto propagate = [&](Eigen::VectorXcd& psi, double g_shift, double drive_value) {
    solver.compute(detail::shifted_hamiltonian(ops, params, g_shift, drive_value));
    const Eigen::MatrixXd& v = solver.eigenvectors();
    Eigen::VectorXcd c = v.transpose() * psi;
    for (int k = 0; k < dim; ++k) c(k) *= std::polar(1.0, -solver.eigenvalues()(k) * cfg.dt);
    const double before = psi.norm();
    psi = v * c;
    r.max_norm_drift = std::max(r.max_norm_drift, std::abs(psi.norm() - before));
  };

  for (std::size_t i = 0; i < steps; ++i) {
    const double i_mid = drive((static_cast<double>(i) + 0.5) * cfg.dt);
    propagate(plus, g_qo, i_mid);
    propagate(minus, -g_qo, i_mid);
    r.leak = std::max({r.leak, leak_of(plus), leak_of(minus)});
    r.f01.push_back(plus.dot(minus));  // dot() conjugates the left operand
  }

  r.converged = r.leak <= 1e-6;
  r.sigma.resize(r.f01.size());
  r.theta.resize(r.f01.size());
  double prev = 0.0;
  for (std::size_t i = 0; i < r.f01.size(); ++i) {
    r.sigma[i] = std::log(std::abs(r.f01[i]));
    const double raw = std::arg(r.f01[i]);
    if (i == 0) {
      r.theta[i] = raw;
    } else {
      double d = raw - prev;
      d -= 2.0 * std::numbers::pi * std::round(d / (2.0 * std::numbers::pi));
      r.theta[i] = r.theta[i - 1] + d;
    }
    prev = raw;
  }
  return r;
}

/// delta_q(t) = dTheta/dt by central differences, one-sided at the ends.
inline Signal delta_q_quantum(const EchoResult& echo) {
  if (!echo.converged)
    throw numerical_error("delta_q_quantum", "echo not converged, truncation leak " +
                                                 std::to_string(echo.leak));
  const auto n = echo.theta.size();
  detail::require(n >= 2, "delta_q_quantum: need at least two samples");
  Signal s{echo.dt, std::vector<double>(n)};
  const auto& th = echo.theta;
  s.values[0] = (th[1] - th[0]) / echo.dt;
  s.values[n - 1] = (th[n - 1] - th[n - 2]) / echo.dt;
  for (std::size_t i = 1; i + 1 < n; ++i) s.values[i] = (th[i + 1] - th[i - 1]) / (2.0 * echo.dt);
  return s;
}

struct FockConvergenceReport {
  int dim = 0;
  int dim_refined = 0;
  double max_difference = 0.0;
  double leak = 0.0;
  double leak_refined = 0.0;
  bool converged = false;
};

/// Reruns the echo at ceil(1.25 dim) and compares f01 samplewise.
inline FockConvergenceReport convergence_check(const DuffingParams& params, const DriveParams& drive,
                                               double g_qo, const FockConfig& cfg, double t_end) {
  validate(cfg);
  FockConfig refined = cfg;
  refined.dim = static_cast<int>(std::ceil(1.25 * cfg.dim));
  const EchoResult a = evolve_echo(params, drive, g_qo, cfg, t_end);
  const EchoResult b = evolve_echo(params, drive, g_qo, refined, t_end);
  FockConvergenceReport rep;
  rep.dim = cfg.dim;
  rep.dim_refined = refined.dim;
  rep.leak = a.leak;
  rep.leak_refined = b.leak;
  for (std::size_t i = 0; i < a.size(); ++i)
    rep.max_difference = std::max(rep.max_difference, std::abs(a.f01[i] - b.f01[i]));
  rep.converged = rep.max_difference < 1e-6;
  return rep;
}

}  // namespace qchaos

#endif
