#ifndef QCHAOS_CIRCUIT_HPP
#define QCHAOS_CIRCUIT_HPP

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "error.hpp"

namespace qchaos {

/// SCB + current-biased dc-SQUID parameters. Energies are E/h in Hz, the bias current
/// amplitude in amperes. `n_g0` is the reduced gate-charge amplitude C_g V_g0 / 2e.
struct CircuitParams {
  double e_c = 0.0;       // SCB charging energy
  double e_j = 0.0;       // SCB Josephson energy
  double et_c = 0.0;      // SQUID charging energy
  double et_j = 0.0;      // SQUID junction energy (per junction)
  double phi_e = 0.0;     // external flux phase, radians
  double n_g0 = 0.0;
  double omega_g = 0.0;   // gate drive frequency
  double i_e_amp = 0.0;
  double i_e_freq = 0.0;
};

struct RegimeCheck {
  std::string name;
  double value = 0.0;
  double threshold = 0.0;
  bool passed = false;
  std::string detail;
};

/// Inequalities the two-level / Duffing reduction relies on, each as a ratio against
/// `threshold` (the reading of "much less than").
inline std::vector<RegimeCheck> validate_regime(const CircuitParams& cp, double threshold = 0.1) {
  std::vector<RegimeCheck> out;
  {
    std::string zeros;
    auto note = [&](double v, const char* n) {
      if (!(v > 0.0)) zeros += std::string(zeros.empty() ? "" : ", ") + n;
    };
    note(cp.e_c, "e_c");
    note(cp.e_j, "e_j");
    note(cp.et_c, "et_c");
    note(cp.et_j, "et_j");
    note(cp.omega_g, "omega_g");
    out.push_back({"energies_positive", zeros.empty() ? 1.0 : 0.0, 1.0, zeros.empty(),
                   zeros.empty() ? "all energies positive" : "zero or negative: " + zeros});
  }
  const double omega_q = cp.e_j - cp.omega_g;
  out.push_back({"qubit_frequency_positive", omega_q, 0.0, omega_q > 0.0,
                 "omega_q = E_J - omega_g = " + std::to_string(omega_q) + " Hz"});
  {
    const double ratio = omega_q > 0.0 ? std::abs(cp.n_g0) * cp.e_c / omega_q : INFINITY;
    out.push_back({"gate_drive_small", ratio, threshold, ratio <= threshold,
                   "C_g V_g0 E_C / 2e relative to omega_q"});
  }
  out.push_back({"zero_external_flux", std::abs(cp.phi_e), 0.0, std::abs(cp.phi_e) < 1e-12,
                 "reduction assumes no flux through the coupled SCB-SQUID loop"});
  const double c = std::cos(0.5 * cp.phi_e);
  out.push_back({"squid_nondegenerate", std::abs(c), 0.0, std::abs(c) > 1e-12,
                 "cos(phi_e/2) must not vanish"});
  {
    const double ej_eff = 2.0 * cp.et_j * std::abs(c);
    const double ratio = ej_eff > 0.0 ? cp.et_c / ej_eff : INFINITY;
    out.push_back({"squid_deep_well", ratio, threshold, ratio <= threshold,
                   "SQUID charging energy relative to 2 Et_J cos(phi_e/2)"});
  }
  return out;
}

struct SquidLevels {
  double e0 = 0.0, e1 = 0.0, e2 = 0.0;
  int charge_cutoff = 0;
};

/// Lowest levels of Et_C n^2 - 2 Et_J cos(phi_e/2) cos(phi) in the charge basis
/// n = -cutoff..cutoff (tridiagonal).
inline SquidLevels squid_levels(double et_c, double et_j, double phi_e, int charge_cutoff = 200) {
  const int dim = 2 * charge_cutoff + 1;
  Eigen::VectorXd diag(dim);
  Eigen::VectorXd off = Eigen::VectorXd::Constant(dim - 1, -et_j * std::cos(0.5 * phi_e));
  for (int i = 0; i < dim; ++i) {
    const double n = i - charge_cutoff;
    diag(i) = et_c * n * n;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(diag, off, Eigen::EigenvaluesOnly);
  const auto& ev = solver.eigenvalues();
  return {ev(0), ev(1), ev(2), charge_cutoff};
}

struct EffectiveParams {
  // SI (Hz, i.e. angular frequency / 2pi)
  double omega_q_hz = 0.0;
  double omega_o_hz = 0.0;
  double lambda_hz = 0.0;
  double harmonic_omega_o_hz = 0.0;  // sqrt(2 Et_C * 2 Et_J cos(phi_e/2))
  double anharmonicity_hz = 0.0;     // (E1 - E0) - (E2 - E1)
  double phi_zpf = 0.0;
  // normalised to omega_q
  double omega_o = 0.0;
  double lambda = 0.0;
  double g_qo = 0.0;
  double i0 = 0.0;
  double omega_d = 0.0;
  SquidLevels levels;
  std::string lambda_convention;
  std::string drive_convention;
};

/// Maps circuit parameters to the oscillator model in units of omega_q = E_J - omega_g.
///
/// omega_o and lambda come from diagonalising the SQUID well; lambda is the coefficient
/// of -(lambda/4)(a + a^+)^4, whose first-order level shifts give (E1-E0)-(E2-E1) = 3 lambda.
/// The bias term -phi_0 I_e phi maps to I0 = sqrt(2) phi_zpf I_e / 2e with
/// phi_zpf = (Et_C / (2 E_J'))^(1/4), E_J' = 2 Et_J cos(phi_e/2). g_qo is not fixed by the
/// circuit reduction and is taken from `g_qo_override` (omega_q units).
inline EffectiveParams effective_params(const CircuitParams& cp, double g_qo_override = 0.03,
                                        double threshold = 0.1, int charge_cutoff = 200) {
  if (std::abs(std::cos(0.5 * cp.phi_e)) <= 1e-12)
    throw config_error("effective_params: degenerate SQUID well, cos(phi_e/2) = 0");
  std::string failed;
  for (const auto& c : validate_regime(cp, threshold))
    if (!c.passed && c.name != "zero_external_flux")
      failed += (failed.empty() ? "" : "; ") + c.name + " (" + c.detail + ")";
  if (!failed.empty()) throw config_error("effective_params: regime conditions failed: " + failed);

  const SquidLevels lv = squid_levels(cp.et_c, cp.et_j, cp.phi_e, charge_cutoff);
  const SquidLevels lv2 = squid_levels(cp.et_c, cp.et_j, cp.phi_e, 2 * charge_cutoff);
  for (auto [a, b] : {std::pair{lv.e0, lv2.e0}, std::pair{lv.e1, lv2.e1}, std::pair{lv.e2, lv2.e2}})
    if (std::abs(a - b) > 1e-10 * std::max(std::abs(b), std::abs(lv2.e1 - lv2.e0)))
      throw numerical_error("effective_params", "charge-basis truncation not converged");

  constexpr double electron_charge = 1.602176634e-19;
  EffectiveParams ep;
  ep.levels = lv;
  ep.omega_q_hz = cp.e_j - cp.omega_g;
  ep.omega_o_hz = lv.e1 - lv.e0;
  ep.anharmonicity_hz = (lv.e1 - lv.e0) - (lv.e2 - lv.e1);
  ep.lambda_hz = ep.anharmonicity_hz / 3.0;
  const double ej_eff = 2.0 * cp.et_j * std::cos(0.5 * cp.phi_e);
  ep.harmonic_omega_o_hz = std::sqrt(2.0 * cp.et_c * ej_eff);
  ep.phi_zpf = std::pow(cp.et_c / (2.0 * ej_eff), 0.25);
  // I_e / 2e is an angular frequency; divide by 2pi for Hz
  const double i0_hz = std::numbers::sqrt2 * ep.phi_zpf * cp.i_e_amp / (2.0 * electron_charge) /
                       (2.0 * std::numbers::pi);
  ep.omega_o = ep.omega_o_hz / ep.omega_q_hz;
  ep.lambda = ep.lambda_hz / ep.omega_q_hz;
  ep.g_qo = g_qo_override;
  ep.i0 = i0_hz / ep.omega_q_hz;
  ep.omega_d = cp.i_e_freq / ep.omega_q_hz;
  ep.lambda_convention =
      "H = omega_o a^+a - (lambda/4)(a+a^+)^4; lambda = ((E1-E0)-(E2-E1))/3 (first order)";
  ep.drive_convention = "I(t)(a+a^+)/sqrt(2) with I0 = sqrt(2) phi_zpf I_e/(2e), phi_zpf = (Et_C/(2 E_J'))^(1/4)";
  return ep;
}

}  // namespace qchaos

#endif
