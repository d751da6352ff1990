#include <cmath>
#include <numbers>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include <qchaos/circuit.hpp>

using namespace qchaos;

namespace {

// reference circuit; E_C, n_g0 and the bias current are illustrative
CircuitParams reference_circuit() {
  CircuitParams c;
  c.e_c = 5e9;
  c.e_j = 5e9;
  c.omega_g = 4.999e9;
  c.et_c = 0.188e6;
  c.et_j = 12.032e6;
  c.phi_e = 0.0;
  c.n_g0 = 2e-6;  // drive ratio n_g0 E_C / omega_q = 0.01
  c.i_e_amp = 1e-9;
  c.i_e_freq = 0.7e6;
  return c;
}

/// Dense charge-basis diagonalisation, n = -200..200
Eigen::VectorXd dense_levels(double et_c, double ej_eff) {
  const int cut = 200, dim = 2 * cut + 1;
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(dim, dim);
  for (int i = 0; i < dim; ++i) {
    h(i, i) = et_c * (i - cut) * (i - cut);
    if (i + 1 < dim) h(i, i + 1) = h(i + 1, i) = -0.5 * ej_eff;
  }
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(h, Eigen::EigenvaluesOnly).eigenvalues();
}

}  // namespace

TEST(EffectiveParams, QubitFrequencyFromReference) {
  const auto ep = effective_params(reference_circuit());
  EXPECT_NEAR(ep.omega_q_hz, 1e6, 1e-3);
  EXPECT_NEAR(ep.omega_d, 0.7, 1e-12);
  EXPECT_DOUBLE_EQ(ep.g_qo, 0.03);
}

TEST(EffectiveParams, DegenerateWell) {
  auto c = reference_circuit();
  c.phi_e = std::numbers::pi;
  EXPECT_THROW(effective_params(c), config_error);
}

TEST(EffectiveParams, DenseDiagonalisationOracle) {
  const auto ep = effective_params(reference_circuit());
  const auto ev = dense_levels(0.188e6, 2.0 * 12.032e6);
  EXPECT_NEAR(ep.omega_o_hz, ev(1) - ev(0), 1e-6);
  EXPECT_NEAR(ep.anharmonicity_hz, (ev(1) - ev(0)) - (ev(2) - ev(1)), 1e-6);
  // golden values
  EXPECT_NEAR(ep.omega_o_hz, 2960233.6745094, 1e-3);
  EXPECT_NEAR(ep.lambda_hz, 16259.963658873, 1e-3);
  EXPECT_NEAR(ep.omega_o, 2.9602336745094, 1e-9);
  EXPECT_NEAR(ep.lambda, 0.016259963658873, 1e-12);
}

TEST(EffectiveParams, DeepWellHarmonicLimit) {
  // Et_C n^2 - E_J' cos(phi): omega_o -> sqrt(2 Et_C E_J') - Et_C / 4, anharmonicity -> Et_C / 4
  const auto ep = effective_params(reference_circuit());
  const double ej = 2.0 * 12.032e6, ec = 0.188e6;
  EXPECT_NEAR(ep.harmonic_omega_o_hz, std::sqrt(2.0 * ec * ej), 1e-6);
  EXPECT_NEAR(ep.omega_o_hz, std::sqrt(2.0 * ec * ej) - ec / 4.0, 2e-3 * ep.omega_o_hz);
  EXPECT_NEAR(ep.anharmonicity_hz, ec / 4.0, 0.05 * ec / 4.0);
  EXPECT_NEAR(ep.lambda_hz, ep.anharmonicity_hz / 3.0, 1e-9);
}

TEST(EffectiveParams, DriveScalesWithCurrent) {
  auto c = reference_circuit();
  const double i1 = effective_params(c).i0;
  c.i_e_amp *= 3.0;
  EXPECT_NEAR(effective_params(c).i0, 3.0 * i1, 1e-12 * i1);
}

TEST(SquidLevels, TruncationConverged) {
  const auto a = squid_levels(0.188e6, 12.032e6, 0.0, 200);
  const auto b = squid_levels(0.188e6, 12.032e6, 0.0, 400);
  EXPECT_NEAR(a.e1 - a.e0, b.e1 - b.e0, 1e-6);
}

TEST(ValidateRegime, ReferenceValuesPass) {
  for (const auto& c : validate_regime(reference_circuit())) EXPECT_TRUE(c.passed) << c.name << ": " << c.detail;
}

TEST(ValidateRegime, StrongGateDriveFails) {
  auto c = reference_circuit();
  c.n_g0 = 1e-4;  // ratio 0.5
  bool found = false;
  for (const auto& r : validate_regime(c))
    if (r.name == "gate_drive_small") {
      found = true;
      EXPECT_FALSE(r.passed);
      EXPECT_NEAR(r.value, 0.5, 1e-9);
    }
  EXPECT_TRUE(found);
  EXPECT_THROW(effective_params(c), config_error);
}

TEST(ValidateRegime, ZeroEnergiesNamed) {
  CircuitParams c;
  const auto checks = validate_regime(c);
  ASSERT_FALSE(checks.empty());
  EXPECT_EQ(checks[0].name, "energies_positive");
  EXPECT_FALSE(checks[0].passed);
  EXPECT_NE(checks[0].detail.find("e_c"), std::string::npos);
  EXPECT_NE(checks[0].detail.find("et_j"), std::string::npos);
}
