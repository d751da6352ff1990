#include <cmath>
#include <numbers>
#include <random>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <gtest/gtest.h>

#include <qchaos/decoherence.hpp>

using namespace qchaos;

namespace {

constexpr double pi = std::numbers::pi;

/// Midpoint Riemann sum of J(w) e^{-i w s} over the domain.
cplx riemann_correlation(const SpectralDensity& sd, double s, std::size_t panels) {
  const double a = sd.domain_lo(), b = sd.domain_hi(), h = (b - a) / static_cast<double>(panels);
  cplx sum = 0.0;
  for (std::size_t k = 0; k < panels; ++k) {
    const double w = a + (static_cast<double>(k) + 0.5) * h;
    sum += sd(w) * std::polar(1.0, -w * s);
  }
  return sum * h;
}

/// 2 int J sin((w_q - w) t)/(w_q - w) dw by adaptive Gauss-Kronrod on fine panels.
double gamma0_oracle(const SpectralDensity& sd, double omega_q, double t) {
  auto f = [&](double w) {
    const double d = omega_q - w;
    return std::abs(d * t) < 1e-8 ? sd(w) * t : sd(w) * std::sin(d * t) / d;
  };
  const double a = sd.domain_lo(), b = sd.domain_hi();
  const int panels = static_cast<int>(std::ceil((b - a) * t / pi)) + 1;
  double sum = 0.0;
  for (int p = 0; p < panels; ++p)
    sum += boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
        f, a + (b - a) * p / panels, a + (b - a) * (p + 1) / panels, 5, 1e-13);
  return 2.0 * sum;
}

}  // namespace

TEST(BathCorrelation, ZeroLagIsTotalPower) {
  const auto sd = make_spectral_density(NoiseKind::OneOverF, 0.1, 0.01, 1.0);
  const auto c = bath_correlation(sd, 10.0, 0.05);
  EXPECT_NEAR(c.c[0].real(), 0.1 * std::log(100.0), 1e-10);
  EXPECT_NEAR(c.c[0].imag(), 0.0, 1e-15);
}

TEST(BathCorrelation, ZeroAmplitude) {
  const auto sd = make_spectral_density(NoiseKind::Ohmic, 0.0, 0.5, 1.5);
  const auto c = bath_correlation(sd, 10.0, 0.05);
  for (auto v : c.c) EXPECT_EQ(v, cplx(0.0, 0.0));
}

TEST(BathCorrelation, RiemannOracleAtRandomLags) {
  std::mt19937_64 rng(3);
  for (auto kind : {NoiseKind::OneOverF, NoiseKind::Ohmic, NoiseKind::SubOhmic, NoiseKind::SuperOhmic}) {
    const auto sd = make_spectral_density(kind, 0.3, 0.05, 1.8);
    const double ds = 0.05, s_max = 200.0;
    const auto c = bath_correlation(sd, s_max, ds);
    const double scale = total_power(sd);
    std::uniform_int_distribution<std::size_t> lag(0, c.lags() - 1);
    for (int i = 0; i < 10; ++i) {
      const std::size_t k = lag(rng);
      const cplx oracle = riemann_correlation(sd, ds * static_cast<double>(k), 1000000);
      EXPECT_LT(std::abs(c.c[k] - oracle) / scale, 1e-7) << to_string(kind) << " lag " << k;
    }
  }
}

TEST(BathCorrelation, RejectsCoarseLagStep) {
  const auto sd = make_spectral_density(NoiseKind::Ohmic, 1.0, 0.5, 10.0);
  EXPECT_THROW(bath_correlation(sd, 10.0, 0.1), config_error);
}

TEST(GammaUnmodified, ZeroAtOrigin) {
  const auto sd = make_spectral_density(NoiseKind::Ohmic, 1.0, 0.5, 1.5);
  const auto r = gamma_unmodified(sd, 1.0, 0.05, 100);
  EXPECT_EQ(r.gamma[0], 0.0);
  EXPECT_EQ(r.delta_omega[0], 0.0);
}

TEST(GammaUnmodified, SymmetricBathHasNoShift) {
  const auto sd = make_spectral_density(NoiseKind::Tabulated, 1.0, 0, 0, 5.0,
                                        {{0.6, 0.0}, {0.8, 1.0}, {1.0, 2.0}, {1.2, 1.0}, {1.4, 0.0}});
  const auto r = gamma_unmodified(sd, 1.0, 0.05, 4000);
  for (double d : r.delta_omega) EXPECT_LT(std::abs(d), 1e-10);
}

TEST(GammaUnmodified, LongTimeLimitAndOracle) {
  const auto sd = make_spectral_density(NoiseKind::Ohmic, 1.0, 2.0 / 3.0, 1.5, 5.0);
  const double dt = 0.05;
  const std::size_t n = 20001;  // t = 1000
  const auto r = gamma_unmodified(sd, 1.0, dt, n);
  const double t = dt * static_cast<double>(n - 1);
  EXPECT_NEAR(r.gamma.back(), gamma0_oracle(sd, 1.0, t), 1e-9);
  EXPECT_NEAR(r.gamma[4000], gamma0_oracle(sd, 1.0, 200.0), 1e-9);
  // sinc -> delta; the finite domain leaves an O(1/t) oscillating remainder
  EXPECT_NEAR(r.gamma.back(), 2.0 * pi * std::exp(-0.2), 2e-2);
}

TEST(GammaDelta, ReducesToUnmodified) {
  for (auto kind : {NoiseKind::OneOverF, NoiseKind::Ohmic, NoiseKind::SubOhmic, NoiseKind::SuperOhmic}) {
    const auto sd = make_spectral_density(kind, 0.2, 0.3, 1.7);
    const double dt = 0.05;
    const std::size_t n = 2001;
    const auto corr = bath_correlation(sd, dt * (n - 1), dt, 1.0);
    const auto mod = gamma_delta(corr, 1.0, Signal{dt, std::vector<double>(n, 0.0)});
    const auto nat = gamma_unmodified(sd, 1.0, dt, n);
    double scale = 0.0, err = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      scale = std::max({scale, std::abs(nat.gamma[i]), std::abs(nat.delta_omega[i])});
      err = std::max({err, std::abs(mod.gamma[i] - nat.gamma[i]), std::abs(mod.delta_omega[i] - nat.delta_omega[i])});
    }
    EXPECT_LT(err / scale, 1e-8) << to_string(kind);
  }
}

TEST(GammaDelta, ConstantShiftMovesTheResonance) {
  // Phi = c t is a static detuning: the result equals the unmodified rate at w_q + c,
  // up to the sampled phase factor, O((c dt)^2 / 12)
  const auto sd = make_spectral_density(NoiseKind::Ohmic, 0.2, 0.3, 1.7);
  const double dt = 0.05, c = 0.2;
  const std::size_t n = 1001;
  Signal phi{dt, std::vector<double>(n)};
  for (std::size_t i = 0; i < n; ++i) phi.values[i] = c * phi.time(i);
  const auto mod = gamma_delta(bath_correlation(sd, dt * (n - 1), dt, 1.0), 1.0, phi);
  const auto ref = gamma_unmodified(sd, 1.0 + c, dt, n);
  for (std::size_t i = 0; i < n; i += 50) EXPECT_NEAR(mod.gamma[i], ref.gamma[i], c * c * dt * dt / 6.0 * std::abs(ref.gamma[i]) + 1e-9);
}

TEST(GammaDelta, GridAndFrequencyMismatch) {
  const auto sd = make_spectral_density(NoiseKind::Ohmic, 0.2, 0.3, 1.7);
  const auto corr = bath_correlation(sd, 10.0, 0.05, 1.0);
  EXPECT_THROW(gamma_delta(corr, 1.0, Signal{0.025, std::vector<double>(100, 0.0)}), config_error);
  EXPECT_THROW(gamma_delta(corr, 1.0, Signal{0.05, std::vector<double>(1000, 0.0)}), config_error);
  EXPECT_THROW(gamma_delta(corr, 1.1, Signal{0.05, std::vector<double>(100, 0.0)}), config_error);
}

TEST(EvolveQubit, NoDecayKeepsCoherence) {
  std::vector<double> zero(500, 0.0);
  const auto q = evolve_qubit(zero, zero, std::nullopt, plus_state(), 1.0, 0.1);
  for (double c : q.cxy) EXPECT_NEAR(c, 0.25, 1e-15);
}

TEST(EvolveQubit, ConstantRate) {
  const double g = 0.3, dt = 0.01;
  std::vector<double> gamma(2000, g), zero(2000, 0.0);
  const auto q = evolve_qubit(gamma, zero, std::nullopt, plus_state(), 1.0, dt);
  for (std::size_t i = 0; i < q.cxy.size(); ++i) EXPECT_NEAR(q.cxy[i], 0.25 * std::exp(-g * dt * i), 1e-8);
}

TEST(EvolveQubit, EchoMultipliesCoherence) {
  std::vector<double> zero(100, 0.0), m(100, 0.5);
  const auto q = evolve_qubit(zero, zero, std::span<const double>(m), plus_state(), 1.0, 0.1);
  EXPECT_NEAR(q.cxy[50], 0.125, 1e-15);
}

TEST(EvolveQubit, NegativeRatesAreKept) {
  std::vector<double> gamma{0.0, -0.1, -0.1, 0.2}, zero(4, 0.0);
  const auto q = evolve_qubit(gamma, zero, std::nullopt, plus_state(), 1.0, 0.1);
  EXPECT_EQ(q.negative_gamma_samples, 2u);
  EXPECT_GT(q.cxy[2], 0.25);
}

TEST(EvolveQubit, RejectsInvalidState) {
  DensityMatrix bad = plus_state();
  bad[0][0] = 0.7;
  std::vector<double> zero(4, 0.0);
  EXPECT_THROW(evolve_qubit(zero, zero, std::nullopt, bad, 1.0, 0.1), config_error);
}

TEST(AverageRate, ExactExponentialAndConstant) {
  const double g = 0.0371, dt = 0.05;
  std::vector<double> c(4000), flat(4000, 0.25);
  for (std::size_t i = 0; i < c.size(); ++i) c[i] = 0.25 * std::exp(-g * dt * i);
  EXPECT_NEAR(average_rate(c, dt, 20.0, 199.95), g, 1e-10);
  EXPECT_NEAR(average_rate(flat, dt, 20.0, 199.95), 0.0, 1e-14);
  EXPECT_THROW(average_rate(c, dt, 50.0, 20.0), config_error);
}
