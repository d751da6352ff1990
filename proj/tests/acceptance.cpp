// Acceptance criteria C1-C9. One PASS/FAIL line per criterion; exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include <qchaos/scenario.hpp>

using namespace qchaos;
namespace fs = std::filesystem;

namespace {

constexpr double pi = std::numbers::pi;

// tolerances
constexpr double kC1RelTol = 1e-8;
constexpr double kC2RelTol = 0.05;
constexpr double kC3AbsTol = 1e-8;
constexpr double kC5MaxRatio = 0.1;
constexpr double kC6MaxSpread = 2.0;
constexpr double kC6ReferenceNaturalHz = 0.58e6;
constexpr double kC7RelTol = 0.2;
constexpr double kC8ParsevalTol = 0.01;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

DuffingParams reference_oscillator() { return {1.0, 0.25, 0.05, QuarticSign::Confining}; }

Outcome c1_reduction() {
  std::mt19937_64 rng(20240101);
  std::uniform_real_distribution<double> lo(0.05, 2.0), width(0.05, 2.0);
  const double dt = 0.05;
  const std::size_t n = 1201;
  double worst = 0.0;
  int cases = 0;
  for (auto kind : {NoiseKind::OneOverF, NoiseKind::Ohmic, NoiseKind::SubOhmic, NoiseKind::SuperOhmic}) {
    for (int i = 0; i < 20; ++i) {
      const double a = lo(rng), b = a + width(rng);
      const auto sd = make_spectral_density(kind, 0.1, a, b);
      const auto corr = bath_correlation(sd, dt * (n - 1), dt, 1.0);
      const auto mod = gamma_delta(corr, 1.0, Signal{dt, std::vector<double>(n, 0.0)});
      const auto nat = gamma_unmodified(sd, 1.0, dt, n);
      double scale = 0.0, err = 0.0;
      for (std::size_t k = 0; k < n; ++k) {
        scale = std::max({scale, std::abs(nat.gamma[k]), std::abs(nat.delta_omega[k])});
        err = std::max({err, std::abs(mod.gamma[k] - nat.gamma[k]), std::abs(mod.delta_omega[k] - nat.delta_omega[k])});
      }
      worst = std::max(worst, err / scale);
      ++cases;
    }
  }
  return {worst <= kC1RelTol, fmt("%d domains, worst relative deviation %.2e (tol %.0e)", cases, worst, kC1RelTol)};
}

Outcome c2_f_factor() {
  // Ohmic bath with half-bandwidth 0.1 around w_q; modulation at 20x that
  const auto sd = make_spectral_density(NoiseKind::Ohmic, 0.1, 0.9, 1.1);
  const double dt = 0.02, t_end = 400.0, wd = 2.0;
  const std::size_t n = static_cast<std::size_t>(std::llround(t_end / dt)) + 1;
  const auto corr = bath_correlation(sd, t_end, dt, 1.0);
  const auto nat = gamma_unmodified(sd, 1.0, dt, n);
  auto time_average = [&](const std::vector<double>& g) {
    const std::size_t from = n / 4;
    double s = 0.0;
    for (std::size_t k = from; k < n; ++k) s += g[k];
    return s / static_cast<double>(n - from);
  };
  const double g0 = time_average(nat.gamma);
  bool pass = true;
  std::string detail;
  for (double r : {0.02, 0.05, 0.1}) {
    Signal dq{dt, std::vector<double>(n)};
    for (std::size_t k = 0; k < n; ++k) dq.values[k] = r * wd * std::cos(wd * dq.time(k));
    const auto mod = gamma_delta(corr, 1.0, cumulative_phase(dq));
    const double ratio = time_average(mod.gamma) / g0;
    const double f = f_from_sinusoids({{r * wd, wd}}).value;
    const double dev = std::abs(ratio / f - 1.0);
    pass = pass && dev <= kC2RelTol;
    detail += fmt("A/w=%.2f ratio %.5f vs F %.5f; ", r, ratio, f);
  }
  return {pass, detail + fmt("(tol %.0f%%)", 100 * kC2RelTol)};
}

Outcome c3_echo() {
  DuffingParams lin{1.0, 0.0, 0.05, QuarticSign::Confining};
  const DriveParams off{0.0, 0.7, 0.0};
  const double g = 0.1, t_end = 100.0;  // g t up to 10
  double worst = 0.0;
  bool converged = true;
  for (double a : {0.5, 1.0, 1.5, 2.0}) {
    FockConfig cfg{40, 0.05, cplx(a, 0.0)};
    const auto e = evolve_echo(lin, off, g, cfg, t_end);
    for (std::size_t i = 0; i < e.size(); ++i) {
      const cplx exact = std::exp(a * a * (std::exp(cplx(0.0, 2.0 * g * e.time(i))) - 1.0));
      worst = std::max(worst, std::abs(e.f01[i] - exact));
    }
    converged = converged && e.converged && convergence_check(lin, off, g, cfg, t_end).converged;
  }
  return {worst <= kC3AbsTol && converged,
          fmt("max |f01 - closed form| = %.2e (tol %.0e), Fock convergence %s", worst, kC3AbsTol,
              converged ? "ok" : "FAILED")};
}

Outcome c4_chaos() {
  std::vector<double> i0s;
  for (int k = 0; k <= 12; ++k) i0s.push_back(2.5 * k);
  double first_chaotic = NAN;
  bool lower_clean = true;
  double e5 = NAN, s5 = NAN, e30 = NAN, s30 = NAN;
  std::string trace;
  for (double i0 : i0s) {
    const auto est = largest_lyapunov(reference_oscillator(), DriveParams{i0, 0.7, 0.0});
    const bool chaotic = classify_regime(est.exponent, est.standard_error) == Regime::Chaotic;
    if (chaotic && std::isnan(first_chaotic)) first_chaotic = i0;
    if (i0 < 10.0 && chaotic) lower_clean = false;
    if (i0 == 5.0) e5 = est.exponent, s5 = est.standard_error;
    if (i0 == 30.0) e30 = est.exponent, s30 = est.standard_error;
    trace += fmt("%g:%+.3f ", i0, est.exponent);
  }
  const bool periodic5 = e5 - 2.0 * s5 <= 0.0;
  const bool chaotic30 = e30 > 0.0 && e30 - 2.0 * s30 > 0.0;
  const bool onset = first_chaotic >= 10.0 && first_chaotic <= 30.0 && lower_clean;
  return {periodic5 && chaotic30 && onset,
          fmt("omega_d=0.7: L(5)=%+.4f+-%.4f, L(30)=%+.4f+-%.4f, first chaotic I0=%g [", e5, s5, e30, s30,
              first_chaotic) + trace + "]"};
}

struct SuppressionData {
  std::vector<double> ratio_1f;                     // per realisation
  std::vector<std::vector<double>> rates;           // [noise][realisation] gammabar_qm
  std::vector<double> natural;                      // per noise
  double omega_q_hz = 0.0;
};

/// Shared by C5 and C6: eight realisations of the chaotic drive (initial offsets
/// alpha0 = 0.01 k), each bath in the default table.
SuppressionData chaotic_suppression() {
  Scenario base = scenario_from_json(json::object());
  base.drive.i0 = 30.0;
  SuppressionData d;
  d.omega_q_hz = base.omega_q_hz;
  std::vector<BathContext> baths;
  for (const auto& n : base.table_noises) baths.push_back(make_bath_context(base, n));
  d.rates.assign(baths.size(), {});
  for (const auto& b : baths) d.natural.push_back(b.natural.gammabar);
  for (int k = 0; k < 8; ++k) {
    Scenario sc = base;
    sc.alpha0 = cplx(0.01 * k, 0.0);
    const auto mod = make_modulation(sc);
    for (std::size_t j = 0; j < baths.size(); ++j)
      d.rates[j].push_back(modified_decoherence(sc, baths[j], mod.phase, std::nullopt).gammabar);
    d.ratio_1f.push_back(d.rates[0].back() / d.natural[0]);
  }
  return d;
}

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

Outcome c5_suppression(const SuppressionData& d) {
  const double m = mean(d.ratio_1f);
  const auto [lo, hi] = std::minmax_element(d.ratio_1f.begin(), d.ratio_1f.end());
  return {m <= kC5MaxRatio,
          fmt("1/f ensemble-mean ratio %.4f (single run %.4f, range %.4f-%.4f, %zu runs); gate <= %.2f, "
              "reference ~0.01 (suppression %.1fx vs ~100x)",
              m, d.ratio_1f[0], *lo, *hi, d.ratio_1f.size(), kC5MaxRatio, 1.0 / m)};
}

Outcome c6_table(const SuppressionData& d) {
  std::vector<double> rates;
  bool ordered = true;
  std::string detail;
  const char* names[] = {"1/f", "ohmic", "sub", "super"};
  for (std::size_t j = 0; j < d.rates.size(); ++j) {
    rates.push_back(mean(d.rates[j]));
    ordered = ordered && rates.back() < d.natural[j];
    detail += fmt("%s %.4f/%.4f; ", names[j], rates.back(), d.natural[j]);
  }
  const auto [lo, hi] = std::minmax_element(rates.begin(), rates.end());
  const double spread = *hi / *lo;
  const double natural_hz = d.natural[0] * d.omega_q_hz;
  const bool magnitude = natural_hz > kC6ReferenceNaturalHz / 10.0 && natural_hz < kC6ReferenceNaturalHz * 10.0;
  return {spread <= kC6MaxSpread && magnitude && ordered,
          std::string("modified/natural: ") + detail +
              fmt("spread %.3f (gate %.1f); 1/f natural %.3f MHz vs reference 0.58 MHz; ordering %s", spread,
                  kC6MaxSpread, natural_hz / 1e6, ordered ? "ok" : "violated")};
}

Outcome c7_routes() {
  const DriveParams drive{5.0, 0.7, 0.0};
  const double g = 0.003, t_end = 100.0, dt = 0.01;
  FockConfig cfg{50, dt, cplx(0.0, 0.0)};
  const auto echo = evolve_echo(reference_oscillator(), drive, g, cfg, t_end);
  if (!echo.converged) return {false, fmt("echo not converged, leak %.2e", echo.leak)};
  const double quantum = delta_q_quantum(echo).mean();
  const double semi = delta_q_semiclassical(simulate_classical(reference_oscillator(), drive, 0.0, t_end, dt), g).mean();
  const double dev = quantum / semi - 1.0;
  return {std::abs(dev) <= kC7RelTol,
          fmt("<delta_q> quantum %.5f vs semiclassical %.5f, deviation %+.1f%% (tol %.0f%%), N_F=%d leak %.1e",
              quantum, semi, 100 * dev, 100 * kC7RelTol, echo.dim, echo.leak)};
}

Outcome c8_spectra() {
  Scenario sc = scenario_from_json(json::object());
  const double wcd = omega_cd_for(sc, sc.noise);
  double band[2], parseval[2], windowed[2];
  int idx = 0;
  for (double i0 : {30.0, 5.0}) {
    sc.drive.i0 = i0;
    const auto mod = make_modulation(sc);
    const auto spec = psd(mod.delta_q, sc.spectrum.segments, sc.spectrum.overlap);
    band[idx] = spec.band_power(wcd);
    parseval[idx] = std::abs(spec.band_power(0.0) / mod.delta_q.mean_square() - 1.0);
    // diagnostic only: Hann-weighted segment energy, which the estimator reproduces exactly
    const std::size_t len = spec.segment_length, hop = static_cast<std::size_t>(std::llround(len * (1.0 - sc.spectrum.overlap)));
    double e = 0.0, w2 = 0.0;
    for (std::size_t i = 0; i < len; ++i) {
      const double w = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / len);
      w2 += w * w;
      for (std::size_t s = 0; s < spec.segments; ++s) e += w * w * std::pow(mod.delta_q.values[s * hop + i], 2);
    }
    windowed[idx] = std::abs(spec.band_power(0.0) / (e / (w2 * spec.segments)) - 1.0);
    ++idx;
  }
  const bool pass = band[0] > band[1] && parseval[0] <= kC8ParsevalTol && parseval[1] <= kC8ParsevalTol;
  return {pass, fmt("band power above omega_cd=%.2f: chaotic %.3e vs periodic %.3e; Parseval deviation %.2e / %.2e "
                    "(tol %.0f%%); vs windowed segment energy %.1e / %.1e",
                    wcd, band[0], band[1], parseval[0], parseval[1], 100 * kC8ParsevalTol, windowed[0],
                    windowed[1])};
}

Outcome c9_determinism() {
  Scenario sc = scenario_from_json(json::object());
  sc.time.t_end = 100.0 * pi;
  const auto d1 = fs::temp_directory_path() / "qchaos_acceptance_c9a";
  const auto d2 = fs::temp_directory_path() / "qchaos_acceptance_c9b";
  fs::remove_all(d1);
  fs::remove_all(d2);
  write_scenario_artifacts(run_scenario(sc), d1);
  const Scenario again = scenario_from_json(json::parse(io::read_file(d1 / "manifest.json")));
  write_scenario_artifacts(run_scenario(again), d2);
  int files = 0, same = 0;
  for (const auto& e : fs::directory_iterator(d1)) {
    if (e.path().extension() != ".csv") continue;
    ++files;
    same += io::read_file(e.path()) == io::read_file(d2 / e.path().filename());
  }
  return {files > 0 && files == same, fmt("%d/%d CSV artifacts bit-identical after rerun from manifest", same, files)};
}

}  // namespace

int main() {
  int failures = 0;
  auto run = [&](const char* id, const char* title, const std::function<Outcome()>& f) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = f();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    failures += !o.pass;
    std::printf("%s %s %s: %s [%.1f s]\n", id, o.pass ? "PASS" : "FAIL", title, o.detail.c_str(), secs);
    std::fflush(stdout);
  };

  run("C1", "reduction oracle", c1_reduction);
  run("C2", "F-factor law", c2_f_factor);
  run("C3", "echo closed form", c3_echo);
  run("C4", "chaos transition", c4_chaos);
  SuppressionData data;
  bool have_data = false;
  auto ensure = [&] {
    if (!have_data) {
      data = chaotic_suppression();
      have_data = true;
    }
  };
  run("C5", "suppression magnitude", [&] { ensure(); return c5_suppression(data); });
  run("C6", "table shape", [&] { ensure(); return c6_table(data); });
  run("C7", "delta_q route consistency", c7_routes);
  run("C8", "spectral contrast", c8_spectra);
  run("C9", "determinism and manifest", c9_determinism);
  std::printf("%d of 9 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
