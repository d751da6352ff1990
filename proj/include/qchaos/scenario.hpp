#ifndef QCHAOS_SCENARIO_HPP
#define QCHAOS_SCENARIO_HPP

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "circuit.hpp"
#include "decoherence.hpp"
#include "duffing.hpp"
#include "error.hpp"
#include "fock.hpp"
#include "io.hpp"
#include "noise_spectra.hpp"
#include "spectral.hpp"

namespace qchaos {

using json = nlohmann::json;

inline constexpr const char* kVersion = "0.1.0";

struct TimeSettings {
  double t_end = 400.0 * std::numbers::pi;  // 200 qubit periods
  double dt = 0.05;
  std::size_t max_samples = 200000;
};

struct SpectrumSettings {
  std::size_t segments = 16;
  double overlap = 0.5;
  std::optional<double> omega_cd;
};

/// Everything a run depends on. All frequencies in units of omega_q; `omega_q_hz`
/// (omega_q / 2pi) only converts rates for reporting.
struct Scenario {
  std::string name = "scenario";
  SpectralDensity noise = make_spectral_density(NoiseKind::OneOverF, 0.1, 0.01, 1.0);
  DuffingParams duffing;
  DriveParams drive{30.0, 0.7, 0.0};
  cplx alpha0{0.0, 0.0};
  double escape_bound = 1e3;
  double g_qo = 0.03;
  double omega_q = 1.0;
  double omega_q_hz = 1e6;
  TimeSettings time;
  std::optional<FockConfig> fock;
  std::optional<double> fock_t_end;
  DensityMatrix rho0 = plus_state();
  SpectrumSettings spectrum;
  LyapunovSettings lyapunov;
  std::array<double, 2> window{0.2, 1.0};  // fractions of t_end for the rate fit
  std::vector<SpectralDensity> table_noises;
  std::optional<CircuitParams> circuit;
  int workers = 1;

  std::size_t samples() const {
    return static_cast<std::size_t>(std::llround(time.t_end / time.dt)) + 1;
  }
};

// ---------------------------------------------------------------------------
// config <-> json

namespace detail {

inline void check_keys(const json& j, std::string_view section, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw config_error(std::string(section) + ": expected an object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [k, v] : j.items())
    if (!ok.count(k)) throw config_error(std::string(section) + ": unknown key '" + k + "'");
}

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw config_error(std::string("bad value for '") + key + "': " + e.what());
  }
}

inline cplx complex_from_json(const json& j) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
    return {j[0].get<double>(), j[1].get<double>()};
  throw config_error("expected a complex number as [re, im]");
}

inline json complex_to_json(cplx z) { return json::array({z.real(), z.imag()}); }

}  // namespace detail

inline SpectralDensity noise_from_json(const json& j) {
  detail::check_keys(j, "noise", {"kind", "amplitude", "domain", "cutoff", "table"});
  const auto kind = noise_kind_from_string(detail::get_or<std::string>(j, "kind", "one_over_f"));
  const double amplitude = detail::get_or<double>(j, "amplitude", 1.0);
  const double cutoff = detail::get_or<double>(j, "cutoff", 5.0);
  std::vector<std::pair<double, double>> table;
  if (j.contains("table"))
    for (const auto& row : j.at("table")) {
      if (!row.is_array() || row.size() != 2) throw config_error("noise.table: rows must be [omega, J]");
      table.emplace_back(row[0].get<double>(), row[1].get<double>());
    }
  double lo = 0.0, hi = 0.0;
  if (kind != NoiseKind::Tabulated) {
    if (!j.contains("domain") || !j.at("domain").is_array() || j.at("domain").size() != 2)
      throw config_error("noise.domain: expected [lo, hi]");
    lo = j.at("domain")[0].get<double>();
    hi = j.at("domain")[1].get<double>();
  }
  return make_spectral_density(kind, amplitude, lo, hi, cutoff, std::move(table));
}

inline json to_json(const SpectralDensity& sd) {
  json j{{"kind", std::string(to_string(sd.kind()))},
         {"amplitude", sd.amplitude()},
         {"domain", {sd.domain_lo(), sd.domain_hi()}},
         {"cutoff", sd.cutoff()}};
  if (sd.kind() == NoiseKind::Tabulated) {
    json t = json::array();
    for (const auto& [w, v] : sd.table()) t.push_back({w, v});
    j["table"] = t;
    j.erase("domain");
  }
  return j;
}

inline CircuitParams circuit_from_json(const json& j) {
  detail::check_keys(j, "circuit", {"e_c", "e_j", "et_c", "et_j", "phi_e", "n_g0", "omega_g",
                                    "i_e_amp", "i_e_freq"});
  CircuitParams c;
  c.e_c = detail::get_or(j, "e_c", 0.0);
  c.e_j = detail::get_or(j, "e_j", 0.0);
  c.et_c = detail::get_or(j, "et_c", 0.0);
  c.et_j = detail::get_or(j, "et_j", 0.0);
  c.phi_e = detail::get_or(j, "phi_e", 0.0);
  c.n_g0 = detail::get_or(j, "n_g0", 0.0);
  c.omega_g = detail::get_or(j, "omega_g", 0.0);
  c.i_e_amp = detail::get_or(j, "i_e_amp", 0.0);
  c.i_e_freq = detail::get_or(j, "i_e_freq", 0.0);
  return c;
}

inline json to_json(const CircuitParams& c) {
  return {{"e_c", c.e_c},         {"e_j", c.e_j},         {"et_c", c.et_c},
          {"et_j", c.et_j},       {"phi_e", c.phi_e},     {"n_g0", c.n_g0},
          {"omega_g", c.omega_g}, {"i_e_amp", c.i_e_amp}, {"i_e_freq", c.i_e_freq}};
}

/// Reference noise rows: 1/f on [0.01, 1] omega_q and the Ohmic family on
/// [2/3, 3/2] omega_q with cutoff 5 omega_q. Ohmic-family prefactors put the natural
/// rates at the 0.35 / 0.35 / 0.36 : 0.58 proportions of the 1/f row.
inline std::vector<SpectralDensity> default_table_noises() {
  return {make_spectral_density(NoiseKind::OneOverF, 0.1, 0.01, 1.0),
          make_spectral_density(NoiseKind::Ohmic, 0.0369, 2.0 / 3.0, 1.5),
          make_spectral_density(NoiseKind::SubOhmic, 0.0369, 2.0 / 3.0, 1.5),
          make_spectral_density(NoiseKind::SuperOhmic, 0.0380, 2.0 / 3.0, 1.5)};
}

inline Scenario scenario_from_json(const json& root) {
  // a run manifest carries its scenario under "scenario"
  const json& j = root.contains("scenario") && root.contains("tool") ? root.at("scenario") : root;
  using detail::get_or;
  detail::check_keys(j, "scenario", {"name", "noise", "duffing", "drive", "coupling", "qubit", "time",
                                     "fock", "spectrum", "lyapunov", "average", "table", "circuit",
                                     "workers"});
  Scenario sc;
  sc.name = get_or<std::string>(j, "name", sc.name);
  if (j.contains("noise")) sc.noise = noise_from_json(j.at("noise"));
  if (j.contains("duffing")) {
    const auto& d = j.at("duffing");
    detail::check_keys(d, "duffing", {"omega_o", "lambda", "gamma", "quartic_sign", "alpha0", "escape_bound"});
    sc.duffing.omega_o = get_or(d, "omega_o", sc.duffing.omega_o);
    sc.duffing.lambda = get_or(d, "lambda", sc.duffing.lambda);
    sc.duffing.gamma = get_or(d, "gamma", sc.duffing.gamma);
    if (d.contains("quartic_sign")) sc.duffing.quartic_sign = quartic_sign_from_string(d.at("quartic_sign").get<std::string>());
    if (d.contains("alpha0")) sc.alpha0 = detail::complex_from_json(d.at("alpha0"));
    sc.escape_bound = get_or(d, "escape_bound", sc.escape_bound);
  }
  if (j.contains("drive")) {
    const auto& d = j.at("drive");
    detail::check_keys(d, "drive", {"i0", "omega_d", "phase"});
    sc.drive.i0 = get_or(d, "i0", sc.drive.i0);
    sc.drive.omega_d = get_or(d, "omega_d", sc.drive.omega_d);
    sc.drive.phase = get_or(d, "phase", sc.drive.phase);
  }
  if (j.contains("coupling")) {
    detail::check_keys(j.at("coupling"), "coupling", {"g_qo"});
    sc.g_qo = get_or(j.at("coupling"), "g_qo", sc.g_qo);
  }
  if (j.contains("qubit")) {
    const auto& q = j.at("qubit");
    detail::check_keys(q, "qubit", {"omega_q", "omega_q_hz", "rho0"});
    sc.omega_q = get_or(q, "omega_q", sc.omega_q);
    sc.omega_q_hz = get_or(q, "omega_q_hz", sc.omega_q_hz);
    if (q.contains("rho0")) {
      const auto& r = q.at("rho0");
      if (r.is_string()) {
        if (r.get<std::string>() != "plus") throw config_error("qubit.rho0: only \"plus\" is predefined");
        sc.rho0 = plus_state();
      } else {
        if (!r.is_array() || r.size() != 2 || r[0].size() != 2 || r[1].size() != 2)
          throw config_error("qubit.rho0: expected a 2x2 matrix of [re, im] entries");
        for (int a = 0; a < 2; ++a)
          for (int b = 0; b < 2; ++b) sc.rho0[a][b] = detail::complex_from_json(r[a][b]);
      }
    }
  }
  if (j.contains("time")) {
    const auto& t = j.at("time");
    detail::check_keys(t, "time", {"t_end", "dt", "max_samples"});
    sc.time.t_end = get_or(t, "t_end", sc.time.t_end);
    sc.time.dt = get_or(t, "dt", sc.time.dt);
    sc.time.max_samples = get_or<std::size_t>(t, "max_samples", sc.time.max_samples);
  }
  if (j.contains("fock") && !j.at("fock").is_null()) {
    const auto& f = j.at("fock");
    detail::check_keys(f, "fock", {"dim", "dt", "alpha0", "t_end"});
    FockConfig fc;
    fc.dim = get_or(f, "dim", fc.dim);
    fc.dt = get_or(f, "dt", fc.dt);
    if (f.contains("alpha0")) fc.alpha0 = detail::complex_from_json(f.at("alpha0"));
    sc.fock = fc;
    if (f.contains("t_end") && !f.at("t_end").is_null()) sc.fock_t_end = f.at("t_end").get<double>();
  }
  if (j.contains("spectrum")) {
    const auto& s = j.at("spectrum");
    detail::check_keys(s, "spectrum", {"segments", "overlap", "omega_cd"});
    sc.spectrum.segments = get_or<std::size_t>(s, "segments", sc.spectrum.segments);
    sc.spectrum.overlap = get_or(s, "overlap", sc.spectrum.overlap);
    if (s.contains("omega_cd") && !s.at("omega_cd").is_null()) sc.spectrum.omega_cd = s.at("omega_cd").get<double>();
  }
  if (j.contains("lyapunov")) {
    const auto& l = j.at("lyapunov");
    detail::check_keys(l, "lyapunov", {"transient_periods", "measure_periods", "renorm_periods",
                                       "steps_per_period", "blocks", "seed_offset"});
    auto& s = sc.lyapunov;
    s.t_transient_periods = get_or(l, "transient_periods", s.t_transient_periods);
    s.t_measure_periods = get_or(l, "measure_periods", s.t_measure_periods);
    s.renorm_periods = get_or(l, "renorm_periods", s.renorm_periods);
    s.steps_per_period = get_or(l, "steps_per_period", s.steps_per_period);
    s.blocks = get_or(l, "blocks", s.blocks);
    s.seed_offset = get_or(l, "seed_offset", s.seed_offset);
  }
  if (j.contains("average")) {
    detail::check_keys(j.at("average"), "average", {"window"});
    const auto& w = j.at("average").at("window");
    if (!w.is_array() || w.size() != 2) throw config_error("average.window: expected [from, to] fractions");
    sc.window = {w[0].get<double>(), w[1].get<double>()};
  }
  if (j.contains("table")) {
    detail::check_keys(j.at("table"), "table", {"noises"});
    for (const auto& n : j.at("table").at("noises")) sc.table_noises.push_back(noise_from_json(n));
  } else {
    sc.table_noises = default_table_noises();
  }
  if (j.contains("circuit") && !j.at("circuit").is_null()) sc.circuit = circuit_from_json(j.at("circuit"));
  sc.workers = get_or(j, "workers", sc.workers);
  sc.lyapunov.alpha0 = sc.alpha0;
  return sc;
}

/// Canonical, fully resolved form. Keys are sorted, so the dump is stable.
inline json to_json(const Scenario& sc) {
  json rho = json::array();
  for (const auto& row : sc.rho0)
    rho.push_back({detail::complex_to_json(row[0]), detail::complex_to_json(row[1])});
  json table = json::array();
  for (const auto& n : sc.table_noises) table.push_back(to_json(n));
  json j{{"name", sc.name},
         {"noise", to_json(sc.noise)},
         {"duffing",
          {{"omega_o", sc.duffing.omega_o},
           {"lambda", sc.duffing.lambda},
           {"gamma", sc.duffing.gamma},
           {"quartic_sign", std::string(to_string(sc.duffing.quartic_sign))},
           {"alpha0", detail::complex_to_json(sc.alpha0)},
           {"escape_bound", sc.escape_bound}}},
         {"drive", {{"i0", sc.drive.i0}, {"omega_d", sc.drive.omega_d}, {"phase", sc.drive.phase}}},
         {"coupling", {{"g_qo", sc.g_qo}}},
         {"qubit", {{"omega_q", sc.omega_q}, {"omega_q_hz", sc.omega_q_hz}, {"rho0", rho}}},
         {"time", {{"t_end", sc.time.t_end}, {"dt", sc.time.dt}, {"max_samples", sc.time.max_samples}}},
         {"fock", nullptr},
         {"spectrum",
          {{"segments", sc.spectrum.segments},
           {"overlap", sc.spectrum.overlap},
           {"omega_cd", sc.spectrum.omega_cd ? json(*sc.spectrum.omega_cd) : json(nullptr)}}},
         {"lyapunov",
          {{"transient_periods", sc.lyapunov.t_transient_periods},
           {"measure_periods", sc.lyapunov.t_measure_periods},
           {"renorm_periods", sc.lyapunov.renorm_periods},
           {"steps_per_period", sc.lyapunov.steps_per_period},
           {"blocks", sc.lyapunov.blocks},
           {"seed_offset", sc.lyapunov.seed_offset}}},
         {"average", {{"window", {sc.window[0], sc.window[1]}}}},
         {"table", {{"noises", table}}},
         {"circuit", sc.circuit ? to_json(*sc.circuit) : json(nullptr)},
         {"workers", sc.workers}};
  if (sc.fock)
    j["fock"] = {{"dim", sc.fock->dim},
                 {"dt", sc.fock->dt},
                 {"alpha0", detail::complex_to_json(sc.fock->alpha0)},
                 {"t_end", sc.fock_t_end ? json(*sc.fock_t_end) : json(nullptr)}};
  return j;
}

inline std::string scenario_hash(const Scenario& sc) { return io::fnv1a_hex(to_json(sc).dump()); }

/// `key=value` with a dotted path ("drive.i0=30"); the value is parsed as JSON when
/// possible, otherwise taken as a string.
inline void apply_override(json& config, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw config_error("override '" + assignment + "': expected key=value");
  std::string path = "/" + assignment.substr(0, eq);
  std::replace(path.begin(), path.end(), '.', '/');
  const std::string raw = assignment.substr(eq + 1);
  json value;
  try {
    value = json::parse(raw);
  } catch (const json::parse_error&) {
    value = raw;
  }
  json& target = config.contains("scenario") && config.contains("tool") ? config["scenario"] : config;
  target[json::json_pointer(path)] = value;
}

inline void validate(const Scenario& sc) {
  using detail::require;
  sc.duffing.validate();
  sc.drive.validate();
  require(sc.g_qo >= 0.0, "coupling.g_qo must be >= 0");
  require(sc.omega_q > 0.0, "qubit.omega_q must be positive");
  require(sc.omega_q_hz > 0.0, "qubit.omega_q_hz must be positive");
  require(sc.time.t_end > 0.0 && sc.time.dt > 0.0, "time: t_end and dt must be positive");
  require(sc.samples() <= sc.time.max_samples,
          "time: t_end/dt = " + std::to_string(sc.samples()) + " samples exceeds max_samples " +
              std::to_string(sc.time.max_samples));
  require(sc.window[0] >= 0.0 && sc.window[1] <= 1.0 && sc.window[0] < sc.window[1],
          "average.window must satisfy 0 <= from < to <= 1");
  validate(sc.rho0);
  if (sc.fock) {
    validate(*sc.fock);
    const double ratio = sc.time.dt / sc.fock->dt;
    require(std::abs(ratio - std::round(ratio)) < 1e-9 && std::round(ratio) >= 1.0,
            "fock.dt must divide time.dt so the echo lands on the scenario grid");
  }
  require(sc.workers >= 1, "workers must be >= 1");
}

// ---------------------------------------------------------------------------
// pipeline

namespace detail {

template <class F>
auto stage(const char* name, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const numerical_error&) {
    throw;
  } catch (const config_error& e) {
    throw config_error(std::string(name) + ": " + e.what());
  } catch (const std::exception& e) {
    throw numerical_error(name, e.what());
  }
}

}  // namespace detail

struct DecoherenceResult {
  RateSeries rates;
  QubitEvolution qubit;
  double gammabar = 0.0;  // C_xy decay rate; the rho01 rate is half of it
  std::string fingerprint;
};

/// Lag kernel and natural (unmodulated) result; depends only on bath, grid and qubit.
struct BathContext {
  SpectralDensity noise;
  BathCorrelation kernel;
  DecoherenceResult natural;
};

inline double omega_cd_for(const Scenario& sc, const SpectralDensity& noise) {
  return sc.spectrum.omega_cd.value_or(default_omega_cd(noise.domain_lo(), noise.domain_hi(), sc.omega_q));
}

inline BathContext make_bath_context(const Scenario& sc, const SpectralDensity& noise) {
  const std::size_t n = sc.samples();
  const double t_end = sc.time.dt * static_cast<double>(n - 1);
  BathContext ctx{noise, {}, {}};
  ctx.kernel = detail::stage("bath_correlation",
                             [&] { return bath_correlation(noise, t_end, sc.time.dt, sc.omega_q); });
  ctx.natural.rates = detail::stage("gamma_unmodified",
                                    [&] { return gamma_unmodified(noise, sc.omega_q, sc.time.dt, n); });
  ctx.natural.qubit = detail::stage("evolve_qubit", [&] {
    return evolve_qubit(ctx.natural.rates.gamma, ctx.natural.rates.delta_omega, std::nullopt, sc.rho0,
                        sc.omega_q, sc.time.dt);
  });
  ctx.natural.gammabar = detail::stage("average_rate", [&] {
    return average_rate(ctx.natural.qubit.cxy, sc.time.dt, sc.window[0] * t_end, sc.window[1] * t_end);
  });
  return ctx;
}

struct ModulationProducts {
  Trajectory trajectory;
  Signal delta_q;
  Signal phase;
};

inline ModulationProducts make_modulation(const Scenario& sc) {
  const std::size_t n = sc.samples();
  const double t_end = sc.time.dt * static_cast<double>(n - 1);
  ModulationProducts m;
  m.trajectory = detail::stage("simulate_classical", [&] {
    return simulate_classical(sc.duffing, sc.drive, sc.alpha0, t_end, sc.time.dt, sc.escape_bound);
  });
  m.delta_q = detail::stage("delta_q_semiclassical", [&] { return delta_q_semiclassical(m.trajectory, sc.g_qo); });
  m.phase = detail::stage("cumulative_phase", [&] { return cumulative_phase(m.delta_q); });
  return m;
}

inline DecoherenceResult modified_decoherence(const Scenario& sc, const BathContext& bath, const Signal& phase,
                                              const std::optional<std::vector<double>>& echo_m) {
  const double t_end = sc.time.dt * static_cast<double>(sc.samples() - 1);
  DecoherenceResult r;
  r.rates = detail::stage("gamma_delta", [&] { return gamma_delta(bath.kernel, sc.omega_q, phase); });
  r.qubit = detail::stage("evolve_qubit", [&] {
    std::optional<std::span<const double>> m;
    if (echo_m) m = std::span<const double>(*echo_m);
    return evolve_qubit(r.rates.gamma, r.rates.delta_omega, m, sc.rho0, sc.omega_q, sc.time.dt);
  });
  r.gammabar = detail::stage("average_rate", [&] {
    return average_rate(r.qubit.cxy, sc.time.dt, sc.window[0] * t_end, sc.window[1] * t_end);
  });
  return r;
}

struct ScenarioResult {
  Scenario scenario;
  ModulationProducts modulation;
  Spectrum spectrum;
  double omega_cd = 0.0;
  std::optional<CorrectionFactor> factor;
  std::optional<EchoResult> echo;
  DecoherenceResult modified;
  DecoherenceResult natural;
  std::string hash;

  double ratio() const { return modified.gammabar / natural.gammabar; }
};

/// simulate_classical -> delta_q -> Phi -> bath kernel -> Gamma/Delta (modified and
/// natural) -> qubit coherence -> fitted rates. Pure; see write_scenario_artifacts().
inline ScenarioResult run_scenario(const Scenario& sc) {
  detail::stage("config", [&] { validate(sc); return 0; });
  ScenarioResult res;
  res.scenario = sc;
  res.hash = scenario_hash(sc);
  const BathContext bath = make_bath_context(sc, sc.noise);
  res.modulation = make_modulation(sc);
  res.spectrum = detail::stage("psd", [&] {
    return psd(res.modulation.delta_q, sc.spectrum.segments, sc.spectrum.overlap);
  });
  res.omega_cd = omega_cd_for(sc, sc.noise);
  if (res.omega_cd < res.spectrum.nyquist())
    res.factor = detail::stage("correction_factor", [&] { return correction_factor(res.spectrum, res.omega_cd); });

  std::optional<std::vector<double>> echo_m;
  if (sc.fock) {
    res.echo = detail::stage("evolve_echo", [&] {
      return evolve_echo(sc.duffing, sc.drive, sc.g_qo, *sc.fock, sc.time.dt * static_cast<double>(sc.samples() - 1));
    });
    if (!res.echo->converged)
      throw numerical_error("evolve_echo", "truncation leak " + std::to_string(res.echo->leak) + " exceeds 1e-6");
    const auto stride = static_cast<std::size_t>(std::llround(sc.time.dt / sc.fock->dt));
    const auto full = res.echo->loschmidt();
    std::vector<double> m(sc.samples());
    for (std::size_t i = 0; i < m.size(); ++i) m[i] = full[i * stride];
    echo_m = std::move(m);
  }

  res.natural = bath.natural;
  res.modified = modified_decoherence(sc, bath, res.modulation.phase, echo_m);
  res.modified.fingerprint = res.hash;
  res.natural.fingerprint = res.hash;
  return res;
}

// ---------------------------------------------------------------------------
// artifacts

namespace detail {

inline std::string decoherence_csv(const DecoherenceResult& r) {
  io::CsvTable t({"t", "gamma", "delta_omega", "cxy"});
  for (std::size_t i = 0; i < r.rates.gamma.size(); ++i)
    t.add_row({r.rates.dt * static_cast<double>(i), r.rates.gamma[i], r.rates.delta_omega[i], r.qubit.cxy[i]});
  return t.str();
}

inline std::string trajectory_csv(const Trajectory& tr) {
  io::CsvTable t({"t", "re_alpha", "im_alpha"});
  for (std::size_t i = 0; i < tr.alpha.size(); ++i) t.add_row({tr.time(i), tr.alpha[i].real(), tr.alpha[i].imag()});
  return t.str();
}

inline std::string signal_csv(const Signal& s) {
  io::CsvTable t({"t", "value"});
  for (std::size_t i = 0; i < s.size(); ++i) t.add_row({s.time(i), s.values[i]});
  return t.str();
}

inline std::string spectrum_csv(const Spectrum& s) {
  io::CsvTable t({"omega", "S", "dB"});
  for (std::size_t i = 0; i < s.omega.size(); ++i) t.add_row({s.omega[i], s.power[i], s.db[i]});
  return t.str();
}

inline std::string echo_csv(const EchoResult& e) {
  io::CsvTable t({"t", "re_f01", "im_f01", "sigma", "theta"});
  for (std::size_t i = 0; i < e.size(); ++i)
    t.add_row({e.time(i), e.f01[i].real(), e.f01[i].imag(), e.sigma[i], e.theta[i]});
  return t.str();
}

inline const char* plot_script() {
  return R"PY(#!/usr/bin/env python3
"""Coherence and delta_q spectrum figures from the CSVs in this directory."""
import csv, os, sys
import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

here = os.path.dirname(os.path.abspath(__file__))

def load(name):
    with open(os.path.join(here, name)) as f:
        rows = list(csv.DictReader(f))
    return {k: [float(r[k]) for r in rows] for k in rows[0]}

tau = 2 * 3.141592653589793
mod, nat = load("decoherence.csv"), load("natural.csv")
fig, ax = plt.subplots(1, 2, figsize=(10, 4))
c0 = mod["cxy"][0]
ax[0].plot([t / tau for t in nat["t"]], [c / c0 for c in nat["cxy"]], "k-", label="natural")
ax[0].plot([t / tau for t in mod["t"]], [c / c0 for c in mod["cxy"]], "b-", label="modulated")
ax[0].set_xlabel("t / tau"); ax[0].set_ylabel("C_xy / C_xy(0)"); ax[0].legend()
spec = load("spectrum.csv")
ax[1].plot(spec["omega"][1:], spec["dB"][1:], "g-")
ax[1].set_xlabel("omega / omega_q"); ax[1].set_ylabel("S (dB)")
fig.tight_layout()
fig.savefig(os.path.join(here, "figures.png"), dpi=120)
)PY";
}

}  // namespace detail

/// Writes a set of named files; removes everything written so far if a write fails.
class ArtifactWriter {
public:
  explicit ArtifactWriter(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::filesystem::create_directories(dir_);
  }
  ArtifactWriter(const ArtifactWriter&) = delete;
  ArtifactWriter& operator=(const ArtifactWriter&) = delete;
  ~ArtifactWriter() {
    if (!committed_)
      for (const auto& p : written_) std::filesystem::remove(p);
  }

  void add(const std::string& name, const std::string& content) {
    io::write_file(dir_ / name, content);
    written_.push_back(dir_ / name);
    hashes_[name] = io::fnv1a_hex(content);
  }

  const json& hashes() const { return hashes_; }
  void commit() { committed_ = true; }

private:
  std::filesystem::path dir_;
  std::vector<std::filesystem::path> written_;
  json hashes_ = json::object();
  bool committed_ = false;
};

inline json summary_json(const ScenarioResult& r) {
  json s{{"gammabar", r.modified.gammabar},
         {"gammabar_rho01", 0.5 * r.modified.gammabar},
         {"gammabar0", r.natural.gammabar},
         {"gammabar0_rho01", 0.5 * r.natural.gammabar},
         {"ratio", r.ratio()},
         {"delta_q_mean", r.modulation.delta_q.mean()},
         {"omega_cd", r.omega_cd},
         {"F_predicted", r.factor ? json(r.factor->value) : json(nullptr)},
         {"F_truncation_bound", r.factor ? json(r.factor->truncation_bound) : json(nullptr)},
         {"negative_gamma_samples", r.modified.qubit.negative_gamma_samples},
         {"scenario_hash", r.hash}};
  s["echo_channel"] = r.echo ? "included: C_xy carries the Loschmidt echo |f01|^2"
                             : "excluded: semiclassical-only run, M(t) = 1";
  return s;
}

inline json make_manifest(const std::string& verb, const Scenario& sc, const json& artifacts, const json& results) {
  return {{"tool", "qchaos"},        {"version", kVersion},    {"verb", verb},
          {"scenario", to_json(sc)}, {"scenario_hash", scenario_hash(sc)},
          {"artifacts", artifacts},  {"results", results}};
}

inline json write_scenario_artifacts(const ScenarioResult& r, const std::filesystem::path& dir) {
  ArtifactWriter w(dir);
  w.add("trajectory.csv", detail::trajectory_csv(r.modulation.trajectory));
  w.add("delta_q.csv", detail::signal_csv(r.modulation.delta_q));
  w.add("spectrum.csv", detail::spectrum_csv(r.spectrum));
  w.add("decoherence.csv", detail::decoherence_csv(r.modified));
  w.add("natural.csv", detail::decoherence_csv(r.natural));
  if (r.echo) w.add("echo.csv", detail::echo_csv(*r.echo));
  io::CsvTable summary({"gammabar", "gammabar_rho01", "gammabar0", "F_predicted", "scenario_hash"});
  summary.add_row({io::format_number(r.modified.gammabar), io::format_number(0.5 * r.modified.gammabar),
                   io::format_number(r.natural.gammabar),
                   r.factor ? io::format_number(r.factor->value) : std::string("nan"), r.hash});
  w.add("summary.csv", summary.str());
  w.add("plot_figures.py", detail::plot_script());
  const json manifest = make_manifest("simulate", r.scenario, w.hashes(), summary_json(r));
  w.add("manifest.json", manifest.dump(2) + "\n");
  w.commit();
  return manifest;
}

// ---------------------------------------------------------------------------
// sweep and table

struct SweepRow {
  double value = 0.0;
  double gammabar_qm = NAN;
  double gammabar_q0 = NAN;
  double lyapunov = NAN;
  double lyapunov_stderr = NAN;
  Regime regime = Regime::Indeterminate;
  double factor = NAN;
  double delta_q_mean = NAN;
  std::string error;

  double ratio() const { return gammabar_qm / gammabar_q0; }
};

inline void set_parameter(Scenario& sc, const std::string& param, double v) {
  if (param == "i0") sc.drive.i0 = v;
  else if (param == "omega_d") sc.drive.omega_d = v;
  else if (param == "g_qo") sc.g_qo = v;
  else if (param == "lambda") sc.duffing.lambda = v;
  else if (param == "gamma") sc.duffing.gamma = v;
  else throw config_error("sweep: unsupported parameter '" + param + "' (i0, omega_d, g_qo, lambda, gamma)");
}

/// Runs `fn(i)` for i in [0, n) on up to `workers` threads.
inline void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn) {
  const auto threads = static_cast<std::size_t>(std::max(1, workers));
  if (threads == 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  for (std::size_t t = 0; t < std::min(threads, n); ++t)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) fn(i);
    });
}

/// One row per value; a failing point records its error and the sweep continues.
/// `with_lyapunov` = false skips the exponent (for cheap rate-only sweeps).
inline std::vector<SweepRow> sweep_drive(const Scenario& base, const std::string& param,
                                         const std::vector<double>& values, bool with_lyapunov = true) {
  detail::require(values.size() >= 2, "sweep: need at least two points");
  validate(base);
  Scenario probe = base;
  set_parameter(probe, param, values.front());
  const BathContext bath = make_bath_context(base, base.noise);
  std::vector<SweepRow> rows(values.size());
  parallel_for(values.size(), base.workers, [&](std::size_t i) {
    SweepRow& row = rows[i];
    row.value = values[i];
    row.gammabar_q0 = bath.natural.gammabar;
    try {
      Scenario sc = base;
      set_parameter(sc, param, values[i]);
      validate(sc);
      const auto mod = make_modulation(sc);
      row.delta_q_mean = mod.delta_q.mean();
      row.gammabar_qm = modified_decoherence(sc, bath, mod.phase, std::nullopt).gammabar;
      const auto spec = psd(mod.delta_q, sc.spectrum.segments, sc.spectrum.overlap);
      const double wcd = omega_cd_for(sc, sc.noise);
      if (wcd < spec.nyquist()) row.factor = correction_factor(spec, wcd).value;
      if (with_lyapunov) {
        const auto ly = detail::stage("largest_lyapunov", [&] { return largest_lyapunov(sc.duffing, sc.drive, sc.lyapunov); });
        row.lyapunov = ly.exponent;
        row.lyapunov_stderr = ly.standard_error;
        row.regime = classify_regime(ly.exponent, ly.standard_error);
      }
    } catch (const std::exception& e) {
      row.error = e.what();
    }
  });
  return rows;
}

inline std::string sweep_csv(const std::string& param, const std::vector<SweepRow>& rows) {
  io::CsvTable t({param, "gammabar_qm", "gammabar_q0", "ratio", "lyapunov", "lyapunov_stderr", "regime",
                  "f_predicted", "delta_q_mean", "status"});
  for (const auto& r : rows) {
    t.add_row({io::format_number(r.value), io::format_number(r.gammabar_qm), io::format_number(r.gammabar_q0),
               io::format_number(r.ratio()), io::format_number(r.lyapunov), io::format_number(r.lyapunov_stderr),
               std::string(to_string(r.regime)), io::format_number(r.factor), io::format_number(r.delta_q_mean),
               r.error.empty() ? std::string("ok") : "error: " + r.error});
  }
  return t.str();
}

struct TableRow {
  SpectralDensity noise;
  double gammabar_q0 = NAN;  // C_xy decay rates, omega_q units
  double gammabar_qm = NAN;
  std::string error;

  double ratio() const { return gammabar_qm / gammabar_q0; }
};

/// Natural vs modulated fitted rates for each bath under one modulation signal.
inline std::vector<TableRow> table_noises(const Scenario& base, const std::vector<SpectralDensity>& noises) {
  detail::require(!noises.empty(), "table: empty noise list");
  validate(base);
  const auto mod = make_modulation(base);
  std::vector<TableRow> rows;
  for (const auto& n : noises) rows.push_back({n});
  parallel_for(rows.size(), base.workers, [&](std::size_t i) {
    try {
      const BathContext bath = make_bath_context(base, rows[i].noise);
      rows[i].gammabar_q0 = bath.natural.gammabar;
      rows[i].gammabar_qm = modified_decoherence(base, bath, mod.phase, std::nullopt).gammabar;
    } catch (const std::exception& e) {
      rows[i].error = e.what();
    }
  });
  return rows;
}

/// Rates reported as Gamma/2pi in Hz; T1 = T2 = 1/Gamma_rho01 with Gamma_rho01 = gammabar/2.
inline std::string table_csv(const Scenario& sc, const std::vector<TableRow>& rows) {
  io::CsvTable t({"noise", "domain_lo", "domain_hi", "gammabar_q0", "gammabar_qm", "ratio", "gammabar_q0_hz",
                  "gammabar_qm_hz", "t1_t2_s", "status"});
  const double omega_q_rad = 2.0 * std::numbers::pi * sc.omega_q_hz / sc.omega_q;
  for (const auto& r : rows) {
    const double rho01_rate = 0.5 * r.gammabar_qm * omega_q_rad;
    t.add_row({std::string(to_string(r.noise.kind())), io::format_number(r.noise.domain_lo()),
               io::format_number(r.noise.domain_hi()), io::format_number(r.gammabar_q0),
               io::format_number(r.gammabar_qm), io::format_number(r.ratio()),
               io::format_number(r.gammabar_q0 * sc.omega_q_hz / sc.omega_q),
               io::format_number(r.gammabar_qm * sc.omega_q_hz / sc.omega_q), io::format_number(1.0 / rho01_rate),
               r.error.empty() ? std::string("ok") : "error: " + r.error});
  }
  return t.str();
}

}  // namespace qchaos

#endif
