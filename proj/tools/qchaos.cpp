// qchaos command line: simulate, sweep, table, lyapunov, echo, map-circuit.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include <qchaos/circuit.hpp>
#include <qchaos/scenario.hpp>

namespace fs = std::filesystem;
using namespace qchaos;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

struct Common {
  std::string config;
  std::string out = "out";
  int workers = 0;
  std::vector<std::string> overrides;
};

json load_config(const Common& c) {
  json j;
  try {
    j = json::parse(io::read_file(c.config));
  } catch (const json::parse_error& e) {
    throw config_error(c.config + ": " + e.what());
  }
  for (const auto& o : c.overrides) apply_override(j, o);
  if (c.workers > 0) {
    json& target = j.contains("scenario") && j.contains("tool") ? j["scenario"] : j;
    target["workers"] = c.workers;
  }
  return j;
}

Scenario load_scenario(const Common& c) { return scenario_from_json(load_config(c)); }

/// "5,30" or "lo:hi:n" (inclusive, n points)
std::vector<double> parse_values(const std::string& text) {
  std::vector<double> v;
  if (std::count(text.begin(), text.end(), ':') == 2) {
    double lo = 0, hi = 0;
    int n = 0;
    if (std::sscanf(text.c_str(), "%lf:%lf:%d", &lo, &hi, &n) != 3 || n < 2)
      throw config_error("--values: expected lo:hi:n with n >= 2");
    for (int i = 0; i < n; ++i) v.push_back(lo + (hi - lo) * i / (n - 1));
    return v;
  }
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      v.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw config_error("--values: cannot parse '" + item + "'");
    }
  }
  return v;
}

int cmd_simulate(const Common& c) {
  const Scenario sc = load_scenario(c);
  const auto res = run_scenario(sc);
  const auto manifest = write_scenario_artifacts(res, c.out);
  std::cout << manifest.at("results").dump(2) << "\n";
  return 0;
}

int cmd_sweep(const Common& c, const std::string& param, const std::string& values) {
  const Scenario sc = load_scenario(c);
  const auto pts = values.empty() ? parse_values("0:50:26") : parse_values(values);
  const auto rows = sweep_drive(sc, param, pts);
  ArtifactWriter w(c.out);
  w.add("sweep.csv", sweep_csv(param, rows));
  std::size_t failed = 0;
  for (const auto& r : rows) failed += !r.error.empty();
  const json results{{"param", param}, {"points", pts}, {"failed_points", failed}};
  w.add("manifest.json", make_manifest("sweep", sc, w.hashes(), results).dump(2) + "\n");
  w.commit();
  std::cout << sweep_csv(param, rows);
  return 0;
}

int cmd_table(const Common& c, const std::vector<std::string>& noise_names) {
  const Scenario sc = load_scenario(c);
  std::vector<SpectralDensity> noises;
  if (noise_names.empty()) {
    noises = sc.table_noises;
  } else {
    for (const auto& name : noise_names) {
      const auto kind = noise_kind_from_string(name);
      bool found = false;
      for (const auto& n : sc.table_noises)
        if (n.kind() == kind) {
          noises.push_back(n);
          found = true;
        }
      if (!found) throw config_error("table: no '" + name + "' entry in the scenario's table.noises");
    }
  }
  const auto rows = table_noises(sc, noises);
  ArtifactWriter w(c.out);
  const auto csv = table_csv(sc, rows);
  w.add("table.csv", csv);
  w.add("manifest.json", make_manifest("table", sc, w.hashes(), json::object()).dump(2) + "\n");
  w.commit();
  std::cout << csv;
  return 0;
}

int cmd_lyapunov(const Common& c) {
  const Scenario sc = load_scenario(c);
  const auto est = detail::stage("largest_lyapunov", [&] { return largest_lyapunov(sc.duffing, sc.drive, sc.lyapunov); });
  const json out{{"i0", sc.drive.i0},
                 {"omega_d", sc.drive.omega_d},
                 {"exponent", est.exponent},
                 {"standard_error", est.standard_error},
                 {"renormalisations", est.renormalisations},
                 {"regime", std::string(to_string(classify_regime(est.exponent, est.standard_error)))}};
  ArtifactWriter w(c.out);
  w.add("lyapunov.json", out.dump(2) + "\n");
  w.add("manifest.json", make_manifest("lyapunov", sc, w.hashes(), out).dump(2) + "\n");
  w.commit();
  std::cout << out.dump(2) << "\n";
  return 0;
}

int cmd_echo(const Common& c, bool check) {
  const Scenario sc = load_scenario(c);
  if (!sc.fock) throw config_error("echo: scenario has no fock section");
  const double t_end = sc.fock_t_end.value_or(sc.time.t_end);
  const auto echo = detail::stage("evolve_echo", [&] { return evolve_echo(sc.duffing, sc.drive, sc.g_qo, *sc.fock, t_end); });
  json results{{"dim", echo.dim}, {"leak", echo.leak}, {"converged", echo.converged},
               {"max_norm_drift", echo.max_norm_drift}};
  ArtifactWriter w(c.out);
  w.add("echo.csv", detail::echo_csv(echo));
  if (echo.converged) {
    const auto dq = delta_q_quantum(echo);
    w.add("delta_q_quantum.csv", detail::signal_csv(dq));
    results["delta_q_quantum_mean"] = dq.mean();
  }
  if (check) {
    const auto rep = detail::stage("convergence_check", [&] { return convergence_check(sc.duffing, sc.drive, sc.g_qo, *sc.fock, t_end); });
    results["convergence"] = {{"dim", rep.dim}, {"dim_refined", rep.dim_refined}, {"max_difference", rep.max_difference},
                              {"converged", rep.converged}};
  }
  w.add("manifest.json", make_manifest("echo", sc, w.hashes(), results).dump(2) + "\n");
  w.commit();
  std::cout << results.dump(2) << "\n";
  if (!echo.converged) throw numerical_error("evolve_echo", "Fock truncation leak above 1e-6; raise fock.dim");
  return 0;
}

int cmd_map_circuit(const Common& c) {
  const Scenario sc = load_scenario(c);
  if (!sc.circuit) throw config_error("map-circuit: scenario has no circuit section");
  json checks = json::array();
  for (const auto& r : validate_regime(*sc.circuit))
    checks.push_back({{"name", r.name}, {"value", r.value}, {"threshold", r.threshold}, {"passed", r.passed},
                      {"detail", r.detail}});
  const auto ep = effective_params(*sc.circuit, sc.g_qo);
  const json out{{"regime_checks", checks},
                 {"si_hz",
                  {{"omega_q", ep.omega_q_hz},
                   {"omega_o", ep.omega_o_hz},
                   {"harmonic_omega_o", ep.harmonic_omega_o_hz},
                   {"anharmonicity", ep.anharmonicity_hz},
                   {"lambda", ep.lambda_hz}}},
                 {"normalised",
                  {{"omega_o", ep.omega_o}, {"lambda", ep.lambda}, {"g_qo", ep.g_qo}, {"i0", ep.i0},
                   {"omega_d", ep.omega_d}}},
                 {"phi_zpf", ep.phi_zpf},
                 {"lambda_convention", ep.lambda_convention},
                 {"drive_convention", ep.drive_convention}};
  ArtifactWriter w(c.out);
  w.add("circuit.json", out.dump(2) + "\n");
  w.add("manifest.json", make_manifest("map-circuit", sc, w.hashes(), out).dump(2) + "\n");
  w.commit();
  std::cout << out.dump(2) << "\n";
  return 0;
}

void add_common(CLI::App* app, Common& c) {
  app->add_option("config", c.config, "scenario JSON (or a run manifest)")->required()->check(CLI::ExistingFile);
  app->add_option("--out", c.out, "output directory");
  app->add_option("--workers", c.workers, "worker threads")->check(CLI::PositiveNumber);
  app->add_option("--override", c.overrides, "dotted key=value, repeatable");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qchaos: qubit decoherence under chaotic Duffing modulation"};
  app.require_subcommand(1);
  Common common;
  std::string param = "i0", values;
  std::vector<std::string> noises;
  bool check = false;

  auto* simulate = app.add_subcommand("simulate", "run one scenario and write its artifacts");
  auto* sweep = app.add_subcommand("sweep", "sweep a drive parameter");
  auto* table = app.add_subcommand("table", "natural vs modulated rates for several baths");
  auto* lyap = app.add_subcommand("lyapunov", "largest Lyapunov exponent of the drive");
  auto* echo = app.add_subcommand("echo", "truncated Fock-space Loschmidt echo");
  auto* circuit = app.add_subcommand("map-circuit", "circuit parameters to oscillator parameters");
  for (auto* s : {simulate, sweep, table, lyap, echo, circuit}) add_common(s, common);
  sweep->add_option("--param", param, "i0, omega_d, g_qo, lambda or gamma");
  sweep->add_option("--values", values, "comma list or lo:hi:n (default 0:50:26)");
  table->add_option("--noises", noises, "noise kinds to include (default: all in the scenario)");
  echo->add_flag("--check", check, "rerun at 1.25x dimension and report the difference");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  try {
    if (*simulate) return cmd_simulate(common);
    if (*sweep) return cmd_sweep(common, param, values);
    if (*table) return cmd_table(common, noises);
    if (*lyap) return cmd_lyapunov(common);
    if (*echo) return cmd_echo(common, check);
    if (*circuit) return cmd_map_circuit(common);
  } catch (const config_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const numerical_error& e) {
    std::cerr << "numerical error in stage " << e.stage() << ": " << e.what() << "\n";
    return kExitNumerical;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kExitNumerical;
  }
  return 0;
}
