// ioncoupler command-line front end.
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <Eigen/Core>
#include <fmt/format.h>
#include <json.hpp>

#include "ioncoupler/config.hpp"
#include "ioncoupler/errors.hpp"
#include "ioncoupler/exec.hpp"
#include "ioncoupler/harness.hpp"
#include "ioncoupler/selftest.hpp"
#include "ioncoupler/wells.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace ioncoupler;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitSelftest = 1;
constexpr int kExitUsage = 2;
constexpr int kExitEngine = 3;

json versions() {
  return {{"ioncoupler", IONCOUPLER_VERSION},
          {"eigen", fmt::format("{}.{}.{}", EIGEN_WORLD_VERSION, EIGEN_MAJOR_VERSION, EIGEN_MINOR_VERSION)},
          {"nlohmann_json", fmt::format("{}.{}.{}", NLOHMANN_JSON_VERSION_MAJOR, NLOHMANN_JSON_VERSION_MINOR,
                                        NLOHMANN_JSON_VERSION_PATCH)},
          {"fmt", FMT_VERSION}};
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + p.string());
  out << text;
  if (!out) throw ConfigError("failed writing " + p.string());
}

int cmd_modes(const std::string& config, bool as_json, const std::string& out_dir) {
  WellPair wp;
  double ratio = 2.0;
  if (config.empty()) {
    wp = default_scenario(Scenario::exchange).resolved_wells();
  } else {
    wp = load_wells(config, &ratio);
  }
  const NormalModes nm = normal_modes(wp);
  struct Row {
    const char* name;
    double value;
    const char* unit;
    bool angular;
  };
  const Row rows[] = {
      {"omega_bar", nm.omega_bar, "rad/s", true},
      {"delta", nm.delta, "rad/s", true},
      {"omega_ex", nm.omega_ex, "rad/s", true},
      {"omega_str", nm.omega_str, "rad/s", true},
      {"omega_com", nm.omega_com, "rad/s", true},
      {"splitting", nm.splitting(), "rad/s", true},
      {"theta_str", nm.theta_str, "rad", false},
      {"theta_com", nm.theta_com, "rad", false},
      {"q_str_l", nm.q_str[0], "", false},
      {"q_str_r", nm.q_str[1], "", false},
      {"q_com_l", nm.q_com[0], "", false},
      {"q_com_r", nm.q_com[1], "", false},
      {"tau_ex", nm.exchange_time(), "s", false},
      {"d0", wp.d0, "m", false},
  };
  if (as_json) {
    json j;
    for (const auto& r : rows) {
      j[r.name] = r.value;
      if (r.angular) j[std::string(r.name) + "_hz"] = angular_to_hz(r.value);
    }
    std::cout << j.dump(2) << "\n";
  } else {
    for (const auto& r : rows) {
      if (r.angular) {
        std::cout << fmt::format("{:<10} {:>18.6f} {:<6} {:>16.4f} Hz\n", r.name, r.value, r.unit,
                                 angular_to_hz(r.value));
      } else {
        std::cout << fmt::format("{:<10} {:>18.9g} {}\n", r.name, r.value, r.unit);
      }
    }
    std::cout << fmt::format("tau_ex = {:.3f} us\n", nm.exchange_time() * 1e6);
  }
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    std::string csv = "quantity,value,unit,value_hz\r\n";
    for (const auto& r : rows) {
      csv += fmt::format("{},{},{},{}\r\n", r.name, r.value, r.unit,
                         r.angular ? fmt::format("{}", angular_to_hz(r.value)) : "");
    }
    write_file(fs::path(out_dir) / "modes.csv", csv);
  }
  return kExitOk;
}

struct RunArgs {
  std::string scenario;
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<long> shots;
  std::string out = "results";
  bool as_json = false;
  bool timing = false;
};

int cmd_run(const RunArgs& a) {
  const Scenario s = parse_scenario(a.scenario);
  ScenarioConfig cfg = a.config.empty() ? default_scenario(s) : load_config(a.config, s);
  if (a.seed) cfg.seed = *a.seed;
  if (a.shots) {
    if (*a.shots < 1) throw ConfigError("--shots must be >= 1");
    cfg.shots = *a.shots;
  }

  const auto t0 = std::chrono::steady_clock::now();
  const ScanResult r = run_scenario(cfg);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  const std::string stem = scenario_name(s);
  const fs::path dir(a.out);
  fs::create_directories(dir);
  json outputs = json::array();
  auto emit = [&](const std::string& name, const std::string& text) {
    write_file(dir / name, text);
    outputs.push_back(name);
  };
  emit(stem + ".csv", to_csv(r.table));
  if (r.peaks) emit(stem + ".peaks.csv", to_csv(*r.peaks));
  emit(stem + ".config.json", config_to_json(cfg));
  json summary{{"scenario", stem}, {"seed", cfg.seed}, {"shots", cfg.shots}, {"summary", r.summary},
               {"notes", r.notes}};
  emit(stem + ".summary.json", summary.dump(2) + "\n");

  json manifest{{"scenario", stem},
                {"seed", cfg.seed},
                {"config", json::parse(config_to_json(cfg))},
                {"versions", versions()},
                {"outputs", outputs},
                {"metrics", {{"propagator_steps", r.steps}, {"shots", cfg.shots}, {"rows", r.table.rows.size()}}}};
  if (a.timing) manifest["metrics"]["wall_clock_s"] = wall;
  write_file(dir / (stem + ".manifest.json"), manifest.dump(2) + "\n");

  if (a.as_json) {
    std::cout << summary.dump(2) << "\n";
  } else {
    std::cout << fmt::format("{}: {} rows, seed {}, {} shots -> {}\n", stem, r.table.rows.size(), cfg.seed,
                             cfg.shots, dir.string());
    for (const auto& [k, v] : r.summary) std::cout << fmt::format("  {:<26} {:.6g}\n", k, v);
    for (const auto& n : r.notes) std::cout << "  note: " << n << "\n";
  }
  std::cerr << fmt::format("wall clock {:.2f} s, {} propagator steps\n", wall, r.steps);
  return kExitOk;
}

int cmd_selftest(bool quick, bool as_json, bool corrupt) {
  SelftestOptions o;
  o.level = quick ? SelftestLevel::quick : SelftestLevel::standard;
  if (corrupt) o.constants.epsilon0 *= 1.25;
  bool ok = true;
  json j = json::array();
  const auto results = run_selftest(o, [&](const CriterionResult& r) {
    if (!as_json) std::cout << format_result_line(r) << std::endl;
  });
  std::string failed;
  for (const auto& r : results) {
    ok = ok && r.passed;
    if (!r.passed) failed += fmt::format(" {} ({})", r.id, r.name);
    j.push_back({{"id", r.id}, {"name", r.name}, {"passed", r.passed}, {"skipped", r.skipped},
                 {"detail", r.detail}, {"seconds", r.seconds}});
  }
  if (as_json) {
    std::cout << j.dump(2) << "\n";
  } else if (!ok) {
    std::cout << "failed criteria:" << failed << "\n";
  } else {
    std::cout << "all criteria passed\n";
  }
  return ok ? kExitOk : kExitSelftest;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two ions in separate wells: normal modes, gate dynamics, detection."};
  app.require_subcommand(1);

  std::string config;
  bool as_json = false;
  std::string modes_out;
  auto* modes = app.add_subcommand("modes", "normal modes of a well pair");
  modes->add_option("--config", config, "JSON config (wells block)");
  modes->add_flag("--json", as_json, "machine-readable output");
  modes->add_option("--out", modes_out, "also write modes.csv here");

  RunArgs ra;
  auto* run = app.add_subcommand("run", "run a scenario: crossing, exchange, gate, parity");
  run->add_option("scenario", ra.scenario, "scenario name")->required();
  run->add_option("--config", ra.config, "JSON config");
  run->add_option("--seed", ra.seed, "RNG seed");
  run->add_option("--shots", ra.shots, "Monte Carlo shots per point");
  run->add_option("--out", ra.out, "output directory")->capture_default_str();
  run->add_flag("--json", ra.as_json, "print the summary as JSON");
  run->add_flag("--timing", ra.timing, "record wall-clock time in the manifest");

  bool quick = false, corrupt = false, st_json = false;
  auto* st = app.add_subcommand("selftest", "golden-value and property checks");
  st->add_flag("--quick", quick, "fast subset");
  st->add_flag("--json", st_json, "machine-readable output");
  st->add_flag("--inject-constant-fault", corrupt)->group("");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    configure_threads_from_env();
    if (*modes) return cmd_modes(config, as_json, modes_out);
    if (*run) return cmd_run(ra);
    return cmd_selftest(quick, st_json, corrupt);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitEngine;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitEngine;
  }
}
