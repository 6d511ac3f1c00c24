#include "ioncoupler/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

#include "ioncoupler/constants.hpp"
#include "ioncoupler/errors.hpp"

namespace ioncoupler {

namespace {

using nlohmann::json;

struct Unit {
  const char* suffix;
  double scale;
};

const std::vector<Unit> kFrequency{{"_hz", kTwoPi}, {"_khz", kTwoPi * 1e3}, {"_rad_s", 1.0}};
const std::vector<Unit> kLength{{"_um", 1e-6}, {"_nm", 1e-9}, {"_m", 1.0}};
const std::vector<Unit> kTime{{"_us", 1e-6}, {"_s", 1.0}};
const std::vector<Unit> kPhase{{"_rad", 1.0}, {"_deg", kPi / 180.0}};
const std::vector<Unit> kMass{{"_u", kCodata2018.atomic_mass_unit}, {"_kg", 1.0}};
const std::vector<Unit> kCharge{{"_e", kCodata2018.elementary_charge}, {"_c", 1.0}};

// A JSON object plus the keys consumed so far, so leftovers can be reported.
class Block {
 public:
  Block(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(where() + " must be an object");
  }

  std::string where(const std::string& key = "") const {
    if (key.empty()) return path_.empty() ? "config" : path_;
    return path_.empty() ? key : path_ + "." + key;
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  const json& raw(const std::string& key) {
    used_.insert(key);
    return j_.at(key);
  }

  double number(const std::string& key) {
    const json& v = raw(key);
    if (!v.is_number()) throw ConfigError(where(key) + ": expected a number");
    return v.get<double>();
  }

  std::optional<double> number_opt(const std::string& key) {
    if (!has(key)) return std::nullopt;
    return number(key);
  }

  long integer(const std::string& key) {
    const json& v = raw(key);
    if (!v.is_number_integer()) throw ConfigError(where(key) + ": expected an integer");
    return v.get<long>();
  }

  std::uint64_t unsigned_integer(const std::string& key) {
    const json& v = raw(key);
    if (!v.is_number_unsigned()) throw ConfigError(where(key) + ": expected a non-negative integer");
    return v.get<std::uint64_t>();
  }

  bool boolean(const std::string& key) {
    const json& v = raw(key);
    if (!v.is_boolean()) throw ConfigError(where(key) + ": expected true or false");
    return v.get<bool>();
  }

  std::string string(const std::string& key) {
    const json& v = raw(key);
    if (!v.is_string()) throw ConfigError(where(key) + ": expected a string");
    return v.get<std::string>();
  }

  // Quantity `base` given in exactly one of the units; result in SI/angular.
  std::optional<double> quantity(const std::string& base, const std::vector<Unit>& units) {
    std::optional<double> out;
    std::string found;
    for (const auto& u : units) {
      const std::string key = base + u.suffix;
      if (!has(key)) continue;
      if (out) throw ConfigError(where(key) + ": conflicts with " + where(found));
      out = number(key) * u.scale;
      found = key;
    }
    return out;
  }

  double required(const std::string& base, const std::vector<Unit>& units) {
    if (auto v = quantity(base, units)) return *v;
    std::string names;
    for (const auto& u : units) names += (names.empty() ? "" : " or ") + base + u.suffix;
    throw ConfigError(where(base) + ": missing (give " + names + ")");
  }

  void quantity_into(const std::string& base, const std::vector<Unit>& units, double& target) {
    if (auto v = quantity(base, units)) target = *v;
  }

  std::optional<Block> child(const std::string& key) {
    if (!has(key)) return std::nullopt;
    return Block(raw(key), where(key));
  }

  void sweep_into(const std::string& base, const std::vector<Unit>& units, Sweep& s) {
    std::string found;
    for (const auto& u : units) {
      const std::string key = base + u.suffix;
      if (!has(key)) continue;
      if (!found.empty()) throw ConfigError(where(key) + ": conflicts with " + where(found));
      found = key;
      Block b(raw(key), where(key));
      s.start = b.number("start") * u.scale;
      s.stop = b.number("stop") * u.scale;
      s.points = static_cast<int>(b.integer("points"));
      if (s.points < 2) throw ConfigError(b.where("points") + ": a sweep needs at least 2 points");
      b.finish();
    }
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!used_.count(it.key())) throw ConfigError(where(it.key()) + ": unknown key");
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

json parse_json(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    const std::size_t upto = std::min<std::size_t>(e.byte, text.size());
    const long line = 1 + std::count(text.begin(), text.begin() + static_cast<long>(upto), '\n');
    throw ConfigError("line " + std::to_string(line) + ": malformed JSON (" + e.what() + ")");
  }
}

void check_schema(Block& top) {
  if (!top.has("schema_version")) throw ConfigError("schema_version: missing");
  const long v = top.integer("schema_version");
  if (v != kConfigSchemaVersion) {
    throw ConfigError("schema_version: " + std::to_string(v) + " is not supported (expected " +
                      std::to_string(kConfigSchemaVersion) + ")");
  }
}

struct WellsParse {
  WellPair wp;
  std::optional<double> exchange_rate;
  double max_ratio = 2.0;
};

WellsParse read_wells(Block& top) {
  auto b = top.child("wells");
  if (!b) throw ConfigError("wells: missing block");
  WellsParse w;
  const auto both = b->quantity("mass", kMass);
  const auto ml = b->quantity("mass_l", kMass);
  const auto mr = b->quantity("mass_r", kMass);
  if (both && (ml || mr)) throw ConfigError(b->where("mass") + ": give either mass or mass_l/mass_r");
  if (!both && !(ml && mr)) {
    throw ConfigError(b->where("mass") + ": missing (give mass_u, or mass_l_u and mass_r_u)");
  }
  w.wp.mass_l = both ? *both : *ml;
  w.wp.mass_r = both ? *both : *mr;
  w.wp.charge = b->required("charge", kCharge);
  w.wp.omega_l = b->required("omega_l", kFrequency);
  w.wp.omega_r = b->required("omega_r", kFrequency);
  const auto d0 = b->quantity("d0", kLength);
  w.exchange_rate = b->quantity("exchange_rate", kFrequency);
  if (d0 && w.exchange_rate) throw ConfigError(b->where("d0") + ": give either d0 or exchange_rate");
  if (!d0 && !w.exchange_rate) throw ConfigError(b->where("d0") + ": missing (or give exchange_rate)");
  if (d0) w.wp.d0 = *d0;
  if (auto r = b->number_opt("max_frequency_ratio")) w.max_ratio = *r;
  b->finish();
  return w;
}

void read_drive(Block& b, ScenarioConfig& cfg) {
  DriveParams& d = cfg.drive;
  b.quantity_into("omega_c", kFrequency, d.omega_c);
  b.quantity_into("phi_c", kPhase, d.phi_c);
  b.quantity_into("phi_s", kPhase, d.phi_s);
  b.quantity_into("phi", kPhase, d.phi);
  b.quantity_into("sideband_offset", kFrequency, d.sideband_offset);
  const auto lambda = b.quantity("wavelength", kLength);
  const auto k = b.number_opt("wavevector_per_m");
  if (lambda && k) throw ConfigError(b.where("wavelength") + ": give either wavelength or wavevector");
  if (lambda) d.wavevector = raman_wavevector(*lambda);
  if (k) d.wavevector = *k;
  if (b.has("eta")) d.eta_override = b.number("eta");
  if (b.has("addressing")) {
    const std::string a = b.string("addressing");
    if (a == "both") {
      d.addressing = {true, true};
    } else if (a == "left") {
      d.addressing = {true, false};
    } else if (a == "right") {
      d.addressing = {false, true};
    } else {
      throw ConfigError(b.where("addressing") + ": expected both, left or right");
    }
  }
  const auto os = b.quantity("omega_s", kFrequency);
  const auto eos = b.quantity("eta_omega_s", kFrequency);
  if (os && eos) throw ConfigError(b.where("omega_s") + ": give either omega_s or eta_omega_s");
  if (os) d.omega_s = *os;
  if (eos) {
    const WellPair wp = cfg.resolved_wells();
    d.omega_s = *eos / reference_eta(wp, normal_modes(wp), d);
  }
  b.finish();
}

void read_noise(Block& b, NoiseConfig& n) {
  if (auto v = b.number_opt("heating_rate_per_s")) n.heating_rate = *v;
  b.quantity_into("drift_sigma", kFrequency, n.drift_sigma);
  b.quantity_into("common_drift_sigma", kFrequency, n.common_drift_sigma);
  if (auto v = b.number_opt("intensity_rel_sigma")) n.intensity_rel_sigma = *v;
  if (auto v = b.number_opt("spont_emission_prob")) n.spont_emission_prob = *v;
  if (auto v = b.number_opt("spam_epsilon")) n.spam_epsilon = *v;
  b.finish();
  try {
    n.validate();
  } catch (const Error& e) {
    throw ConfigError(b.where() + ": " + e.what());
  }
}

void read_detection(Block& b, DetectionSettings& d) {
  if (b.has("enabled")) d.enabled = b.boolean("enabled");
  if (b.has("mean_counts")) {
    const json& m = b.raw("mean_counts");
    if (!m.is_array() || m.size() != 3) throw ConfigError(b.where("mean_counts") + ": expected 3 numbers");
    for (int i = 0; i < 3; ++i) {
      if (!m[i].is_number()) throw ConfigError(b.where("mean_counts") + ": expected 3 numbers");
      d.mean_counts[i] = m[i].get<double>();
    }
  }
  if (auto v = b.number_opt("dispersion")) d.dispersion = *v;
  if (b.has("shots_per_histogram")) d.shots_per_histogram = b.integer("shots_per_histogram");
  if (b.has("calibration_points")) d.calibration_points = static_cast<int>(b.integer("calibration_points"));
  if (b.has("bootstrap_resamples")) d.bootstrap_resamples = static_cast<int>(b.integer("bootstrap_resamples"));
  b.quantity_into("injected_phase_offset", kPhase, d.injected_phase_offset);
  if (auto v = b.number_opt("lambda_per_histogram")) d.lambda_per_histogram = *v;
  b.finish();
  if (d.shots_per_histogram < 1) throw ConfigError(b.where("shots_per_histogram") + ": must be >= 1");
  if (d.calibration_points < 3) throw ConfigError(b.where("calibration_points") + ": must be >= 3");
  if (d.bootstrap_resamples < 2) throw ConfigError(b.where("bootstrap_resamples") + ": must be >= 2");
  if (!(d.dispersion >= 1.0)) throw ConfigError(b.where("dispersion") + ": must be >= 1");
}

ScenarioConfig build(const std::string& text, std::optional<Scenario> forced) {
  const json j = parse_json(text);
  Block top(j, "");
  check_schema(top);
  std::optional<Scenario> s = forced;
  if (top.has("scenario")) {
    const Scenario file = parse_scenario(top.string("scenario"));
    if (!s) s = file;
  }
  if (!s) throw ConfigError("scenario: missing");
  ScenarioConfig cfg = default_scenario(*s);

  const WellsParse w = read_wells(top);
  cfg.wells = w.wp;
  cfg.exchange_rate_target = w.exchange_rate;
  cfg.max_frequency_ratio = w.max_ratio;
  try {
    cfg.resolved_wells();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(std::string("wells: ") + e.what());
  }

  if (auto b = top.child("drive")) read_drive(*b, cfg);
  if (auto b = top.child("noise")) read_noise(*b, cfg.noise);
  if (auto b = top.child("motion")) {
    if (b->has("fock_levels_str")) cfg.dims.n_str = static_cast<int>(b->integer("fock_levels_str"));
    if (b->has("fock_levels_com")) cfg.dims.n_com = static_cast<int>(b->integer("fock_levels_com"));
    if (auto v = b->number_opt("thermal_nbar")) cfg.thermal_nbar = *v;
    if (auto v = b->number_opt("leakage_threshold")) cfg.leakage_threshold = *v;
    b->finish();
    if (cfg.dims.n_str < 2 || cfg.dims.n_com < 2) throw ConfigError("motion: need at least 2 Fock levels per mode");
    if (!(cfg.thermal_nbar >= 0.0)) throw ConfigError("motion.thermal_nbar: must be >= 0");
    if (!(cfg.leakage_threshold > 0.0 && cfg.leakage_threshold < 1.0)) {
      throw ConfigError("motion.leakage_threshold: must be in (0, 1)");
    }
  }
  if (auto b = top.child("run")) {
    if (b->has("shots")) cfg.shots = b->integer("shots");
    if (b->has("seed")) cfg.seed = b->unsigned_integer("seed");
    b->quantity_into("max_phase_step", kPhase, cfg.max_phase_step);
    b->finish();
    if (cfg.shots < 1) throw ConfigError("run.shots: must be >= 1");
    if (!(cfg.max_phase_step > 0.0 && cfg.max_phase_step <= 0.5)) {
      throw ConfigError("run.max_phase_step: must be in (0, 0.5] rad");
    }
  }
  if (auto b = top.child("detection")) read_detection(*b, cfg.detection);
  if (auto b = top.child("crossing")) {
    b->sweep_into("well_detuning", kFrequency, cfg.well_detuning);
    b->sweep_into("sideband_detuning", kFrequency, cfg.sideband_detuning);
    b->quantity_into("probe_duration", kTime, cfg.probe_duration);
    if (auto v = b->number_opt("peak_prominence")) cfg.peak_prominence = *v;
    b->finish();
  }
  if (auto b = top.child("exchange")) {
    b->sweep_into("delay", kTime, cfg.delay);
    b->finish();
  }
  if (auto b = top.child("gate")) {
    b->sweep_into("coupling_duration", kTime, cfg.coupling_duration);
    b->finish();
  }
  if (auto b = top.child("parity")) {
    b->sweep_into("analysis_phase", kPhase, cfg.analysis_phase);
    b->finish();
  }
  top.finish();
  return cfg;
}

}  // namespace

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ScenarioConfig parse_config(const std::string& text, std::optional<Scenario> scenario) {
  return build(text, scenario);
}

ScenarioConfig load_config(const std::string& path, std::optional<Scenario> scenario) {
  try {
    return build(read_text_file(path), scenario);
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

WellPair parse_wells(const std::string& text, double* max_frequency_ratio) {
  const json j = parse_json(text);
  Block top(j, "");
  check_schema(top);
  const WellsParse w = read_wells(top);
  ScenarioConfig cfg;
  cfg.wells = w.wp;
  cfg.exchange_rate_target = w.exchange_rate;
  cfg.max_frequency_ratio = w.max_ratio;
  if (max_frequency_ratio) *max_frequency_ratio = w.max_ratio;
  try {
    return cfg.resolved_wells();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(std::string("wells: ") + e.what());
  }
}

WellPair load_wells(const std::string& path, double* max_frequency_ratio) {
  try {
    return parse_wells(read_text_file(path), max_frequency_ratio);
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

std::string config_to_json(const ScenarioConfig& cfg) {
  const WellPair wp = cfg.resolved_wells();
  auto sweep = [](const Sweep& s) { return json{{"start", s.start}, {"stop", s.stop}, {"points", s.points}}; };
  const DriveParams& d = cfg.drive;
  const char* addressing = d.addressing.left && d.addressing.right ? "both" : d.addressing.left ? "left" : "right";
  json drive{{"omega_c_rad_s", d.omega_c},     {"omega_s_rad_s", d.omega_s},
             {"phi_c_rad", d.phi_c},           {"phi_s_rad", d.phi_s},
             {"phi_rad", d.phi},               {"sideband_offset_rad_s", d.sideband_offset},
             {"wavevector_per_m", d.wavevector}, {"addressing", addressing}};
  if (d.eta_override) drive["eta"] = *d.eta_override;
  const NoiseConfig& n = cfg.noise;
  const DetectionSettings& ds = cfg.detection;
  json j{
      {"schema_version", kConfigSchemaVersion},
      {"scenario", scenario_name(cfg.scenario)},
      {"wells",
       {{"mass_l_kg", wp.mass_l},
        {"mass_r_kg", wp.mass_r},
        {"charge_c", wp.charge},
        {"omega_l_rad_s", wp.omega_l},
        {"omega_r_rad_s", wp.omega_r},
        {"d0_m", wp.d0},
        {"max_frequency_ratio", cfg.max_frequency_ratio}}},
      {"drive", drive},
      {"noise",
       {{"heating_rate_per_s", n.heating_rate},
        {"drift_sigma_rad_s", n.drift_sigma},
        {"common_drift_sigma_rad_s", n.common_drift_sigma},
        {"intensity_rel_sigma", n.intensity_rel_sigma},
        {"spont_emission_prob", n.spont_emission_prob},
        {"spam_epsilon", n.spam_epsilon}}},
      {"motion",
       {{"fock_levels_str", cfg.dims.n_str}, {"fock_levels_com", cfg.dims.n_com}, {"thermal_nbar", cfg.thermal_nbar},
        {"leakage_threshold", cfg.leakage_threshold}}},
      {"run", {{"shots", cfg.shots}, {"seed", cfg.seed}, {"max_phase_step_rad", cfg.max_phase_step}}},
      {"detection",
       {{"enabled", ds.enabled},
        {"mean_counts", ds.mean_counts},
        {"dispersion", ds.dispersion},
        {"shots_per_histogram", ds.shots_per_histogram},
        {"calibration_points", ds.calibration_points},
        {"bootstrap_resamples", ds.bootstrap_resamples},
        {"injected_phase_offset_rad", ds.injected_phase_offset},
        {"lambda_per_histogram", ds.lambda_per_histogram}}},
      {"crossing",
       {{"well_detuning_rad_s", sweep(cfg.well_detuning)},
        {"sideband_detuning_rad_s", sweep(cfg.sideband_detuning)},
        {"probe_duration_s", cfg.probe_duration},
        {"peak_prominence", cfg.peak_prominence}}},
      {"exchange", {{"delay_s", sweep(cfg.delay)}}},
      {"gate", {{"coupling_duration_s", sweep(cfg.coupling_duration)}}},
      {"parity", {{"analysis_phase_rad", sweep(cfg.analysis_phase)}}},
  };
  return j.dump(2) + "\n";
}

}  // namespace ioncoupler
