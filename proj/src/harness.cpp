#include "ioncoupler/harness.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include <fmt/format.h>

#include "ioncoupler/constants.hpp"
#include "ioncoupler/errors.hpp"

namespace ioncoupler {

namespace {

double to_hz(double w) { return angular_to_hz(w); }

double prob_down(const SpinDensity& rho, int ion) {
  // |down> is index 1 on each ion
  return ion == 0 ? (rho(2, 2) + rho(3, 3)).real() : (rho(1, 1) + rho(3, 3)).real();
}

GateProblem base_problem(const ScenarioConfig& cfg, const WellPair& wp, double target) {
  GateProblem p;
  p.wells = wp;
  p.drive = cfg.drive;
  p.target_frequency = target;
  p.dims = cfg.dims;
  p.thermal_nbar = cfg.thermal_nbar;
  p.max_frequency_ratio = cfg.max_frequency_ratio;
  p.evolve.max_phase_step = cfg.max_phase_step;
  p.evolve.leakage_threshold = cfg.leakage_threshold;
  return p;
}

Segment drive_segment(const DriveParams& d, double duration) {
  Segment s;
  s.duration = duration;
  s.omega_c = d.omega_c;
  s.omega_s = d.omega_s;
  s.phi_c = d.phi_c;
  s.phi_s = d.phi_s;
  s.addressing = d.addressing;
  return s;
}

double golden(const std::function<double(double)>& f, double a, double b) {
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - g * (b - a), d = a + g * (b - a);
  double fc = f(c), fd = f(d);
  for (int it = 0; it < 200 && std::abs(b - a) > 1e-12 * std::max(1.0, std::abs(a)); ++it) {
    if (fc < fd) {
      b = d, d = c, fd = fc, c = b - g * (b - a), fc = f(c);
    } else {
      a = c, c = d, fc = fd, d = a + g * (b - a), fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

OscillationFit linear_osc(const std::vector<double>& t, const std::vector<double>& y, double w) {
  const int n = static_cast<int>(t.size());
  Eigen::MatrixXd x(n, 3);
  Eigen::VectorXd v(n);
  for (int k = 0; k < n; ++k) {
    x(k, 0) = 1.0;
    x(k, 1) = std::cos(w * t[k]);
    x(k, 2) = std::sin(w * t[k]);
    v[k] = y[k];
  }
  const Eigen::VectorXd c = x.colPivHouseholderQr().solve(v);
  OscillationFit f;
  f.omega = w;
  f.mean = c[0];
  f.amplitude = std::hypot(c[1], c[2]);
  f.rms_residual = std::sqrt((x * c - v).squaredNorm() / n);
  return f;
}

std::vector<CalibrationPoint> synth_calibration(const DetectionSettings& ds, double spam_epsilon,
                                                std::mt19937_64& rng) {
  const CountModel model = ds.model();
  const double flip = per_ion_flip_probability(spam_epsilon);
  std::vector<CalibrationPoint> cal;
  for (double ph : calibration_phases(ds.calibration_points)) {
    const double a = ph + ds.injected_phase_offset;
    const double c = std::cos(0.5 * a), s = std::sin(0.5 * a);
    const double d = (1.0 - flip) * c * c + flip * s * s;
    const Populations p{d * d, 2.0 * d * (1.0 - d), (1.0 - d) * (1.0 - d)};
    cal.push_back({ph, synthesize_histogram(model, p, ds.shots_per_histogram, rng)});
  }
  return cal;
}

ProbabilityEstimator calibrate(const DetectionSettings& ds, const std::vector<CalibrationPoint>& cal,
                               double* offset) {
  const PhaseOffset off = phase_offset_correct(cal);
  if (offset) *offset = off.offset;
  FitOptions fo;
  fo.lambda_per_histogram = ds.lambda_per_histogram;
  return fit_estimators(off.corrected, fo);
}

Populations clamp_probs(const Populations& p) {
  Populations q{std::max(0.0, p.p0), std::max(0.0, p.p1), std::max(0.0, p.p2)};
  const double s = q.sum();
  return s > 0.0 ? Populations{q.p0 / s, q.p1 / s, q.p2 / s} : Populations{1.0, 0.0, 0.0};
}

}  // namespace

std::string to_csv(const Table& t) {
  std::string out;
  for (std::size_t c = 0; c < t.columns.size(); ++c) out += (c ? "," : "") + t.columns[c];
  out += "\r\n";
  for (const auto& row : t.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out += ',';
      out += fmt::format("{}", row[c]);
    }
    out += "\r\n";
  }
  return out;
}

std::vector<double> Sweep::values() const {
  if (points < 1) throw ConfigError("sweep needs at least one point");
  if (points == 1) return {start};
  std::vector<double> v(points);
  for (int k = 0; k < points; ++k) v[k] = start + (stop - start) * k / (points - 1.0);
  return v;
}

CountModel DetectionSettings::model() const {
  CountModel m;
  for (int b = 0; b < 3; ++b) m.q[b] = negative_binomial(mean_counts[b], dispersion);
  return m;
}

const char* scenario_name(Scenario s) {
  switch (s) {
    case Scenario::crossing:
      return "crossing";
    case Scenario::exchange:
      return "exchange";
    case Scenario::gate_evolution:
      return "gate";
    case Scenario::parity:
      return "parity";
  }
  return "?";
}

Scenario parse_scenario(const std::string& name) {
  if (name == "crossing") return Scenario::crossing;
  if (name == "exchange") return Scenario::exchange;
  if (name == "gate" || name == "gate_evolution") return Scenario::gate_evolution;
  if (name == "parity") return Scenario::parity;
  throw ConfigError("unknown scenario '" + name + "' (expected crossing, exchange, gate, parity)");
}

WellPair ScenarioConfig::resolved_wells() const {
  WellPair wp = wells;
  if (exchange_rate_target) {
    wp.d0 = spacing_for_exchange_rate(wp.mass_l, wp.mass_r, wp.charge, wp.omega_l, wp.omega_r,
                                      *exchange_rate_target);
  }
  validate(wp, max_frequency_ratio);
  return wp;
}

DriveConfig nominal_drive(const ScenarioConfig& cfg) {
  const WellPair wp = cfg.resolved_wells();
  const NormalModes nm = normal_modes(wp);
  return derive_drive(wp, nm, cfg.drive, nm.omega_bar + cfg.drive.sideband_offset);
}

std::vector<Peak> find_peaks(const std::vector<double>& x, const std::vector<double>& y,
                             double prominence) {
  if (x.size() != y.size()) throw ParameterError("peak search needs matching x and y");
  std::vector<Peak> out;
  if (y.size() < 3) return out;
  const double top = *std::max_element(y.begin(), y.end());
  if (!(top > 0.0)) return out;
  for (std::size_t k = 1; k + 1 < y.size(); ++k) {
    if (!(y[k] > y[k - 1] && y[k] >= y[k + 1]) || y[k] < prominence * top) continue;
    const double denom = y[k - 1] - 2.0 * y[k] + y[k + 1];
    const double h = 0.5 * (x[k + 1] - x[k - 1]);
    double shift = denom < 0.0 ? 0.5 * (y[k - 1] - y[k + 1]) / denom : 0.0;
    shift = std::clamp(shift, -0.5, 0.5);
    const double height = y[k] - 0.25 * (y[k - 1] - y[k + 1]) * shift;
    out.push_back({x[k] + shift * h, height});
  }
  return out;
}

OscillationFit fit_oscillation(const std::vector<double>& t, const std::vector<double>& y,
                               double w_lo, double w_hi) {
  if (t.size() != y.size() || t.size() < 4) throw FitError("oscillation fit needs >= 4 points");
  if (!(w_hi > w_lo && w_lo > 0.0)) throw ParameterError("bad frequency range");
  const int grid = 4000;
  const double step = (w_hi - w_lo) / grid;
  double best = w_lo, best_r = linear_osc(t, y, w_lo).rms_residual;
  for (int k = 1; k <= grid; ++k) {
    const double w = w_lo + k * step;
    const double r = linear_osc(t, y, w).rms_residual;
    if (r < best_r) best_r = r, best = w;
  }
  const double w = golden([&](double v) { return linear_osc(t, y, v).rms_residual; },
                          std::max(w_lo, best - step), std::min(w_hi, best + step));
  return linear_osc(t, y, w);
}

ParityAnalysis analyse_parity(const SpinDensity& rho, const std::vector<double>& phases) {
  ParityAnalysis a;
  a.phases = phases;
  for (double ph : phases) {
    const Eigen::Matrix4cd u = analysis_pulse(ph);
    a.parity.push_back(parity(populations(u * rho * u.adjoint())));
  }
  a.fit = fit_parity(phases, a.parity);
  a.pops = populations(rho);
  a.fidelity = 0.5 * (a.pops.p2 + a.pops.p0 + a.fit.amplitude);
  return a;
}

ScanResult run_crossing_scan(const ScenarioConfig& cfg, Exec exec) {
  if (cfg.detection.enabled) throw ConfigError("detection pipeline applies to gate and parity only");
  const WellPair wp0 = cfg.resolved_wells();
  const double wbar = 0.5 * (wp0.omega_l + wp0.omega_r);
  const auto deltas = cfg.well_detuning.values();
  const auto rsb = cfg.sideband_detuning.values();
  const long n = static_cast<long>(deltas.size() * rsb.size());
  std::vector<double> sig(n), err(n);
  std::vector<long> steps(n);
  for_each_index(n, exec, [&](long idx) {
    const double d = deltas[idx / rsb.size()];
    const double r = rsb[idx % rsb.size()];
    WellPair wp = wp0;
    wp.omega_l = wbar - d;
    wp.omega_r = wbar + d;
    GateProblem p = base_problem(cfg, wp, wbar + r);
    p.initial_spin = basis_ket(kUp, kUp);
    p.schedule.segments = {drive_segment(cfg.drive, cfg.probe_duration)};
    const Ensemble e = run_shots(p, cfg.noise, cfg.shots, cfg.seed, Exec::serial, true);
    auto obs = [](const SpinDensity& rho) { return prob_down(rho, 0) + prob_down(rho, 1); };
    sig[idx] = obs(e.rho);
    err[idx] = e.standard_error(obs);
    steps[idx] = e.steps;
  });

  ScanResult res;
  for (long s : steps) res.steps += s;
  res.table.columns = {"delta_hz", "delta_rsb_hz", "signal", "signal_se"};
  for (long idx = 0; idx < n; ++idx) {
    res.table.rows.push_back(
        {to_hz(deltas[idx / rsb.size()]), to_hz(rsb[idx % rsb.size()]), sig[idx], err[idx]});
  }

  Table peaks;
  peaks.columns = {"delta_hz", "peak_hz", "height", "predicted_hz", "error_hz"};
  std::vector<double> x_hz;
  for (double r : rsb) x_hz.push_back(to_hz(r));
  double max_err = 0.0;
  int rows_with_two = 0;
  std::size_t centre = 0;
  for (std::size_t i = 0; i < deltas.size(); ++i) {
    if (std::abs(deltas[i]) < std::abs(deltas[centre])) centre = i;
  }
  double split = 0.0, asym = 0.0, predicted_split = 0.0;
  for (std::size_t i = 0; i < deltas.size(); ++i) {
    std::vector<double> line(sig.begin() + i * rsb.size(), sig.begin() + (i + 1) * rsb.size());
    const auto found = find_peaks(x_hz, line, cfg.peak_prominence);
    WellPair wp = wp0;
    wp.omega_l = wbar - deltas[i];
    wp.omega_r = wbar + deltas[i];
    const NormalModes nm = normal_modes(wp);
    const double hi = to_hz(nm.omega_str - wbar), lo = to_hz(nm.omega_com - wbar);
    for (const auto& pk : found) {
      const double pred = std::abs(pk.position - hi) < std::abs(pk.position - lo) ? hi : lo;
      peaks.rows.push_back({to_hz(deltas[i]), pk.position, pk.height, pred, pk.position - pred});
      max_err = std::max(max_err, std::abs(pk.position - pred));
    }
    if (found.size() >= 2) ++rows_with_two;
    if (i == centre) {
      predicted_split = hi - lo;
      if (found.size() >= 2) {
        auto [mn, mx] = std::minmax_element(found.begin(), found.end(),
                                            [](const Peak& a, const Peak& b) { return a.position < b.position; });
        split = mx->position - mn->position;
        asym = 0.5 * (mx->position + mn->position);
      }
    }
  }
  res.peaks = peaks;
  res.summary["centre_delta_hz"] = to_hz(deltas[centre]);
  res.summary["splitting_hz"] = split;
  res.summary["predicted_splitting_hz"] = predicted_split;
  res.summary["splitting_rel_error"] =
      predicted_split > 0.0 ? std::abs(split - predicted_split) / predicted_split : 1.0;
  res.summary["centre_peak_midpoint_hz"] = asym;
  res.summary["max_peak_error_hz"] = max_err;
  res.summary["spectral_resolution_hz"] = 1.0 / cfg.probe_duration;
  res.summary["rows_with_two_peaks"] = rows_with_two;
  return res;
}

ScanResult run_exchange(const ScenarioConfig& cfg, Exec exec) {
  if (cfg.detection.enabled) throw ConfigError("detection pipeline applies to gate and parity only");
  const SidebandMask m = cfg.drive.addressing;
  if (m.left == m.right) {
    throw ConfigError("exchange needs single-ion addressing (drive.addressed_ion)");
  }
  const int ion = m.left ? 0 : 1;
  const WellPair wp = cfg.resolved_wells();
  const NormalModes nm = normal_modes(wp);
  const double local = ion == 0 ? wp.omega_l : wp.omega_r;
  const DriveConfig dc = derive_drive(wp, nm, cfg.drive, local + cfg.drive.sideband_offset);
  double g2 = 0.0;
  for (Mode md : {Mode::stretch, Mode::com}) {
    const double q = ion == 0 ? std::sin(dc.theta(md)) : std::cos(dc.theta(md));
    g2 += dc.eta(md) * dc.eta(md) * q * q;
  }
  const double coupling = dc.omega_s * std::sqrt(g2);
  if (!(coupling > 0.0)) throw ConfigError("exchange pulse needs a non-zero sideband drive");
  const double pulse = kPi / (2.0 * coupling);

  const auto delays = cfg.delay.values();
  std::vector<double> sig(delays.size()), err(delays.size());
  std::vector<long> steps(delays.size());
  for_each_index(static_cast<long>(delays.size()), exec, [&](long k) {
    GateProblem p = base_problem(cfg, wp, local + cfg.drive.sideband_offset);
    p.initial_spin = basis_ket(kUp, kUp);
    Segment on = drive_segment(cfg.drive, pulse);
    on.omega_c = 0.0;
    Segment off = on;
    off.omega_s = 0.0;
    off.duration = delays[k];
    p.schedule.segments = {on, off, on};
    const Ensemble e = run_shots(p, cfg.noise, cfg.shots, cfg.seed, Exec::serial, true);
    auto obs = [ion](const SpinDensity& rho) { return prob_down(rho, ion); };
    sig[k] = obs(e.rho);
    err[k] = e.standard_error(obs);
    steps[k] = e.steps;
  });

  ScanResult res;
  for (long s : steps) res.steps += s;
  res.table.columns = {"delay_us", "p_down_addressed", "p_down_se"};
  for (std::size_t k = 0; k < delays.size(); ++k) {
    res.table.rows.push_back({delays[k] * 1e6, sig[k], err[k]});
  }
  const double w_pred = 2.0 * nm.omega_ex;
  res.summary["tau_ex_predicted_us"] = nm.exchange_time() * 1e6;
  res.summary["pulse_us"] = pulse * 1e6;
  if (delays.size() >= 4) {
    const OscillationFit f = fit_oscillation(delays, sig, 0.25 * w_pred, 4.0 * w_pred);
    res.summary["tau_ex_fit_us"] = kPi / f.omega * 1e6;
    res.summary["fit_amplitude"] = f.amplitude;
  }
  if (delays.size() >= 8) {
    // contrast of each half of the record at the fitted frequency
    const double w = kPi / (res.summary["tau_ex_fit_us"] * 1e-6);
    const std::size_t half = delays.size() / 2;
    const std::vector<double> t0(delays.begin(), delays.begin() + half), y0(sig.begin(), sig.begin() + half);
    const std::vector<double> t1(delays.end() - half, delays.end()), y1(sig.end() - half, sig.end());
    res.summary["contrast_early"] = 2.0 * linear_osc(t0, y0, w).amplitude;
    res.summary["contrast_late"] = 2.0 * linear_osc(t1, y1, w).amplitude;
  }
  return res;
}

ScanResult run_gate_evolution(const ScenarioConfig& cfg, Exec exec) {
  const WellPair wp = cfg.resolved_wells();
  const NormalModes nm = normal_modes(wp);
  const double target = nm.omega_bar + cfg.drive.sideband_offset;
  const DriveConfig dc = derive_drive(wp, nm, cfg.drive, target);
  const auto durations = cfg.coupling_duration.values();
  std::vector<Ensemble> ens(durations.size());
  for_each_index(static_cast<long>(durations.size()), exec, [&](long k) {
    GateProblem p = base_problem(cfg, wp, target);
    p.schedule = echo_schedule(dc, durations[k]);
    ens[k] = run_shots(p, cfg.noise, cfg.shots, cfg.seed, Exec::serial, true);
  });

  ScanResult res;
  for (const auto& e : ens) res.steps += e.steps;
  res.table.columns = {"duration_us", "p0", "p1", "p2", "p0_se", "p1_se", "p2_se", "fidelity"};
  const SpinKet target_state = entangled_target();
  for (std::size_t k = 0; k < durations.size(); ++k) {
    const Ensemble& e = ens[k];
    auto se = [&](int i) {
      return e.standard_error([i](const SpinDensity& r) { return populations(r).as_array()[i]; });
    };
    res.table.rows.push_back({durations[k] * 1e6, e.pops.p0, e.pops.p1, e.pops.p2, se(0), se(1),
                              se(2), e.fidelity(target_state)});
  }

  if (cfg.detection.enabled) {
    const DetectionSettings& ds = cfg.detection;
    const CountModel model = ds.model();
    std::mt19937_64 rng = substream(cfg.seed, 0xde7ec7);
    HistogramSet set;
    set.calibration = synth_calibration(ds, cfg.noise.spam_epsilon, rng);
    for (const auto& e : ens) {
      set.data.push_back(synthesize_histogram(model, clamp_probs(e.pops), ds.shots_per_histogram, rng));
    }
    const Pipeline pipe = [&ds](const HistogramSet& s) {
      const ProbabilityEstimator w = calibrate(ds, s.calibration, nullptr);
      std::vector<double> out;
      for (const auto& h : s.data) {
        const auto r = infer_probabilities(h, w);
        out.insert(out.end(), r.p.begin(), r.p.end());
      }
      return out;
    };
    const BootstrapResult b = bootstrap_error(set, pipe, ds.bootstrap_resamples, cfg.seed, exec);
    for (const char* c : {"p0_det", "p1_det", "p2_det", "p0_det_se", "p1_det_se", "p2_det_se"}) {
      res.table.columns.push_back(c);
    }
    for (std::size_t k = 0; k < durations.size(); ++k) {
      for (int i = 0; i < 3; ++i) res.table.rows[k].push_back(b.estimate[3 * k + i]);
      for (int i = 0; i < 3; ++i) res.table.rows[k].push_back(b.standard_error[3 * k + i]);
    }
    double off = 0.0;
    calibrate(ds, set.calibration, &off);
    res.summary["phase_offset_deg"] = off * 180.0 / kPi;
  }

  const auto& last = ens.back();
  res.summary["loop_period_us"] = loop_duration(nm, 2) * 1e6;
  res.summary["final_duration_us"] = durations.back() * 1e6;
  res.summary["final_p0_plus_p2"] = last.pops.p0 + last.pops.p2;
  res.summary["final_fidelity"] = last.fidelity(target_state);
  res.summary["kappa_hz"] = to_hz(effective_kappa(dc));
  return res;
}

ScanResult run_parity_scan(const ScenarioConfig& cfg, Exec exec) {
  const WellPair wp = cfg.resolved_wells();
  const NormalModes nm = normal_modes(wp);
  const double target = nm.omega_bar + cfg.drive.sideband_offset;
  const DriveConfig dc = derive_drive(wp, nm, cfg.drive, target);
  GateProblem p = base_problem(cfg, wp, target);
  p.schedule = two_loop_schedule(dc, nm);
  const Ensemble e = run_shots(p, cfg.noise, cfg.shots, cfg.seed, exec, true);
  const auto phases = cfg.analysis_phase.values();
  const ParityAnalysis a = analyse_parity(e.rho, phases);

  if (a.fidelity > 0.5 * (a.pops.p0 + a.pops.p2) + 0.5 + 1e-9) {
    throw ConsistencyError("fidelity exceeds (P0 + P2)/2 + 1/2");
  }

  ScanResult res;
  res.steps = e.steps;
  res.table.columns = {"phi_a_rad", "parity", "parity_se"};
  for (std::size_t k = 0; k < phases.size(); ++k) {
    const Eigen::Matrix4cd u = analysis_pulse(phases[k]);
    const double se =
        e.standard_error([&u](const SpinDensity& r) { return parity(populations(u * r * u.adjoint())); });
    res.table.rows.push_back({phases[k], a.parity[k], se});
  }
  const ParityFit ff = fit_parity_free(phases, a.parity);
  res.summary["p0"] = a.pops.p0;
  res.summary["p1"] = a.pops.p1;
  res.summary["p2"] = a.pops.p2;
  res.summary["p0_plus_p2"] = a.pops.p0 + a.pops.p2;
  res.summary["contrast"] = a.fit.amplitude;
  res.summary["parity_phase_rad"] = a.fit.phase;
  res.summary["parity_offset"] = a.fit.offset;
  res.summary["fidelity"] = a.fidelity;
  res.summary["fidelity_direct"] = e.fidelity(entangled_target());
  res.summary["free_fit_frequency"] = ff.frequency;
  res.summary["gate_duration_us"] = p.schedule.total_duration() * 1e6;
  res.summary["maximally_entangling"] = p.schedule.maximally_entangling ? 1.0 : 0.0;

  if (cfg.detection.enabled) {
    const DetectionSettings& ds = cfg.detection;
    const CountModel model = ds.model();
    std::mt19937_64 rng = substream(cfg.seed, 0xde7ec7);
    HistogramSet set;
    set.calibration = synth_calibration(ds, cfg.noise.spam_epsilon, rng);
    set.data.push_back(synthesize_histogram(model, clamp_probs(a.pops), ds.shots_per_histogram, rng));
    for (double ph : phases) {
      const Eigen::Matrix4cd u = analysis_pulse(ph);
      set.data.push_back(synthesize_histogram(model, clamp_probs(populations(u * e.rho * u.adjoint())),
                                              ds.shots_per_histogram, rng));
    }
    const Pipeline pipe = [&ds, &phases](const HistogramSet& s) {
      const ProbabilityEstimator w = calibrate(ds, s.calibration, nullptr);
      const std::vector<CountHistogram> par(s.data.begin() + 1, s.data.end());
      const FidelityEstimate fe = estimate_fidelity(w, s.data.front(), phases, par);
      std::vector<double> out{fe.pops.p0, fe.pops.p1, fe.pops.p2, fe.parity.amplitude, fe.fidelity};
      for (const auto& h : par) out.push_back(parity(infer_probabilities(h, w).populations()));
      return out;
    };
    const BootstrapResult b = bootstrap_error(set, pipe, ds.bootstrap_resamples, cfg.seed, exec);
    res.table.columns.push_back("parity_det");
    res.table.columns.push_back("parity_det_se");
    for (std::size_t k = 0; k < phases.size(); ++k) {
      res.table.rows[k].push_back(b.estimate[5 + k]);
      res.table.rows[k].push_back(b.standard_error[5 + k]);
    }
    const char* names[] = {"p0_det", "p1_det", "p2_det", "contrast_det", "fidelity_det"};
    for (int i = 0; i < 5; ++i) {
      res.summary[names[i]] = b.estimate[i];
      res.summary[std::string(names[i]) + "_se"] = b.standard_error[i];
    }
    double off = 0.0;
    calibrate(ds, set.calibration, &off);
    res.summary["phase_offset_deg"] = off * 180.0 / kPi;
    if (b.estimate[4] > 0.5 * (b.estimate[0] + b.estimate[2]) + 0.5 + 1e-9) {
      res.notes.push_back("detected fidelity exceeds (P0 + P2)/2 + 1/2 by estimator noise");
    }
  }
  return res;
}

ScanResult run_scenario(const ScenarioConfig& cfg, Exec exec) {
  switch (cfg.scenario) {
    case Scenario::crossing:
      return run_crossing_scan(cfg, exec);
    case Scenario::exchange:
      return run_exchange(cfg, exec);
    case Scenario::gate_evolution:
      return run_gate_evolution(cfg, exec);
    case Scenario::parity:
      return run_parity_scan(cfg, exec);
  }
  throw ConfigError("unknown scenario");
}

NoiseBudget noise_budget(const ScenarioConfig& cfg, long shots, Exec exec) {
  const WellPair wp = cfg.resolved_wells();
  const NormalModes nm = normal_modes(wp);
  const double target = nm.omega_bar + cfg.drive.sideband_offset;
  GateProblem p = base_problem(cfg, wp, target);
  p.schedule = two_loop_schedule(derive_drive(wp, nm, cfg.drive, target), nm);
  const SpinKet psi = entangled_target();
  auto fid = [&](const NoiseConfig& n, double nbar) {
    GateProblem q = p;
    q.thermal_nbar = nbar;
    return run_shots(q, n, shots, cfg.seed, exec).fidelity(psi);
  };
  NoiseBudget b;
  b.noiseless_fidelity = fid(NoiseConfig{}, 0.0);
  const NoiseConfig& n = cfg.noise;
  NoiseConfig pot;
  pot.drift_sigma = n.drift_sigma;
  pot.common_drift_sigma = n.common_drift_sigma;
  pot.heating_rate = n.heating_rate;
  NoiseConfig se;
  se.spont_emission_prob = n.spont_emission_prob;
  NoiseConfig in;
  in.intensity_rel_sigma = n.intensity_rel_sigma;
  NoiseConfig sp;
  sp.spam_epsilon = n.spam_epsilon;
  b.contribution["potentials"] = b.noiseless_fidelity - fid(pot, cfg.thermal_nbar);
  b.contribution["spontaneous_emission"] = b.noiseless_fidelity - fid(se, 0.0);
  b.contribution["intensity"] = b.noiseless_fidelity - fid(in, 0.0);
  b.contribution["spam"] = b.noiseless_fidelity - fid(sp, 0.0);
  b.combined_fidelity = fid(n, cfg.thermal_nbar);
  return b;
}

}  // namespace ioncoupler

namespace ioncoupler {

namespace {

WellPair beryllium_pair(double d0) {
  const double m = beryllium9_ion_mass_u() * kCodata2018.atomic_mass_unit;
  return {m, m, kCodata2018.elementary_charge, hz_to_angular(4.0e6), hz_to_angular(4.0e6), d0};
}

// Sideband amplitude that gives the requested eta * Omega_s at the nominal wells.
void set_eta_omega_s(ScenarioConfig& cfg, double eta_omega_s) {
  const WellPair wp = cfg.resolved_wells();
  const NormalModes nm = normal_modes(wp);
  cfg.drive.omega_s = eta_omega_s / reference_eta(wp, nm, cfg.drive);
}

}  // namespace

ScenarioConfig default_scenario(Scenario s) {
  ScenarioConfig cfg;
  cfg.scenario = s;
  cfg.drive.wavevector = raman_wavevector(313e-9);
  switch (s) {
    case Scenario::crossing:
      cfg.wells = beryllium_pair(27e-6);
      set_eta_omega_s(cfg, kPi / (2.0 * cfg.probe_duration));
      break;
    case Scenario::exchange:
      cfg.wells = beryllium_pair(30e-6);
      cfg.drive.addressing = {true, false};
      set_eta_omega_s(cfg, hz_to_angular(250e3));
      cfg.noise.drift_sigma = hz_to_angular(250.0);
      cfg.shots = 100;
      break;
    case Scenario::gate_evolution:
    case Scenario::parity: {
      cfg.wells = beryllium_pair(0.0);
      cfg.exchange_rate_target = hz_to_angular(6.5e3);
      cfg.drive.omega_c = hz_to_angular(23.1e3);
      set_eta_omega_s(cfg, hz_to_angular(2.4e3));
      cfg.noise.drift_sigma = hz_to_angular(250.0);
      cfg.noise.common_drift_sigma = hz_to_angular(1000.0);
      cfg.noise.heating_rate = 150.0;
      cfg.noise.intensity_rel_sigma = 0.10;
      cfg.noise.spont_emission_prob = 0.0133;
      cfg.noise.spam_epsilon = 0.03;
      cfg.thermal_nbar = 0.1;
      // large common-drift draws pump a few quanta into the modes
      cfg.dims = {16, 16};
      cfg.leakage_threshold = 1e-3;
      const double loop = loop_duration(normal_modes(cfg.resolved_wells()), 2);
      cfg.coupling_duration = {0.0, 2.4 * loop, 13};
      if (s == Scenario::parity) {
        cfg.shots = 400;
        cfg.detection.enabled = true;
      } else {
        cfg.shots = 50;
      }
      break;
    }
  }
  return cfg;
}

}  // namespace ioncoupler
