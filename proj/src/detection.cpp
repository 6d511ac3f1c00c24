#include "ioncoupler/detection.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include <Eigen/Dense>
#include <fmt/format.h>

#include "ioncoupler/constants.hpp"
#include "ioncoupler/errors.hpp"

namespace ioncoupler {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

void check_probs(const Populations& p) {
  for (double v : p.as_array()) {
    if (!(v >= -1e-12 && v <= 1.0 + 1e-12)) throw ParameterError("probabilities must lie in [0, 1]");
  }
  if (std::abs(p.sum() - 1.0) > 1e-9) throw ParameterError("probabilities must sum to 1");
}

std::vector<double> cumulative(const std::vector<double>& pmf) {
  std::vector<double> c(pmf.size());
  std::partial_sum(pmf.begin(), pmf.end(), c.begin());
  return c;
}

int invert(const std::vector<double>& cdf, double u) {
  const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
  return it == cdf.end() ? static_cast<int>(cdf.size()) - 1 : static_cast<int>(it - cdf.begin());
}

int max_bin(const std::vector<CalibrationPoint>& cal) {
  int b = 1;
  for (const auto& c : cal) b = std::max(b, static_cast<int>(c.hist.h.size()));
  return b;
}

// Normalized histogram with counts >= bins pooled into the last bin.
VectorXd normalized(const CountHistogram& h, int bins) {
  VectorXd x = VectorXd::Zero(bins);
  const long n = h.total();
  if (n <= 0) throw ParameterError("empty calibration histogram");
  for (std::size_t i = 0; i < h.h.size(); ++i) {
    x[std::min<int>(static_cast<int>(i), bins - 1)] += static_cast<double>(h.h[i]);
  }
  return x / static_cast<double>(n);
}

MatrixXd ramsey_design(const std::vector<CalibrationPoint>& cal, double offset) {
  MatrixXd p(cal.size(), 3);
  for (std::size_t k = 0; k < cal.size(); ++k) {
    const auto r = ramsey_populations(cal[k].phase + offset).as_array();
    for (int b = 0; b < 3; ++b) p(k, b) = r[b];
  }
  return p;
}

MatrixXd histogram_matrix(const std::vector<CalibrationPoint>& cal, int bins) {
  MatrixXd h(cal.size(), bins);
  for (std::size_t k = 0; k < cal.size(); ++k) h.row(k) = normalized(cal[k].hist, bins).transpose();
  return h;
}

double offset_residual(const std::vector<CalibrationPoint>& cal, const MatrixXd& h, double offset) {
  const MatrixXd p = ramsey_design(cal, offset);
  const MatrixXd q = p.colPivHouseholderQr().solve(h);
  return (h - p * q).squaredNorm();
}

std::pair<double, double> golden_min(const std::function<double(double)>& f, double a, double b,
                                     double tol) {
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - g * (b - a), d = a + g * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tol) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = f(d);
    }
  }
  const double x = 0.5 * (a + b);
  return {x, f(x)};
}

ParityFit linear_parity_fit(const std::vector<double>& phases, const std::vector<double>& parity,
                            double freq) {
  const int n = static_cast<int>(phases.size());
  MatrixXd x(n, 3);
  VectorXd y(n);
  for (int k = 0; k < n; ++k) {
    x(k, 0) = std::cos(freq * phases[k]);
    x(k, 1) = std::sin(freq * phases[k]);
    x(k, 2) = 1.0;
    y[k] = parity[k];
  }
  const VectorXd c = x.colPivHouseholderQr().solve(y);
  ParityFit f;
  f.amplitude = std::hypot(c[0], c[1]);
  f.phase = std::atan2(-c[1], c[0]);
  f.offset = c[2];
  f.frequency = freq;
  f.rms_residual = std::sqrt((x * c - y).squaredNorm() / n);
  return f;
}

void check_parity_input(const std::vector<double>& phases, const std::vector<double>& parity) {
  if (phases.size() != parity.size()) throw ParameterError("phase and parity lengths differ");
  if (phases.size() < 4) throw FitError("parity fit needs at least four points");
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

std::string chomp(std::string s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == '\n')) s.pop_back();
  return s;
}

Populations dressed_ramsey(double phase, double flip) {
  // probability for one ion to end dark (|up>)
  const double c = std::cos(0.5 * phase), s = std::sin(0.5 * phase);
  const double d = (1.0 - flip) * c * c + flip * s * s;
  return {d * d, 2.0 * d * (1.0 - d), (1.0 - d) * (1.0 - d)};
}

}  // namespace

double CountDistribution::mean() const {
  double m = 0.0;
  for (std::size_t i = 0; i < pmf.size(); ++i) m += static_cast<double>(i) * pmf[i];
  return m;
}

double CountDistribution::variance() const {
  const double m = mean();
  double v = 0.0;
  for (std::size_t i = 0; i < pmf.size(); ++i) v += (i - m) * (i - m) * pmf[i];
  return v;
}

std::array<double, 3> CountModel::means() const { return {q[0].mean(), q[1].mean(), q[2].mean()}; }

std::vector<double> CountModel::mixture(const Populations& p) const {
  const auto w = p.as_array();
  std::size_t n = 0;
  for (const auto& d : q) n = std::max(n, d.pmf.size());
  std::vector<double> m(n, 0.0);
  for (int b = 0; b < 3; ++b) {
    for (std::size_t i = 0; i < q[b].pmf.size(); ++i) m[i] += w[b] * q[b].pmf[i];
  }
  return m;
}

CountDistribution negative_binomial(double mean, double dispersion, double tail) {
  if (!(mean >= 0.0)) throw ParameterError("mean count must be non-negative");
  if (!(dispersion >= 1.0)) throw ParameterError("dispersion must be >= 1");
  CountDistribution d;
  if (mean == 0.0) {
    d.pmf = {1.0};
    return d;
  }
  double p0, ratio_q = 0.0, r = 0.0;
  const bool poisson = dispersion == 1.0;
  if (poisson) {
    p0 = std::exp(-mean);
  } else {
    const double success = 1.0 / dispersion;
    r = mean / (dispersion - 1.0);
    ratio_q = 1.0 - success;
    p0 = std::exp(r * std::log(success));
  }
  double pk = p0, acc = 0.0;
  for (int k = 0; k < 100000; ++k) {
    d.pmf.push_back(pk);
    acc += pk;
    if (k > mean && 1.0 - acc < tail) break;
    pk *= poisson ? mean / (k + 1.0) : (k + r) / (k + 1.0) * ratio_q;
  }
  for (double& v : d.pmf) v /= acc;
  return d;
}

CountModel default_count_model() {
  CountModel m;
  m.q = {negative_binomial(0.4, 1.3), negative_binomial(4.4, 1.3), negative_binomial(9.0, 1.3)};
  return m;
}

long CountHistogram::total() const { return std::accumulate(h.begin(), h.end(), 0L); }

double CountHistogram::mean() const {
  const long n = total();
  if (n == 0) return 0.0;
  double s = 0.0;
  for (std::size_t i = 0; i < h.size(); ++i) s += static_cast<double>(i) * h[i];
  return s / n;
}

void CountHistogram::add(int bin, long n) {
  if (bin < 0) throw ParameterError("negative count bin");
  if (static_cast<std::size_t>(bin) >= h.size()) h.resize(bin + 1, 0);
  h[bin] += n;
}

Populations ramsey_populations(double phase) {
  const double c = std::cos(0.5 * phase), s = std::sin(0.5 * phase);
  return {c * c * c * c, 0.5 * std::sin(phase) * std::sin(phase), s * s * s * s};
}

CountHistogram synthesize_histogram(const CountModel& model, const Populations& probs, long n,
                                    std::mt19937_64& rng) {
  check_probs(probs);
  if (n < 0) throw ParameterError("histogram size must be non-negative");
  std::array<std::vector<double>, 3> cdf;
  for (int b = 0; b < 3; ++b) cdf[b] = cumulative(model.q[b].pmf);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  CountHistogram h;
  const double c0 = probs.p0, c1 = probs.p0 + probs.p1;
  for (long k = 0; k < n; ++k) {
    const double uc = u(rng), un = u(rng);
    const int b = uc < c0 ? 0 : (uc < c1 ? 1 : 2);
    h.add(invert(cdf[b], un));
  }
  return h;
}

CountHistogram synthesize_histogram(const CountModel& model, const Populations& probs, long n,
                                    std::uint64_t seed) {
  std::mt19937_64 rng = substream(seed, 0);
  return synthesize_histogram(model, probs, n, rng);
}

std::array<std::vector<double>, 3> estimate_count_distributions(
    const std::vector<CalibrationPoint>& cal, int bins) {
  const MatrixXd p = ramsey_design(cal, 0.0);
  const Eigen::Matrix3d ptp = p.transpose() * p;
  if (std::abs(ptp.determinant()) < 1e-12) {
    throw FitError("calibration phases do not determine the count distributions");
  }
  const MatrixXd q = ptp.ldlt().solve(p.transpose() * histogram_matrix(cal, bins));
  std::array<std::vector<double>, 3> out;
  for (int b = 0; b < 3; ++b) {
    out[b].resize(bins);
    double s = 0.0;
    for (int i = 0; i < bins; ++i) {
      out[b][i] = std::max(0.0, q(b, i));
      s += out[b][i];
    }
    if (s > 0.0) {
      for (double& v : out[b]) v /= s;
    }
  }
  return out;
}

ProbabilityEstimator fit_estimators(const std::vector<CalibrationPoint>& cal,
                                    const FitOptions& options) {
  std::vector<double> phases;
  for (const auto& c : cal) {
    const double ph = std::remainder(c.phase, kTwoPi);
    if (std::none_of(phases.begin(), phases.end(),
                     [&](double x) { return std::abs(x - ph) < 1e-9; })) {
      phases.push_back(ph);
    }
  }
  if (phases.size() < 3) throw FitError("estimator fit needs at least three distinct phases");

  int bins = max_bin(cal);
  if (options.max_bins > 0) bins = std::min(bins, options.max_bins);
  const MatrixXd x = histogram_matrix(cal, bins);
  const MatrixXd y = ramsey_design(cal, 0.0);
  const auto qhat = estimate_count_distributions(cal, bins);

  VectorXd pmix(bins);
  for (int i = 0; i < bins; ++i) pmix[i] = 0.25 * qhat[0][i] + 0.5 * qhat[1][i] + 0.25 * qhat[2][i];
  const double lambda = options.lambda_per_histogram * static_cast<double>(cal.size());
  MatrixXd a = x.transpose() * x;
  a.diagonal() += lambda * pmix + VectorXd::Constant(bins, options.jitter);
  const Eigen::LDLT<MatrixXd> ldlt(a);
  if (ldlt.info() != Eigen::Success) throw FitError("estimator normal equations are singular");
  const MatrixXd w = ldlt.solve(x.transpose() * y);

  ProbabilityEstimator est;
  for (int b = 0; b < 3; ++b) {
    est.w[b].resize(bins);
    for (int i = 0; i < bins; ++i) est.w[b][i] = w(i, b);
  }
  return est;
}

InferredProbabilities infer_probabilities(const CountHistogram& h, const ProbabilityEstimator& w) {
  const long n = h.total();
  if (n < 2) throw ParameterError("variance undefined for fewer than two experiments");
  const int bins = w.bins();
  if (bins == 0) throw ParameterError("empty estimator");
  InferredProbabilities r;
  for (int b = 0; b < 3; ++b) {
    double s1 = 0.0, s2 = 0.0;
    for (std::size_t i = 0; i < h.h.size(); ++i) {
      const double wi = w.w[b][std::min<int>(static_cast<int>(i), bins - 1)];
      s1 += wi * h.h[i];
      s2 += wi * wi * h.h[i];
    }
    const double p = s1 / n;
    r.p[b] = p;
    r.v[b] = (s2 / n - p * p) / (n - 1.0);
    if (p < 0.0 || p > 1.0) r.out_of_range = true;
  }
  return r;
}

PhaseOffset phase_offset_correct(const std::vector<CalibrationPoint>& cal,
                                 double search_halfwidth) {
  if (cal.size() < 4) throw FitError("phase offset fit needs at least four calibration points");
  const MatrixXd h = histogram_matrix(cal, max_bin(cal));
  auto f = [&](double off) { return offset_residual(cal, h, off); };
  const int grid = 200;
  const double step = 2.0 * search_halfwidth / grid;
  double best = -search_halfwidth, best_r = f(best);
  for (int k = 1; k <= grid; ++k) {
    const double off = -search_halfwidth + k * step;
    const double r = f(off);
    if (r < best_r) {
      best_r = r;
      best = off;
    }
  }
  const auto [x, fx] = golden_min(f, best - step, best + step, 1e-7);
  PhaseOffset out;
  out.offset = x;
  out.residual = fx;
  out.corrected = cal;
  for (auto& c : out.corrected) c.phase += x;
  return out;
}

std::vector<double> calibration_phases(int n) {
  if (n < 1) throw ParameterError("need at least one phase");
  std::vector<double> p(n);
  for (int k = 0; k < n; ++k) p[k] = kTwoPi * k / n;
  return p;
}

ParityFit fit_parity(const std::vector<double>& phases, const std::vector<double>& parity) {
  check_parity_input(phases, parity);
  return linear_parity_fit(phases, parity, 2.0);
}

ParityFit fit_parity_free(const std::vector<double>& phases, const std::vector<double>& parity,
                          double f_lo, double f_hi) {
  check_parity_input(phases, parity);
  if (!(f_hi > f_lo)) throw ParameterError("frequency search range is empty");
  auto r = [&](double f) { return linear_parity_fit(phases, parity, f).rms_residual; };
  const int grid = 400;
  const double step = (f_hi - f_lo) / grid;
  double best = f_lo, best_r = r(f_lo);
  for (int k = 1; k <= grid; ++k) {
    const double f = f_lo + k * step;
    const double v = r(f);
    if (v < best_r) {
      best_r = v;
      best = f;
    }
  }
  const double f =
      golden_min(r, std::max(f_lo, best - step), std::min(f_hi, best + step), 1e-9).first;
  return linear_parity_fit(phases, parity, f);
}

CountHistogram resample(const CountHistogram& h, std::mt19937_64& rng) {
  CountHistogram out;
  out.h.assign(h.h.size(), 0);
  long left = h.total();
  long mass = left;
  for (std::size_t i = 0; i < h.h.size() && left > 0; ++i) {
    if (h.h[i] == 0) continue;
    const double p = static_cast<double>(h.h[i]) / static_cast<double>(mass);
    const long k = p >= 1.0 ? left : std::binomial_distribution<long>(left, p)(rng);
    out.h[i] = k;
    left -= k;
    mass -= h.h[i];
  }
  return out;
}

BootstrapResult bootstrap_error(const HistogramSet& input, const Pipeline& pipeline, int resamples,
                                std::uint64_t seed, Exec exec) {
  if (resamples < 2) throw ParameterError("bootstrap needs at least two resamples");
  BootstrapResult res;
  res.estimate = pipeline(input);
  std::vector<std::vector<double>> reps(resamples);
  for_each_index(resamples, exec, [&](long r) {
    std::mt19937_64 rng = substream(seed, static_cast<std::uint64_t>(r));
    HistogramSet s;
    s.calibration = input.calibration;
    for (auto& c : s.calibration) c.hist = resample(c.hist, rng);
    s.data.reserve(input.data.size());
    for (const auto& d : input.data) s.data.push_back(resample(d, rng));
    reps[r] = pipeline(s);
  });
  const std::size_t m = res.estimate.size();
  res.standard_error.assign(m, 0.0);
  for (std::size_t j = 0; j < m; ++j) {
    double mean = 0.0;
    for (const auto& v : reps) mean += v.at(j);
    mean /= resamples;
    double ss = 0.0;
    for (const auto& v : reps) ss += (v[j] - mean) * (v[j] - mean);
    res.standard_error[j] = std::sqrt(ss / (resamples - 1));
  }
  return res;
}

FidelityEstimate estimate_fidelity(const ProbabilityEstimator& w, const CountHistogram& pops_hist,
                                   const std::vector<double>& analysis_phases,
                                   const std::vector<CountHistogram>& parity_hists) {
  if (analysis_phases.size() != parity_hists.size()) {
    throw ParameterError("one parity histogram per analysis phase is required");
  }
  FidelityEstimate e;
  e.pops = infer_probabilities(pops_hist, w).populations();
  std::vector<double> par;
  par.reserve(parity_hists.size());
  for (const auto& h : parity_hists) par.push_back(parity(infer_probabilities(h, w).populations()));
  e.parity = fit_parity(analysis_phases, par);
  e.fidelity = 0.5 * (e.pops.p2 + e.pops.p0 + e.parity.amplitude);
  return e;
}

SpinDensity typical_gate_state() {
  SpinDensity rho = 0.73 * pure_density(entangled_target());
  rho += 0.09 * pure_density(basis_ket(kDown, kDown));
  rho += 0.09 * pure_density(basis_ket(kUp, kUp));
  rho += 0.045 * pure_density(basis_ket(kUp, kDown));
  rho += 0.045 * pure_density(basis_ket(kDown, kUp));
  return rho;
}

PrepBias prep_error_bias(double epsilon, const PrepBiasOptions& o) {
  if (!(epsilon >= 0.0 && epsilon < 1.0)) throw ParameterError("epsilon must lie in [0, 1)");
  if (o.trials < 2) throw ParameterError("prep bias needs at least two trials");
  const SpinDensity rho = o.state.isZero() ? typical_gate_state() : o.state;
  const double flip = 1.0 - std::sqrt(1.0 - epsilon);
  const auto cal_phases = calibration_phases(o.calibration_points);
  const auto ana_phases = calibration_phases(o.analysis_points);
  std::vector<Populations> ana_pops;
  for (double ph : ana_phases) {
    const Eigen::Matrix4cd u = analysis_pulse(ph);
    ana_pops.push_back(populations(u * rho * u.adjoint()));
  }
  const Populations gate_pops = populations(rho);

  std::vector<double> diffs(o.trials);
  for_each_index(o.trials, o.exec, [&](long t) {
    // Same uniforms for the biased and unbiased calibrations.
    std::vector<CalibrationPoint> cal_err, cal_ok;
    for (std::size_t k = 0; k < cal_phases.size(); ++k) {
      std::mt19937_64 r1 = substream(o.seed, static_cast<std::uint64_t>(t), k + 1);
      std::mt19937_64 r2 = r1;
      cal_err.push_back({cal_phases[k], synthesize_histogram(o.model, dressed_ramsey(cal_phases[k], flip),
                                                             o.shots_per_histogram, r1)});
      cal_ok.push_back({cal_phases[k], synthesize_histogram(o.model, dressed_ramsey(cal_phases[k], 0.0),
                                                            o.shots_per_histogram, r2)});
    }
    std::mt19937_64 rd = substream(o.seed, static_cast<std::uint64_t>(t), 0);
    const CountHistogram hp = synthesize_histogram(o.model, gate_pops, o.shots_per_histogram, rd);
    std::vector<CountHistogram> hpar;
    for (const auto& p : ana_pops) hpar.push_back(synthesize_histogram(o.model, p, o.shots_per_histogram, rd));
    const double f_err = estimate_fidelity(fit_estimators(cal_err), hp, ana_phases, hpar).fidelity;
    const double f_ok = estimate_fidelity(fit_estimators(cal_ok), hp, ana_phases, hpar).fidelity;
    diffs[t] = f_err - f_ok;
  });
  PrepBias b;
  for (double d : diffs) b.bias += d;
  b.bias /= o.trials;
  double ss = 0.0;
  for (double d : diffs) ss += (d - b.bias) * (d - b.bias);
  b.standard_error = std::sqrt(ss / (o.trials - 1.0) / o.trials);
  return b;
}

void write_histogram_csv(std::ostream& os, const CountHistogram& h) {
  os << "i,h\n";
  for (std::size_t i = 0; i < h.h.size(); ++i) os << i << ',' << h.h[i] << '\n';
}

CountHistogram read_histogram_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || chomp(line) != "i,h") throw ConfigError("histogram CSV must start with 'i,h'");
  CountHistogram h;
  int lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    line = chomp(line);
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    try {
      if (cells.size() != 2) throw std::invalid_argument("columns");
      std::size_t p1 = 0, p2 = 0;
      const long i = std::stol(cells[0], &p1);
      const long n = std::stol(cells[1], &p2);
      if (p1 != cells[0].size() || p2 != cells[1].size() || i < 0 || n < 0) {
        throw std::invalid_argument("value");
      }
      h.add(static_cast<int>(i), n);
    } catch (const std::exception&) {
      throw ConfigError("histogram CSV line " + std::to_string(lineno) + ": expected 'bin,count'");
    }
  }
  return h;
}

void write_estimator_csv(std::ostream& os, const ProbabilityEstimator& w) {
  os << "i,w0,w1,w2\n";
  for (int i = 0; i < w.bins(); ++i) {
    os << fmt::format("{},{},{},{}\n", i, w.w[0][i], w.w[1][i], w.w[2][i]);
  }
}

ProbabilityEstimator read_estimator_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || chomp(line) != "i,w0,w1,w2") {
    throw ConfigError("estimator CSV must start with 'i,w0,w1,w2'");
  }
  ProbabilityEstimator w;
  int lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    line = chomp(line);
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    try {
      if (cells.size() != 4 || std::stol(cells[0]) != w.bins()) throw std::invalid_argument("bin");
      for (int b = 0; b < 3; ++b) w.w[b].push_back(std::stod(cells[b + 1]));
    } catch (const std::exception&) {
      throw ConfigError("estimator CSV line " + std::to_string(lineno) +
                        ": expected consecutive bins 'i,w0,w1,w2'");
    }
  }
  return w;
}

}  // namespace ioncoupler
