#include "ioncoupler/propagator.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

#include "ioncoupler/errors.hpp"

namespace ioncoupler {

namespace {

constexpr cplx kI{0.0, 1.0};

// Plain complex product; std::complex operator* goes through the
// Annex-G NaN handling path, which dominates the sparse kernel.
inline cplx cmul(cplx a, cplx b) {
  return {a.real() * b.real() - a.imag() * b.imag(), a.real() * b.imag() + a.imag() * b.real()};
}

using RowMap = Eigen::Map<const Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

// One Taylor-series step psi <- exp(-i H dt) psi.
void taylor_step(const SegmentOperator& op, double t_mid, double dt, Eigen::VectorXcd& psi,
                 Eigen::VectorXcd& term, Eigen::VectorXcd& scratch, std::vector<cplx>& vals) {
  op.values_at(t_mid, vals);
  term = psi;
  for (int k = 1; k <= 40; ++k) {
    op.apply_values(vals, term, scratch);
    term = (-kI * dt / static_cast<double>(k)) * scratch;
    psi += term;
    if (term.squaredNorm() < 1e-34) break;
  }
}

}  // namespace

QuantumState::QuantumState(FockDims dims) : dims_(dims), amp_(Eigen::VectorXcd::Zero(dims.dim())) {
  if (dims.n_str < 2 || dims.n_com < 2) throw ParameterError("Fock truncation needs >= 2 levels");
}

QuantumState QuantumState::basis(FockDims dims, int s_l, int s_r, int n_str, int n_com) {
  SpinKet spin = basis_ket(s_l, s_r);
  return product(dims, spin, n_str, n_com);
}

QuantumState QuantumState::product(FockDims dims, const SpinKet& spin, int n_str, int n_com) {
  QuantumState s(dims);
  if (n_str < 0 || n_str >= dims.n_str || n_com < 0 || n_com >= dims.n_com) {
    throw ParameterError("Fock level outside the truncation");
  }
  for (int k = 0; k < 4; ++k) s.amp_[s.index(k, n_str, n_com)] = spin[k];
  return s;
}

void QuantumState::normalize() {
  const double n = amp_.norm();
  if (!(n > 0.0)) throw DomainError("cannot normalize a zero state");
  amp_ /= n;
}

SpinDensity QuantumState::reduced_spin() const {
  RowMap m(amp_.data(), 4, dims_.motion());
  return m * m.adjoint();
}

std::vector<double> QuantumState::fock_distribution(Mode mode) const {
  std::vector<double> p(dims_.levels(mode), 0.0);
  for (int s = 0; s < 4; ++s) {
    for (int a = 0; a < dims_.n_str; ++a) {
      for (int b = 0; b < dims_.n_com; ++b) {
        p[mode == Mode::stretch ? a : b] += std::norm(amp_[index(s, a, b)]);
      }
    }
  }
  return p;
}

double QuantumState::occupation(Mode m) const {
  const auto p = fock_distribution(m);
  double n = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) n += static_cast<double>(k) * p[k];
  return n;
}

double QuantumState::top_population(Mode m) const { return fock_distribution(m).back(); }

void QuantumState::apply_spin(const Eigen::Matrix4cd& u) {
  Eigen::Map<Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> m(
      amp_.data(), 4, dims_.motion());
  m = (u * m).eval();
}

void QuantumState::apply_spin_local(const Spin2& op, int ion) {
  const Spin2 id = Spin2::Identity();
  apply_spin(ion == 0 ? kron(op, id) : kron(id, op));
}

void QuantumState::apply_raise(Mode m, cplx coefficient, QuantumState& out) const {
  for (int s = 0; s < 4; ++s) {
    for (int a = 0; a < dims_.n_str; ++a) {
      for (int b = 0; b < dims_.n_com; ++b) {
        const cplx v = amp_[index(s, a, b)];
        if (v == cplx{}) continue;
        if (m == Mode::stretch && a + 1 < dims_.n_str) {
          out.amp_[index(s, a + 1, b)] += coefficient * std::sqrt(a + 1.0) * v;
        } else if (m == Mode::com && b + 1 < dims_.n_com) {
          out.amp_[index(s, a, b + 1)] += coefficient * std::sqrt(b + 1.0) * v;
        }
      }
    }
  }
}

SegmentOperator::SegmentOperator(const DriveConfig& dc, FockDims dims)
    : dims_(dims), delta_str_(dc.delta_str), delta_com_(dc.delta_com) {
  const Spin2 carrier = sigma_phi(dc.phi_c);
  auto idx = [&](int sl, int sr, int a, int b) {
    return ((2 * sl + sr) * dims.n_str + a) * dims.n_com + b;
  };
  for (int sl = 0; sl < 2; ++sl) {
    for (int sr = 0; sr < 2; ++sr) {
      for (int a = 0; a < dims.n_str; ++a) {
        for (int b = 0; b < dims.n_com; ++b) {
          const int col = idx(sl, sr, a, b);
          if (dc.omega_c != 0.0) {
            entries_.push_back({idx(1 - sl, sr, a, b), col, dc.omega_c * carrier(1 - sl, sl), 0});
            entries_.push_back({idx(sl, 1 - sr, a, b), col, dc.omega_c * carrier(1 - sr, sr), 0});
          }
        }
      }
    }
  }
  if (dc.omega_s != 0.0) {
    for (Mode m : {Mode::stretch, Mode::com}) {
      const double th = dc.theta(m);
      const cplx pre = kI * dc.eta(m) * dc.omega_s;
      const cplx gl = dc.addressing.left ? pre * std::sin(th) * std::exp(kI * (dc.phi_s - dc.phi))
                                         : cplx{};
      const cplx gr = dc.addressing.right ? pre * std::cos(th) * std::exp(kI * (dc.phi_s + dc.phi))
                                          : cplx{};
      const std::uint8_t comp = m == Mode::stretch ? 1 : 3;
      // a_m sigma^+_ion : |down, n> -> sqrt(n) |up, n-1>
      for (int ion = 0; ion < 2; ++ion) {
        const cplx g = ion == 0 ? gl : gr;
        if (g == cplx{}) continue;
        for (int other = 0; other < 2; ++other) {
          const int sl_from = ion == 0 ? kDown : other;
          const int sr_from = ion == 0 ? other : kDown;
          const int sl_to = ion == 0 ? kUp : other;
          const int sr_to = ion == 0 ? other : kUp;
          for (int a = 0; a < dims.n_str; ++a) {
            for (int b = 0; b < dims.n_com; ++b) {
              const int n = m == Mode::stretch ? a : b;
              if (n == 0) continue;
              const int col = idx(sl_from, sr_from, a, b);
              const int row = m == Mode::stretch ? idx(sl_to, sr_to, a - 1, b)
                                                 : idx(sl_to, sr_to, a, b - 1);
              const cplx v = g * std::sqrt(static_cast<double>(n));
              entries_.push_back({row, col, v, comp});
              entries_.push_back({col, row, std::conj(v), static_cast<std::uint8_t>(comp + 1)});
            }
          }
        }
      }
    }
  }
  std::stable_sort(entries_.begin(), entries_.end(),
                   [](const Entry& a, const Entry& b) { return a.row < b.row; });
  row_start_.assign(dims.dim() + 1, 0);
  for (const auto& e : entries_) ++row_start_[e.row + 1];
  for (int r = 0; r < dims.dim(); ++r) row_start_[r + 1] += row_start_[r];
  std::vector<double> rows(dims.dim(), 0.0);
  for (const auto& e : entries_) rows[e.row] += std::abs(e.value);
  norm_bound_ = rows.empty() ? 0.0 : *std::max_element(rows.begin(), rows.end());
}

void SegmentOperator::values_at(double t, std::vector<cplx>& out) const {
  const cplx es = std::exp(-kI * delta_str_ * t);
  const cplx ec = std::exp(-kI * delta_com_ * t);
  const cplx coef[5] = {1.0, es, std::conj(es), ec, std::conj(ec)};
  out.resize(entries_.size());
  for (std::size_t k = 0; k < entries_.size(); ++k) {
    out[k] = cmul(coef[entries_[k].component], entries_[k].value);
  }
}

void SegmentOperator::apply_values(const std::vector<cplx>& vals, const Eigen::VectorXcd& x,
                                   Eigen::VectorXcd& y) const {
  y.resize(x.size());
  const int rows = static_cast<int>(row_start_.size()) - 1;
  for (int r = 0; r < rows; ++r) {
    cplx acc{};
    for (int k = row_start_[r]; k < row_start_[r + 1]; ++k) acc += cmul(vals[k], x[entries_[k].col]);
    y[r] = acc;
  }
}

void SegmentOperator::apply(double t, const Eigen::VectorXcd& x, Eigen::VectorXcd& y) const {
  std::vector<cplx> vals;
  values_at(t, vals);
  apply_values(vals, x, y);
}

Eigen::MatrixXcd SegmentOperator::dense(double t) const {
  const int d = dims_.dim();
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(d, d);
  Eigen::VectorXcd e = Eigen::VectorXcd::Zero(d), col(d);
  for (int j = 0; j < d; ++j) {
    e.setZero();
    e[j] = 1.0;
    apply(t, e, col);
    h.col(j) = col;
  }
  return h;
}

Eigen::MatrixXcd build_hamiltonian(const DriveConfig& dc, const NormalModes& nm, double t,
                                   FockDims dims) {
  const double split = dc.delta_str - dc.delta_com;
  if (std::abs(split - nm.splitting()) > 1e-9 * std::max(1.0, nm.splitting())) {
    throw ConsistencyError("drive detunings do not match the normal-mode splitting");
  }
  Eigen::MatrixXcd h = SegmentOperator(dc, dims).dense(t);
  const double scale = h.norm();
  if ((h - h.adjoint()).norm() > 1e-12 * std::max(scale, 1e-300)) {
    throw ConsistencyError("assembled Hamiltonian is not Hermitian");
  }
  return h;
}

double lamb_dicke_load(const DriveConfig& dc, FockDims dims) {
  const double eta = std::max(dc.eta_str, dc.eta_com);
  return eta * eta * (std::max(dims.n_str, dims.n_com) - 1);
}

QuantumState evolve(const QuantumState& state, const DriveConfig& dc, const Schedule& schedule,
                    const EvolveOptions& options, EvolveStats* stats, double t0) {
  if (std::abs(state.norm() - 1.0) > 1e-9) throw ParameterError("input state is not normalized");
  if (!(options.max_phase_step > 0.0)) throw ParameterError("max_phase_step must be positive");
  QuantumState psi = state;
  const FockDims dims = state.dims();
  auto events = options.events;
  std::stable_sort(events.begin(), events.end(),
                   [](const EvolveEvent& a, const EvolveEvent& b) { return a.time < b.time; });
  std::size_t next_event = 0;
  Eigen::VectorXcd term(dims.dim()), scratch(dims.dim());
  std::vector<cplx> vals;
  long steps = 0;
  double t = t0;

  auto fire_due = [&](double upto) {
    while (next_event < events.size() && events[next_event].time <= upto) {
      if (events[next_event].action) events[next_event].action(events[next_event].time, psi);
      ++next_event;
    }
  };
  fire_due(t);

  for (const auto& seg : schedule.segments) {
    if (seg.duration < 0.0) throw ParameterError("segment duration must be non-negative");
    const SegmentOperator op(segment_drive(dc, seg), dims);
    double h_dt = op.norm_bound() > 0.0 ? options.max_phase_step / op.norm_bound() : seg.duration;
    if (options.dt_max > 0.0) h_dt = std::min(h_dt, options.dt_max);
    const double t_end = t + seg.duration;
    while (t < t_end) {
      double stop = t_end;
      if (next_event < events.size() && events[next_event].time < stop) {
        stop = std::max(t, events[next_event].time);
      }
      const double span = stop - t;
      if (span > 0.0 && op.norm_bound() > 0.0) {
        const long n = std::max(1L, static_cast<long>(std::ceil(span / h_dt - 1e-12)));
        const double dt = span / static_cast<double>(n);
        for (long k = 0; k < n; ++k) {
          taylor_step(op, t + (k + 0.5) * dt, dt, psi.amplitudes(), term, scratch, vals);
        }
        steps += n;
      }
      t = stop;
      fire_due(t);
      if (stop == t_end) break;
    }
    t = t_end;
  }
  fire_due(t);

  const double top_str = psi.top_population(Mode::stretch);
  const double top_com = psi.top_population(Mode::com);
  if (stats) {
    stats->steps += steps;
    stats->top_str = std::max(stats->top_str, top_str);
    stats->top_com = std::max(stats->top_com, top_com);
  }
  if (options.check_leakage) {
    if (top_str > options.leakage_threshold) throw LeakageError("stretch", top_str);
    if (top_com > options.leakage_threshold) throw LeakageError("com", top_com);
  }
  return psi;
}

void apply_local_raise(QuantumState& psi, const DriveConfig& dc, int ion, double t) {
  QuantumState out(psi.dims());
  for (Mode m : {Mode::stretch, Mode::com}) {
    const double th = dc.theta(m);
    const double q = ion == 0 ? std::sin(th) : std::cos(th);
    psi.apply_raise(m, q * std::exp(kI * dc.delta(m) * t), out);
  }
  psi = std::move(out);
  psi.normalize();
}

double spin_motion_entropy(const QuantumState& psi) {
  return von_neumann_entropy(psi.reduced_spin());
}

}  // namespace ioncoupler
