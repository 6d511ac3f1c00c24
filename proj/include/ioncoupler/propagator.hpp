#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "ioncoupler/dressed.hpp"
#include "ioncoupler/spin.hpp"
#include "ioncoupler/wells.hpp"

namespace ioncoupler {

struct FockDims {
  int n_str = 8;
  int n_com = 8;
  int motion() const { return n_str * n_com; }
  int dim() const { return 4 * n_str * n_com; }
  int levels(Mode m) const { return m == Mode::stretch ? n_str : n_com; }
};

// Amplitudes over |s_l, s_r, n_str, n_com>, lexicographic in that order.
class QuantumState {
 public:
  QuantumState() = default;
  explicit QuantumState(FockDims dims);

  static QuantumState basis(FockDims dims, int s_l, int s_r, int n_str, int n_com);
  // Spin ket times |n_str, n_com>.
  static QuantumState product(FockDims dims, const SpinKet& spin, int n_str, int n_com);

  const FockDims& dims() const { return dims_; }
  Eigen::VectorXcd& amplitudes() { return amp_; }
  const Eigen::VectorXcd& amplitudes() const { return amp_; }

  int index(int spin, int n_str, int n_com) const {
    return (spin * dims_.n_str + n_str) * dims_.n_com + n_com;
  }

  double norm() const { return amp_.norm(); }
  void normalize();

  SpinDensity reduced_spin() const;
  double occupation(Mode m) const;
  double top_population(Mode m) const;
  // sum over spins and the other mode of |<n|psi>|^2
  std::vector<double> fock_distribution(Mode m) const;

  // Spin-only operator applied to every motional component.
  void apply_spin(const Eigen::Matrix4cd& u);
  void apply_spin_local(const Spin2& op, int ion);
  // Raising operator on one mode; zero for the top level.
  void apply_raise(Mode m, cplx coefficient, QuantumState& out) const;

 private:
  FockDims dims_;
  Eigen::VectorXcd amp_;
};

// Interaction-picture Hamiltonian of one segment,
//   H(t) = H_c + sum_m [exp(-i delta_m t) B_m + h.c.],
// stored sparse with each entry tagged by its time-dependence component.
class SegmentOperator {
 public:
  SegmentOperator(const DriveConfig& dc, FockDims dims);

  // y = H(t) x
  void apply(double t, const Eigen::VectorXcd& x, Eigen::VectorXcd& y) const;
  // Entry values of H(t), reusable across several products at the same t.
  void values_at(double t, std::vector<cplx>& out) const;
  void apply_values(const std::vector<cplx>& vals, const Eigen::VectorXcd& x,
                    Eigen::VectorXcd& y) const;
  // Row-sum bound on ||H(t)|| valid for every t.
  double norm_bound() const { return norm_bound_; }
  Eigen::MatrixXcd dense(double t) const;
  std::size_t nonzeros() const { return entries_.size(); }

 private:
  struct Entry {
    int row;
    int col;
    cplx value;
    std::uint8_t component;  // 0 static, 1 B_str, 2 B_str^dag, 3 B_com, 4 B_com^dag
  };
  FockDims dims_;
  double delta_str_;
  double delta_com_;
  std::vector<Entry> entries_;  // sorted by row
  std::vector<int> row_start_;
  double norm_bound_ = 0.0;
};

// Dense H(t) for the drive; ConsistencyError when the assembly is not
// Hermitian or dc disagrees with nm.
Eigen::MatrixXcd build_hamiltonian(const DriveConfig& dc, const NormalModes& nm, double t,
                                   FockDims dims);

// eta^2 * (n_max - 1) for the larger-eta mode; warn when this is not small.
double lamb_dicke_load(const DriveConfig& dc, FockDims dims);
inline constexpr double kLambDickeWarnLoad = 0.1;

// Events fire at absolute interaction-picture times.
struct EvolveEvent {
  double time = 0.0;
  std::function<void(double, QuantumState&)> action;
};

struct EvolveOptions {
  double max_phase_step = 0.05;  // ||H|| dt bound
  double dt_max = 0.0;           // 0 = only the phase bound
  double leakage_threshold = 1e-6;
  bool check_leakage = true;
  std::vector<EvolveEvent> events;
};

struct EvolveStats {
  long steps = 0;
  double top_str = 0.0;
  double top_com = 0.0;
};

// Midpoint-rule stepping of the Schrodinger equation through the schedule,
// starting at t0 (interaction-picture time of the first segment start).
QuantumState evolve(const QuantumState& state, const DriveConfig& dc, const Schedule& schedule,
                    const EvolveOptions& options = {}, EvolveStats* stats = nullptr,
                    double t0 = 0.0);

// Local raising operator a_ion^dag at interaction-picture time t,
// expressed in the normal modes.
void apply_local_raise(QuantumState& psi, const DriveConfig& dc, int ion, double t);

// Entropy of the reduced spin state of a pure spin-motion state.
double spin_motion_entropy(const QuantumState& psi);

}  // namespace ioncoupler
