#include <doctest.h>

#include <cmath>

#include "ioncoupler/errors.hpp"
#include "ioncoupler/wells.hpp"
#include "oracles/modes_oracle.hpp"

using namespace ioncoupler;

namespace {

double be_mass() { return beryllium9_ion_mass_u() * kCodata2018.atomic_mass_unit; }

WellPair be_pair(double fl, double fr, double d0) {
  return {be_mass(), be_mass(), kCodata2018.elementary_charge, hz_to_angular(fl), hz_to_angular(fr), d0};
}

}  // namespace

TEST_CASE("exchange rate at 30 um gives a 69 us exchange time") {
  const NormalModes nm = normal_modes(be_pair(4e6, 4e6, 30e-6));
  CHECK(nm.exchange_time() * 1e6 == doctest::Approx(69.137548278574500).epsilon(1e-12));
  CHECK(nm.exchange_time() * 1e6 > 68.0);
  CHECK(nm.exchange_time() * 1e6 < 72.0);
}

TEST_CASE("exchange rate at 27 um matches the long-double evaluation") {
  // frozen from a 40-digit evaluation with the same constants
  const double golden = 31165.806790196532495;
  const WellPair wp = be_pair(4e6, 4e6, 27e-6);
  CHECK(exchange_rate(wp) == doctest::Approx(golden).epsilon(1e-13));
  const long double o = oracle::exchange_rate(kCodata2018.elementary_charge, kCodata2018.epsilon0, be_mass(),
                                              wp.omega_l, wp.omega_r, wp.d0);
  CHECK(exchange_rate(wp) == doctest::Approx(static_cast<double>(o)).epsilon(1e-13));
  CHECK(angular_to_hz(2.0 * exchange_rate(wp)) == doctest::Approx(9920.384).epsilon(1e-6));
}

TEST_CASE("exchange rate scaling") {
  const WellPair a = be_pair(4e6, 4e6, 30e-6);
  WellPair b = a;
  b.d0 *= 2.0;
  CHECK(exchange_rate(a) / exchange_rate(b) == doctest::Approx(8.0).epsilon(1e-14));
  WellPair c = a;
  c.omega_l *= 1.21;
  CHECK(exchange_rate(a) / exchange_rate(c) == doctest::Approx(1.1).epsilon(1e-14));
}

TEST_CASE("well validation") {
  WellPair wp = be_pair(4e6, 4e6, 30e-6);
  wp.d0 = 0.0;
  CHECK_THROWS_AS(exchange_rate(wp), ParameterError);
  wp = be_pair(4e6, 4e6, 30e-6);
  wp.omega_r = -1.0;
  CHECK_THROWS_AS(normal_modes(wp), ParameterError);
  wp = be_pair(2e6, 4.5e6, 30e-6);
  CHECK_THROWS_AS(validate(wp), ParameterError);
  CHECK_NOTHROW(validate(wp, 3.0));
  wp = be_pair(4e6, 4e6, 30e-6);
  wp.mass_l = std::nan("");
  CHECK_THROWS_AS(validate(wp), ParameterError);
}

TEST_CASE("resonant wells give symmetric and antisymmetric modes") {
  const NormalModes nm = normal_modes(hz_to_angular(4e6), hz_to_angular(4e6), hz_to_angular(5e3));
  const double s = 1.0 / std::sqrt(2.0);
  CHECK(nm.q_com[0] == doctest::Approx(s));
  CHECK(nm.q_com[1] == doctest::Approx(s));
  CHECK(nm.q_str[0] == doctest::Approx(-s));
  CHECK(nm.q_str[1] == doctest::Approx(s));
  CHECK(nm.omega_str - nm.omega_bar == doctest::Approx(hz_to_angular(5e3)));
  CHECK(nm.omega_bar - nm.omega_com == doctest::Approx(hz_to_angular(5e3)));
}

TEST_CASE("detuning equal to the exchange rate") {
  const double w = hz_to_angular(4e6), ex = hz_to_angular(5e3);
  const NormalModes nm = normal_modes(w - ex, w + ex, ex);
  CHECK(nm.splitting() == doctest::Approx(2.0 * std::sqrt(2.0) * ex).epsilon(1e-12));
  CHECK(nm.theta_str == doctest::Approx(std::atan(1.0 - std::sqrt(2.0))).epsilon(1e-14));
  CHECK(nm.theta_str * 180.0 / kPi == doctest::Approx(-22.5).epsilon(1e-12));
  CHECK(nm.q_str[0] == doctest::Approx(-0.38268343236509).epsilon(1e-12));
  CHECK(nm.q_str[1] == doctest::Approx(0.92387953251129).epsilon(1e-12));
}

TEST_CASE("decoupled limit") {
  const double wl = hz_to_angular(3.9e6), wr = hz_to_angular(4.1e6);
  const NormalModes nm = normal_modes(wl, wr, 1e-3);
  CHECK(nm.q_str[0] == doctest::Approx(0.0).epsilon(1e-8));
  CHECK(nm.q_str[1] == doctest::Approx(1.0));
  CHECK(nm.q_com[0] == doctest::Approx(1.0));
  CHECK(nm.omega_str == doctest::Approx(wr).epsilon(1e-15));
  CHECK(nm.omega_com == doctest::Approx(wl).epsilon(1e-15));
}

TEST_CASE("normal modes agree with the Jacobi oracle") {
  for (double d_over : {-3.0, -1.0, -0.2, 0.0, 0.05, 0.7, 2.5, 10.0}) {
    const double w = hz_to_angular(4e6), ex = hz_to_angular(6.5e3);
    const double wl = w - d_over * ex, wr = w + d_over * ex;
    const NormalModes nm = normal_modes(wl, wr, ex);
    const oracle::Modes o = oracle::diagonalise(wl, wr, ex);
    CAPTURE(d_over);
    CHECK(std::abs(nm.omega_str - double(o.w_str)) <= 1e-10 * nm.omega_str);
    CHECK(std::abs(nm.omega_com - double(o.w_com)) <= 1e-10 * nm.omega_com);
    for (int k = 0; k < 2; ++k) {
      CHECK(nm.q_str[k] == doctest::Approx(double(o.q_str[k])).epsilon(1e-10).scale(1.0));
      CHECK(nm.q_com[k] == doctest::Approx(double(o.q_com[k])).epsilon(1e-10).scale(1.0));
    }
    CHECK(nm.q_str[1] > 0.0);
    CHECK(nm.q_com[1] > 0.0);
  }
}

TEST_CASE("first-order eigenvectors") {
  const double w = hz_to_angular(4e6), ex = hz_to_angular(6.5e3);
  for (auto [ratio, tol] : {std::pair{0.1, 1.2e-2}, std::pair{0.01, 1.2e-4}}) {
    const NormalModes nm = normal_modes(w - ratio * ex, w + ratio * ex, ex);
    const auto [qs, qc] = eigenvector_approx(nm);
    double worst = 0.0;
    for (int k = 0; k < 2; ++k) {
      worst = std::max({worst, std::abs(qs[k] - nm.q_str[k]), std::abs(qc[k] - nm.q_com[k])});
    }
    CAPTURE(ratio);
    CHECK(worst < tol);
    CHECK(worst > 0.05 * tol);
  }
  const NormalModes zero = normal_modes(w, w, ex);
  const auto [qs, qc] = eigenvector_approx(zero);
  CHECK(qs[0] == doctest::Approx(-1.0 / std::sqrt(2.0)));
  CHECK(qc[1] == doctest::Approx(1.0 / std::sqrt(2.0)));
  CHECK_THROWS_AS(eigenvector_approx(normal_modes(w - 1.01 * ex, w + 1.01 * ex, ex)), DomainError);
}

TEST_CASE("spacing solver inverts the exchange rate") {
  const double m = be_mass(), q = kCodata2018.elementary_charge, w = hz_to_angular(4e6);
  const double d0 = spacing_for_exchange_rate(m, m, q, w, w, hz_to_angular(6.5e3));
  WellPair wp{m, m, q, w, w, d0};
  CHECK(exchange_rate(wp) == doctest::Approx(hz_to_angular(6.5e3)).epsilon(1e-13));
  CHECK(d0 * 1e6 == doctest::Approx(24.6732).epsilon(1e-5));
}

TEST_CASE("Lamb-Dicke parameter") {
  const double k = raman_wavevector(313e-9);
  CHECK(k == doctest::Approx(2.0 * std::sqrt(2.0) * kPi / 313e-9));
  const double eta = lamb_dicke(k, be_mass(), hz_to_angular(4e6));
  const double expect = k * std::sqrt(kCodata2018.hbar / (2.0 * be_mass() * hz_to_angular(4e6)));
  CHECK(eta == doctest::Approx(expect).epsilon(1e-14));
  CHECK(eta == doctest::Approx(0.336).epsilon(2e-3));
}
