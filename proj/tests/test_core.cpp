#include <catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "mqw/core.hpp"

using namespace mqw;
using Catch::Approx;

TEST_CASE("angles wrap into their canonical ranges") {
  CHECK(wrap_two_pi(0.0) == 0.0);
  CHECK(wrap_two_pi(kTwoPi) == Approx(0.0).margin(1e-15));
  CHECK(wrap_two_pi(-0.5) == Approx(kTwoPi - 0.5));
  CHECK(wrap_two_pi(7.0 * kPi) == Approx(kPi));
  CHECK(principal_angle(kPi) == Approx(kPi));
  CHECK(principal_angle(-kPi) == Approx(kPi));
  CHECK(principal_angle(1.5 * kPi) == Approx(-0.5 * kPi));
}

TEST_CASE("validation rejects non-physical parameters") {
  ParamRecord raw;
  raw.epsilon = 0.0;
  CHECK_THROWS_MATCHES(validate_params(raw), Error,
                       Catch::Matchers::Predicate<Error>(
                           [](const Error& e) { return e.kind() == ErrorKind::NonPositiveEpsilon; }));
  raw.epsilon = 1.0;
  raw.hbar = -1.0;
  try {
    validate_params(raw);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NonPositiveHbar);
  }
  raw.hbar = 1.0;
  raw.eB = 1.0;
  raw.flux_denominator = 3;
  try {
    validate_params(raw);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::FluxMismatch);
  }
  raw.eB = kTwoPi / 3.0;
  CHECK_NOTHROW(validate_params(raw));
  CHECK_THROWS_AS(rational_flux(0), Error);
}

TEST_CASE("rational flux puts 2 pi / N on each plaquette") {
  for (int n : {1, 3, 7, 64}) {
    for (double eps : {1.0, 0.3}) {
      const auto p = rational_flux(n, eps, 0.0, 2.0);
      CHECK(p.flux_phase() == Approx(kTwoPi / n).epsilon(1e-14));
      CHECK(*p.flux_denominator() == n);
      // alpha_q advances by pi / N per site
      CHECK(alpha_phase(1, p) - alpha_phase(0, p) == Approx(kPi / n).epsilon(1e-14));
    }
  }
}

TEST_CASE("coin angles follow the mass and reduce to +-pi/4 when massless") {
  const auto c0 = coin_angles_for_mass(1.0, 0.0, 1.0);
  CHECK(c0.theta_plus == Approx(kPi / 4));
  CHECK(c0.theta_minus == Approx(-kPi / 4));
  const auto c1 = coin_angles_for_mass(0.5, 0.4, 2.0);
  CHECK(c1.theta_plus == Approx(kPi / 4 - 0.05));
  CHECK(c1.theta_minus == Approx(-kPi / 4 - 0.05));
  const auto over = rational_flux(5, 1.0, 0.7, 1.0, CoinAngles{0.1, 0.2});
  CHECK(coin_angles(over).theta_plus == 0.1);
  CHECK(coin_angles(over).theta_minus == 0.2);
}

TEST_CASE("momentum keeps the raw value and a reduced representative") {
  const auto params = rational_flux(4, 0.5);
  const auto m = Momentum::physical(30.0, params);
  CHECK(m.p_bar_raw == Approx(0.25 * 30.0));
  CHECK(m.p_bar == Approx(wrap_two_pi(7.5)));
  const auto r = Momentum::reduced(-1.0, params);
  CHECK(r.p_bar_raw == -1.0);
  CHECK(r.p_bar == Approx(kTwoPi - 1.0));
  CHECK(r.p == Approx(-4.0));
}

TEST_CASE("beta written through positions agrees with the phase form") {
  const auto params = rational_flux(6, 0.7, 0.3, 1.3);
  for (double p : {-2.0, 0.0, 0.4, 11.0}) {
    const auto mom = Momentum::physical(p, params);
    for (long q = -3; q < 9; ++q)
      CHECK(beta_phase_from_positions(q, mom, params) ==
            Approx(beta_phase(q, mom, params)).margin(1e-12));
  }
  CHECK(center_position(Momentum::physical(2.0, params), params) ==
        Approx(0.7 * 2.0 / params.eB()));
}

TEST_CASE("density and average position") {
  SpinorField1D f(3);
  f.L(0) = {1.0, 0.0};
  f.R(2) = {0.0, 1.0};
  f.L(2) = {1.0, 1.0};
  CHECK(f.norm2() == Approx(4.0));
  const auto rho = density(f);
  REQUIRE(rho.size() == 3);
  CHECK(rho[0] == Approx(0.25));
  CHECK(rho[1] == 0.0);
  CHECK(rho[2] == Approx(0.75));
  CHECK(average_position(f) == Approx(1.5));

  SpinorField1D zero(4);
  CHECK_THROWS_AS(density(zero), Error);

  const std::vector<cplx> flat{1.0, 2.0, 3.0, 4.0};
  const auto g = SpinorField1D::from_flat(flat);
  CHECK(g.n_sites() == 2);
  CHECK(g.R(1) == cplx{4.0});
}

TEST_CASE("two-dimensional storage is row-major in q") {
  SpinorField2D f(2, 3);
  f.L(1, 2) = 5.0;
  f.R(0, 1) = 2.0;
  CHECK(f.flat()[2 * (1 * 3 + 2)] == cplx{5.0});
  CHECK(f.flat()[2 * (0 * 3 + 1) + 1] == cplx{2.0});
  CHECK(f.norm2() == Approx(29.0));
}

TEST_CASE("error kinds split into configuration and numerical failures") {
  CHECK(is_config_error(ErrorKind::FluxMismatch));
  CHECK(is_config_error(ErrorKind::UnresolvedGrid));
  CHECK_FALSE(is_config_error(ErrorKind::ConvergenceFailure));
  CHECK_FALSE(is_config_error(ErrorKind::NoPositivePhase));
  CHECK_FALSE(is_config_error(ErrorKind::DegenerateCurve));
  CHECK(to_string(ErrorKind::ZeroNorm) != std::string());
}
