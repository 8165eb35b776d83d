#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "mqw/walk.hpp"

using namespace mqw;

namespace {

SpinorField1D random_field(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  SpinorField1D f(n);
  for (auto& a : f.flat()) a = {g(rng), g(rng)};
  f *= 1.0 / std::sqrt(f.norm2());
  return f;
}

SpinorField2D random_field(std::size_t nq, std::size_t nr, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  SpinorField2D f(nq, nr);
  for (auto& a : f.flat()) a = {g(rng), g(rng)};
  return f;
}

// One step built as a product of elementary operators: shift along q, coin
// theta+, shift along r, magnetic phases, coin theta-.
SpinorField2D operator_sequence_step(const SpinorField2D& in, const PhysParams& params) {
  const auto coin = coin_angles(params);
  const std::size_t nq = in.n_q(), nr = in.n_r();
  const cplx i{0.0, 1.0};

  SpinorField2D a(nq, nr);  // after the q shift: L from q+1, R from q-1
  for (std::size_t q = 0; q < nq; ++q)
    for (std::size_t r = 0; r < nr; ++r) {
      a.L(q, r) = in.L((q + 1) % nq, r);
      a.R(q, r) = in.R((q + nq - 1) % nq, r);
    }
  SpinorField2D b(nq, nr);  // coin theta+
  for (std::size_t q = 0; q < nq; ++q)
    for (std::size_t r = 0; r < nr; ++r) {
      b.L(q, r) = std::cos(coin.theta_plus) * a.L(q, r) + i * std::sin(coin.theta_plus) * a.R(q, r);
      b.R(q, r) = i * std::sin(coin.theta_plus) * a.L(q, r) + std::cos(coin.theta_plus) * a.R(q, r);
    }
  SpinorField2D c(nq, nr);  // r shift: upper component from r+1, lower from r-1
  for (std::size_t q = 0; q < nq; ++q)
    for (std::size_t r = 0; r < nr; ++r) {
      c.L(q, r) = b.L(q, (r + 1) % nr);
      c.R(q, r) = b.R(q, (r + nr - 1) % nr);
    }
  SpinorField2D d(nq, nr);  // phases exp(+-2 i alpha_q), then coin theta-
  for (std::size_t q = 0; q < nq; ++q) {
    const double alpha = params.epsilon() * params.epsilon() * params.eB() * q / (2.0 * params.hbar());
    const cplx up = std::polar(1.0, 2.0 * alpha), down = std::polar(1.0, -2.0 * alpha);
    for (std::size_t r = 0; r < nr; ++r) {
      const cplx u = up * c.L(q, r), w = down * c.R(q, r);
      d.L(q, r) = std::cos(coin.theta_minus) * u + i * std::sin(coin.theta_minus) * w;
      d.R(q, r) = i * std::sin(coin.theta_minus) * u + std::cos(coin.theta_minus) * w;
    }
  }
  return d;
}

double max_diff(std::span<const cplx> a, std::span<const cplx> b) {
  double worst = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) worst = std::max(worst, std::abs(a[k] - b[k]));
  return worst;
}

}  // namespace

TEST_CASE("2D step equals the shift-coin-shift-phase-coin product") {
  std::mt19937_64 rng(11);
  for (int n : {1, 3, 4, 7}) {
    for (double mass : {0.0, 0.35}) {
      const auto params = rational_flux(n, 1.0, mass);
      const auto psi = random_field(static_cast<std::size_t>(2 * n), 5, rng);
      const auto lib = step_2d(psi, params);
      const auto ref = operator_sequence_step(psi, params);
      CHECK(max_diff(lib.flat(), ref.flat()) < 1e-14);
    }
  }
  const auto over = rational_flux(5, 1.0, 0.0, 1.0, CoinAngles{0.3, -1.1});
  const auto psi = random_field(5, 4, rng);
  CHECK(max_diff(step_2d(psi, over).flat(), operator_sequence_step(psi, over).flat()) < 1e-14);
}

TEST_CASE("step weights are the product of the two coins around the phases") {
  const CoinAngles coin{0.4, -0.9};
  const double phi = 0.77;
  const auto w = step_weights(phi, coin);
  const cplx i{0.0, 1.0};
  const double cp = std::cos(0.4), sp = std::sin(0.4), cm = std::cos(-0.9), sm = std::sin(-0.9);
  const cplx e = std::polar(1.0, 2 * phi), f = std::polar(1.0, -2 * phi);
  CHECK(std::abs(w.ll() - (cm * e * cp + i * sm * f * i * sp)) < 1e-15);
  CHECK(std::abs(w.lr() - (cm * e * i * sp + i * sm * f * cp)) < 1e-15);
  CHECK(std::abs(w.rl() - (i * sm * e * cp + cm * f * i * sp)) < 1e-15);
  CHECK(std::abs(w.rr() - (i * sm * e * i * sp + cm * f * cp)) < 1e-15);
}

TEST_CASE("massless reduced step is a real rotation up to a sign on R") {
  // With theta+- = +-pi/4 the reduced update reads
  // L' = cos(2 beta) L_{q+1} - sin(2 beta) R_{q-1}, R' = sin(2 beta) L_{q+1} + cos(2 beta) R_{q-1}.
  const CoinAngles coin{kPi / 4, -kPi / 4};
  for (double beta : {0.0, 0.3, -1.2, 2.5}) {
    const auto w = step_weights(beta, coin);
    CHECK(std::abs(w.ll() - std::cos(2 * beta)) < 1e-15);
    CHECK(std::abs(w.lr() + std::sin(2 * beta)) < 1e-15);
    CHECK(std::abs(w.rl() - std::sin(2 * beta)) < 1e-15);
    CHECK(std::abs(w.rr() - std::cos(2 * beta)) < 1e-15);
  }
}

TEST_CASE("evolution preserves the norm over 1000 steps") {
  std::mt19937_64 rng(3);
  const auto params = rational_flux(5, 1.0, 0.2);
  const auto mom = Momentum::reduced(1.234, params);
  const auto r1 = evolve(random_field(5, rng), mom, WalkEvolution{params, 1000, true});
  REQUIRE(r1.norms.size() == 1001);
  for (double n : r1.norms) CHECK(std::abs(n - 1.0) < 1e-11);

  auto psi = random_field(10, 8, rng);
  const double n0 = std::sqrt(psi.norm2());
  const auto r2 = evolve(psi, WalkEvolution{params, 1000, true});
  for (double n : r2.norms) CHECK(std::abs(n / n0 - 1.0) < 1e-11);
}

TEST_CASE("plane-wave lift commutes with the reduction") {
  std::mt19937_64 rng(5);
  const auto params = rational_flux(3, 1.0, 0.1);
  const std::size_t ring = 8;
  for (int k : {0, 1, 3, 5, 7}) {
    const auto mom = Momentum::reduced(kTwoPi * k / ring, params);
    CHECK(fourier_reduction_check(random_field(3, rng), mom, params, 50, ring) < 1e-10);
  }
  const auto bad = Momentum::reduced(0.1, params);
  CHECK_THROWS_AS(fourier_reduction_check(random_field(3, rng), bad, params, 5, ring), Error);
}

TEST_CASE("fields whose size breaks the flux period are rejected") {
  const auto params = rational_flux(3);
  CHECK_THROWS_AS(step_1d(SpinorField1D(4), Momentum::reduced(0.0, params), params), Error);
  CHECK_THROWS_AS(step_2d(SpinorField2D(4, 2), params), Error);
  CHECK_NOTHROW(step_1d(SpinorField1D(6), Momentum::reduced(0.0, params), params));
}
