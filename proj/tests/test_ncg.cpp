#include <catch_amalgamated.hpp>

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "mqw/io.hpp"
#include "mqw/ncg.hpp"
#include "oracle/oracle.hpp"

using namespace mqw;

namespace {

struct FixtureRow {
  double p_bar, theta_s, avg_q;
};

std::vector<FixtureRow> load_fixture() {
  std::ifstream in(std::string(MQW_FIXTURE_DIR) + "/example1_m256.csv");
  REQUIRE(in);
  std::string line;
  std::getline(in, line);
  std::vector<FixtureRow> rows;
  while (std::getline(in, line)) {
    FixtureRow r{};
    char c;
    std::istringstream ls(line);
    ls >> r.p_bar >> c >> r.theta_s >> c >> r.avg_q;
    rows.push_back(r);
  }
  return rows;
}

const NcgCurve& example1_curve() {
  static const NcgCurve curve = ncg_sweep(rational_flux(3), 256);
  return curve;
}

}  // namespace

TEST_CASE("N = 3 massless sweep matches the root-and-inverse-iteration fixture") {
  const auto rows = load_fixture();
  const auto& curve = example1_curve();
  REQUIRE(rows.size() == 256);
  for (std::size_t k = 0; k < rows.size(); ++k) {
    INFO("row " << k << " theta_s " << curve.samples[k].theta_s << " multiplicity " << curve.samples[k].multiplicity);
    CHECK(curve.samples[k].p_bar == rows[k].p_bar);
    CHECK(std::abs(curve.samples[k].theta_s - rows[k].theta_s) < 1e-8);
    CHECK(std::abs(curve.samples[k].avg_q - rows[k].avg_q) < 1e-8);
  }
}

TEST_CASE("fixture points can be regenerated on the fly") {
  const auto rows = load_fixture();
  for (std::size_t k : {0u, 17u, 85u, 86u, 200u}) {
    const auto pt = oracle::example1_point(rows[k].p_bar);
    CHECK(std::abs(pt.theta_s - rows[k].theta_s) < 1e-12);
    CHECK(std::abs(pt.avg_q - rows[k].avg_q) < 1e-12);
  }
}

TEST_CASE("average position is 2 pi periodic, nonconstant and only locally invertible") {
  const auto& curve = example1_curve();
  CHECK(periodicity_mismatch(curve) <= 1e-9);
  double lo = 1e9, hi = -1e9;
  for (const auto& s : curve.samples) {
    lo = std::min(lo, s.avg_q);
    hi = std::max(hi, s.avg_q);
  }
  CHECK(hi - lo > 1e-3);
  int changes = 0;
  for (std::size_t k = 0; k < curve.grid(); ++k) {
    const double a = curve.samples[k].d_avg_q, b = curve.samples[(k + 1) % curve.grid()].d_avg_q;
    if (a * b < 0) ++changes;
  }
  CHECK(changes >= 2);
  const auto segs = invertibility_segments(curve);
  CHECK(segs.segments.size() >= 2);
  CHECK_FALSE(segs.globally_invertible);
}

TEST_CASE("local commutator tables interpolate A' over <q>") {
  const auto& curve = example1_curve();
  const auto segs = invertibility_segments(curve);
  const auto tables = local_commutator_tables(curve, segs);
  REQUIRE(tables.size() == segs.segments.size());
  for (std::size_t i = 0; i < tables.size(); ++i) {
    const auto& seg = segs.segments[i];
    const auto& s = curve.samples[(seg.first + seg.count / 2) % curve.grid()];
    CHECK(tables[i](s.avg_q) == Catch::Approx(s.d_avg_q).epsilon(1e-9));
    for (const auto& [q, b] : tables[i].table) CHECK(b * seg.sign > 0);
  }
}

TEST_CASE("sweep output does not depend on the thread count") {
  const auto params = rational_flux(4, 1.0, 0.2);
  const auto one = ncg_sweep(params, 64, 1);
  const auto four = ncg_sweep(params, 64, 4);
  CHECK(io::sweep_csv(one) == io::sweep_csv(four));
  CHECK_THROWS_AS(ncg_sweep(params, 8), Error);
}

TEST_CASE("fully degenerate walk has two N-fold levels and flat densities") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> pb(0.0, kTwoPi);
  for (int n = 3; n <= 12; ++n) {
    const auto params = example2_params(n);
    std::vector<double> ref_phases, ref_density;
    for (int t = 0; t < 5; ++t) {
      const double p = pb(rng);
      const auto es = eigendecompose(build_step_unitary(params, Momentum::reduced(p, params)));
      CHECK(distinct_count(es) == 2);
      const auto labels = cluster_labels(es);
      CHECK(std::count(labels.begin(), labels.end(), 0) == n);
      // the two levels sit at pi/N +- pi/2
      std::vector<double> expect{principal_angle(kPi / n + kPi / 2), principal_angle(kPi / n - kPi / 2)};
      CHECK(spectrum_distance(es.phases, expect) < 1e-10);
      const auto s = smallest_positive_phase(es);
      if (t == 0) {
        ref_phases = es.phases;
        ref_density = s.density;
      } else {
        CHECK(spectrum_distance(es.phases, ref_phases) < 1e-10);
        for (std::size_t q = 0; q < s.density.size(); ++q) CHECK(std::abs(s.density[q] - ref_density[q]) < 1e-10);
      }
    }
    const auto curve = ncg_sweep(params, 16);
    for (const auto& s : curve.samples) {
      CHECK(std::abs(s.d_avg_q) < 1e-10);
      CHECK(s.avg_q == Catch::Approx((n - 1) / 2.0).epsilon(1e-10));
    }
    CHECK_THROWS_AS(invertibility_segments(curve), Error);
  }
}

TEST_CASE("pair-localised vectors of the degenerate walk") {
  for (int n : {3, 5, 8}) {
    for (double p : {0.0, 1.3, 4.0}) {
      const auto invariant = example2_analytic(n, p, Example2Convention::Invariant);
      CHECK(invariant.vectors.size() == static_cast<std::size_t>(2 * n));
      CHECK(invariant.max_residual < 1e-12);
      CHECK(invariant.max_offdiag_overlap < 1e-12);
      // the variant with the extra factor i is orthonormal but not invariant
      const auto with_i = example2_analytic(n, p, Example2Convention::WithFactorI);
      CHECK(with_i.max_offdiag_overlap < 1e-12);
      CHECK(with_i.max_residual > 0.5);
    }
  }
}

TEST_CASE("position acts as i d/dp_bar on band-limited sequences") {
  std::mt19937_64 rng(41);
  std::normal_distribution<double> g;
  std::uniform_int_distribution<int> deg(0, 16);
  for (int t = 0; t < 20; ++t) {
    const int k = deg(rng);
    std::vector<cplx> c(static_cast<std::size_t>(2 * k + 1));
    for (auto& x : c) x = {g(rng), g(rng)};
    CHECK(fourier_position_identity(c) <= 1e-12);
  }
  const std::vector<cplx> even(4);
  CHECK_THROWS_AS(fourier_position_identity(even), Error);
}

TEST_CASE("sweep CSV round-trips") {
  const auto curve = ncg_sweep(rational_flux(2, 1.0, 0.5), 16, 1);
  const auto rows = io::parse_sweep_csv(io::sweep_csv(curve));
  REQUIRE(rows.size() == 16);
  for (std::size_t k = 0; k < rows.size(); ++k) {
    CHECK(rows[k].p_bar == curve.samples[k].p_bar);
    CHECK(rows[k].theta_s == curve.samples[k].theta_s);
    CHECK(rows[k].avg_q == curve.samples[k].avg_q);
    CHECK(rows[k].d_avg_q == curve.samples[k].d_avg_q);
  }
}
