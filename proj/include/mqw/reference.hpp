#pragma once

// Independent oracles for the Landau problem: classical orbits and first
// integrals, spinless quantum Landau levels and <x>(p), and a
// finite-difference reduced Dirac operator used to measure how fast the walk
// approaches its continuum limit.

#include <complex>
#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "mqw/core.hpp"
#include "mqw/spectral.hpp"

namespace mqw {

// ---------------------------------------------------------------- classical

struct ClassicalState {
  double x = 0.0, y = 0.0;
  double px = 0.0, py = 0.0;  // longitudinal gauge: px = m xdot, py = m ydot + eB x
};

struct ClassicalSolution {
  cplx V0;
  cplx Xc;
  double omega = 0.0;
  double R = 0.0;  // |V0| / omega
};

struct ClassicalPoint {
  cplx X;
  cplx V;
};

/// Circular orbit through X0 with initial complex velocity V0:
/// V(t) = V0 e^{-i w t}, X(t) = Xc + i (V0 / w) e^{-i w t}, Xc = X0 - i V0 / w.
inline ClassicalSolution classical_solution(cplx V0, cplx X0, double omega) {
  if (omega == 0.0) throw Error(ErrorKind::ZeroOmega, "omega = eB/m must be nonzero");
  return {V0, X0 - kI * V0 / omega, omega, std::abs(V0) / std::abs(omega)};
}

inline ClassicalPoint classical_analytic(cplx V0, cplx X0, double omega, double t) {
  const auto sol = classical_solution(V0, X0, omega);
  const cplx rot = std::polar(1.0, -omega * t);
  return {sol.Xc + kI * (V0 / omega) * rot, V0 * rot};
}

/// Time average of X(t) over one period, trapezoid rule (exact for the
/// single harmonic once samples >= 2).
inline cplx classical_time_average(cplx V0, cplx X0, double omega, int samples = 64) {
  if (samples < 2) throw Error(ErrorKind::InvalidArgument, "need at least two samples");
  const double period = kTwoPi / std::abs(omega);
  cplx acc = 0.0;
  for (int k = 0; k < samples; ++k)
    acc += classical_analytic(V0, X0, omega, period * k / samples).X;
  return acc / static_cast<double>(samples);
}

/// Complex position and velocity of a phase-space point.
inline ClassicalPoint to_complex(const ClassicalState& s, double mass, double eB) {
  return {{s.x, s.y}, {s.px / mass, (s.py - eB * s.x) / mass}};
}

struct FirstIntegrals {
  double energy = 0.0;        // H = (px^2 + (py - eB x)^2) / 2m
  double py = 0.0;
  double px_minus_mwy = 0.0;  // px - m w y = -m w y_c on the motion
};

inline FirstIntegrals first_integrals(const ClassicalState& s, double mass, double eB) {
  const double ky = s.py - eB * s.x;
  return {(s.px * s.px + ky * ky) / (2.0 * mass), s.py, s.px - eB * s.y};
}

struct ClassicalRun {
  std::vector<double> times;
  std::vector<ClassicalState> states;
  FirstIntegrals drift;  // max |I(t) - I(0)| over the run
};

/// Classical RK4 on Hamilton's equations of
/// H = (px^2 + (py - eB x)^2) / 2m. RK4 preserves the linear integrals py and
/// px - m w y exactly up to roundoff; the energy drifts at O(dt^4).
inline ClassicalRun classical_integrate(const ClassicalState& state0, double mass, double eB,
                                        double dt, std::size_t steps) {
  if (!(dt > 0.0)) throw Error(ErrorKind::InvalidArgument, "dt must be positive");
  if (!(mass > 0.0)) throw Error(ErrorKind::InvalidArgument, "mass must be positive");
  using V4 = std::array<double, 4>;
  auto rhs = [&](const V4& z) -> V4 {
    const double ky = z[3] - eB * z[0];
    return {z[2] / mass, ky / mass, ky * eB / mass, 0.0};
  };
  auto axpy = [](const V4& z, double a, const V4& k) {
    return V4{z[0] + a * k[0], z[1] + a * k[1], z[2] + a * k[2], z[3] + a * k[3]};
  };

  ClassicalRun run;
  run.times.reserve(steps + 1);
  run.states.reserve(steps + 1);
  V4 z{state0.x, state0.y, state0.px, state0.py};
  const auto i0 = first_integrals(state0, mass, eB);
  run.times.push_back(0.0);
  run.states.push_back(state0);
  for (std::size_t j = 1; j <= steps; ++j) {
    const V4 k1 = rhs(z);
    const V4 k2 = rhs(axpy(z, dt / 2, k1));
    const V4 k3 = rhs(axpy(z, dt / 2, k2));
    const V4 k4 = rhs(axpy(z, dt, k3));
    for (int c = 0; c < 4; ++c) z[c] += dt / 6.0 * (k1[c] + 2 * k2[c] + 2 * k3[c] + k4[c]);
    const ClassicalState s{z[0], z[1], z[2], z[3]};
    const auto ij = first_integrals(s, mass, eB);
    run.drift.energy = std::max(run.drift.energy, std::abs(ij.energy - i0.energy));
    run.drift.py = std::max(run.drift.py, std::abs(ij.py - i0.py));
    run.drift.px_minus_mwy = std::max(run.drift.px_minus_mwy, std::abs(ij.px_minus_mwy - i0.px_minus_mwy));
    run.times.push_back(dt * static_cast<double>(j));
    run.states.push_back(s);
  }
  return run;
}

struct ConstrainedLimitResult {
  double residual = 0.0;            // max |x(t) - x(0)| + |y(t) - y(0)|
  double projected_velocity = 0.0;  // |xdot(0)| removed to meet the constraint
  bool skipped = false;             // eB = 0: the reduced Lagrangian is not constrained
};

/// Euler-Lagrange dynamics of L~ = (m/2) xdot^2 + eB x ydot. Its y-equation
/// d/dt(eB x) = 0 is a velocity constraint, xdot = 0; differentiating it gives
/// xddot = 0 and the x-equation m xddot = eB ydot then fixes ydot. The
/// velocities are solved from that linear system at every RK4 stage.
inline ConstrainedLimitResult constrained_limit_check(const ClassicalState& state0, double mass,
                                                      double eB, double t_final = 10.0,
                                                      double dt = 1e-2) {
  ConstrainedLimitResult res;
  if (eB == 0.0) {
    res.skipped = true;
    return res;
  }
  if (!(mass > 0.0)) throw Error(ErrorKind::InvalidArgument, "mass must be positive");

  // unknowns (xdot, ydot, xddot): eB xdot = 0, eB xddot = 0, m xddot - eB ydot = 0
  Eigen::Matrix3d a;
  a << eB, 0.0, 0.0,  //
      0.0, 0.0, eB,   //
      0.0, -eB, mass;
  const Eigen::PartialPivLU<Eigen::Matrix3d> lu(a);
  auto velocity = [&](double /*x*/, double /*y*/) {
    const Eigen::Vector3d v = lu.solve(Eigen::Vector3d::Zero());
    return std::array<double, 2>{v(0), v(1)};
  };

  res.projected_velocity = std::abs(state0.px / mass);
  double x = state0.x, y = state0.y;
  const auto steps = static_cast<std::size_t>(std::ceil(t_final / dt));
  for (std::size_t j = 0; j < steps; ++j) {
    const auto k1 = velocity(x, y);
    const auto k2 = velocity(x + dt / 2 * k1[0], y + dt / 2 * k1[1]);
    const auto k3 = velocity(x + dt / 2 * k2[0], y + dt / 2 * k2[1]);
    const auto k4 = velocity(x + dt * k3[0], y + dt * k3[1]);
    x += dt / 6.0 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0]);
    y += dt / 6.0 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1]);
    res.residual = std::max(res.residual, std::abs(x - state0.x) + std::abs(y - state0.y));
  }
  return res;
}

// ------------------------------------------------------- quantum mechanics

/// (n + 1/2) hbar |eB| / m.
inline double qm_landau_level(int n, double mass, double eB, double hbar) {
  if (n < 0 || !(mass > 0.0) || eB == 0.0)
    throw Error(ErrorKind::InvalidArgument, "needs n >= 0, m > 0, eB != 0");
  return (n + 0.5) * hbar * std::abs(eB) / mass;
}

/// Normalised Hermite function psi_n(xi), upward recurrence on the normalised
/// functions (no factorials, no overflow for moderate n).
inline double hermite_function(int n, double xi) {
  double prev = 0.0;
  double cur = std::pow(kPi, -0.25) * std::exp(-0.5 * xi * xi);
  for (int k = 0; k < n; ++k) {
    const double next = std::sqrt(2.0 / (k + 1)) * xi * cur - std::sqrt(static_cast<double>(k) / (k + 1)) * prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

/// <x> in the n-th Landau eigenstate at y-momentum p, by trapezoid quadrature
/// of x |psi_n((x - x(p))/a)|^2 / a, x(p) = p / eB, a = sqrt(hbar / |eB|).
inline double qm_average_x(int n, double p, double mass, double eB, double hbar,
                           int quadrature_points = 4001) {
  if (n < 0 || n > 12) throw Error(ErrorKind::InvalidArgument, "level index must be in [0, 12]");
  if (!(mass > 0.0) || eB == 0.0) throw Error(ErrorKind::InvalidArgument, "needs m > 0, eB != 0");
  if (quadrature_points < 101) throw Error(ErrorKind::InvalidArgument, "too few quadrature points");
  const double a = std::sqrt(hbar / std::abs(eB));
  const double center = p / eB;
  const double half = (std::sqrt(2.0 * n + 1.0) + 12.0);  // in units of a
  const double h = 2.0 * half / (quadrature_points - 1);
  double mass_sum = 0.0, moment = 0.0;
  for (int j = 0; j < quadrature_points; ++j) {
    const double xi = -half + h * j;
    const double w = (j == 0 || j == quadrature_points - 1) ? 0.5 : 1.0;
    const double prob = hermite_function(n, xi);
    const double dens = w * prob * prob;
    mass_sum += dens;
    moment += dens * (center + a * xi);
  }
  return moment / mass_sum;
}

struct RegimeDiagnostic {
  double ratio = 0.0;              // hbar |eB| (n + 1/2)^2 / p^2
  double width_over_center = 0.0;  // (n + 1/2)^{1/2} a / |x(p)|
  bool in_regime = false;          // ratio << 1, read as ratio < kRegimeThreshold
};

inline constexpr double kRegimeThreshold = 1e-2;

inline RegimeDiagnostic ncg_regime_diagnostic(int n, double p, double eB, double hbar) {
  if (p == 0.0) throw Error(ErrorKind::ZeroMomentum, "diagnostic undefined at p = 0");
  if (eB == 0.0) throw Error(ErrorKind::InvalidArgument, "eB must be nonzero");
  RegimeDiagnostic d;
  d.ratio = hbar * std::abs(eB) * (n + 0.5) * (n + 0.5) / (p * p);
  const double a = std::sqrt(hbar / std::abs(eB));
  d.width_over_center = std::sqrt(n + 0.5) * a / std::abs(p / eB);
  d.in_regime = d.ratio < kRegimeThreshold;
  return d;
}

/// Lattice counterpart: a walk cannot be narrower than one site while p_bar
/// stays below 2 pi, so width / p_bar >= 1 / (2 pi) and the narrow-packet
/// regime is never reached.
inline RegimeDiagnostic lattice_regime_diagnostic(double p_bar, double width_sites = 1.0) {
  if (!(p_bar > 0.0)) throw Error(ErrorKind::ZeroMomentum, "p_bar must be positive");
  RegimeDiagnostic d;
  d.width_over_center = width_sites / p_bar;
  d.ratio = d.width_over_center * d.width_over_center;
  d.in_regime = d.ratio < kRegimeThreshold;
  return d;
}

// ----------------------------------------------------------- Dirac oracle

/// Uniform cell-centred grid on [center - L, center + L] with hard walls.
struct DiracGrid {
  double half_width = 0.0;
  int points = 0;
  double center = 0.0;  // x(p) = p / eB

  double spacing() const { return 2.0 * half_width / points; }
  double node(int j) const { return center - half_width + spacing() * (j + 0.5); }

  /// `lengths` oscillator lengths a = sqrt(hbar / |eB|) each side of x(p).
  static DiracGrid around_orbit(double eB, double p, double hbar, int points = 8192,
                                double lengths = 8.0) {
    if (eB == 0.0) throw Error(ErrorKind::InvalidArgument, "eB must be nonzero");
    return {lengths * std::sqrt(hbar / std::abs(eB)), points, p / eB};
  }
};

struct DiracSpectrum {
  std::vector<double> eigenvalues;  // k smallest positive, ascending
  std::vector<double> refined;      // same, on the grid with twice the points
  double self_convergence = 0.0;    // max_k |eigenvalues - refined|
};

namespace detail {

/// Positive eigenvalues of the centred-difference Hamiltonian
///   E phi^L =  i hbar phi^L' + (m - i eB xi) phi^R
///   E phi^R = -i hbar phi^R' + (m + i eB xi) phi^L,   xi = x - x(p),
/// obtained from the stationary reduced Dirac equation with phi ~ e^{-iEt/hbar}.
/// Centred differences carry a doubler whose spectrum is that of eB -> -eB,
/// so levels appear in both chiralities; the lowest positive level is exact.
inline std::vector<double> dirac_positive_levels(double mass, double eB, double hbar,
                                                 const DiracGrid& grid, std::size_t k) {
  const int p = grid.points;
  const lapack_int n = 2 * p;
  const lapack_int kd = 2;
  const lapack_int ldab = kd + 1;
  const double h = grid.spacing();
  std::vector<cplx> band(static_cast<std::size_t>(ldab * n), cplx{0.0, 0.0});
  auto at = [&](lapack_int i, lapack_int j) -> cplx& {  // upper band, i <= j
    return band[static_cast<std::size_t>(kd + i - j + j * ldab)];
  };
  const cplx hop = kI * hbar / (2.0 * h);
  for (int j = 0; j < p; ++j) {
    const double xi = grid.node(j) - grid.center;
    at(2 * j, 2 * j + 1) = cplx{mass, -eB * xi};
    if (j + 1 < p) {
      at(2 * j, 2 * j + 2) = hop;
      at(2 * j + 1, 2 * j + 3) = -hop;
    }
  }

  const double scale = std::max({1.0, mass, std::sqrt(hbar * std::abs(eB))});
  const double lower = 1e-8 * scale;
  double upper = std::sqrt(mass * mass + 2.0 * hbar * std::abs(eB) * (static_cast<double>(k) + 1.0)) + scale;
  const double abstol = 2.0 * LAPACKE_dlamch('S');
  for (int attempt = 0; attempt < 16; ++attempt, upper *= 2.0) {
    std::vector<cplx> ab = band;
    std::vector<double> w(static_cast<std::size_t>(n));
    std::vector<lapack_int> ifail(static_cast<std::size_t>(n));
    cplx q_dummy{}, z_dummy{};
    lapack_int found = 0;
    const lapack_int info =
        LAPACKE_zhbevx(LAPACK_COL_MAJOR, 'N', 'V', 'U', n, kd, ab.data(), ldab, &q_dummy, 1, lower,
                       upper, 0, 0, abstol, &found, w.data(), &z_dummy, 1, ifail.data());
    if (info != 0)
      throw Error(ErrorKind::ConvergenceFailure, "zhbevx failed with info " + std::to_string(info));
    if (static_cast<std::size_t>(found) >= k) {
      w.resize(static_cast<std::size_t>(found));
      std::sort(w.begin(), w.end());
      w.resize(k);
      return w;
    }
  }
  throw Error(ErrorKind::ConvergenceFailure, "could not bracket the requested levels");
}

}  // namespace detail

/// k lowest positive levels of the reduced Dirac operator, plus the change
/// observed when the number of grid points is doubled.
inline DiracSpectrum dirac_fd_spectrum(double mass, double eB, double hbar, const DiracGrid& grid,
                                       std::size_t k) {
  if (eB == 0.0) throw Error(ErrorKind::InvalidArgument, "eB must be nonzero");
  if (k == 0) throw Error(ErrorKind::InvalidArgument, "ask for at least one level");
  const double a = std::sqrt(hbar / std::abs(eB));
  if (grid.points < 64) throw Error(ErrorKind::UnresolvedGrid, "need at least 64 points");
  if (grid.spacing() > a / 8.0)
    throw Error(ErrorKind::UnresolvedGrid, "spacing exceeds a/8 (a = oscillator length)");
  if (grid.half_width < 8.0 * a - 1e-12)
    throw Error(ErrorKind::UnresolvedGrid, "domain must cover 8 oscillator lengths each side");

  DiracSpectrum s;
  s.eigenvalues = detail::dirac_positive_levels(mass, eB, hbar, grid, k);
  DiracGrid fine = grid;
  fine.points *= 2;
  s.refined = detail::dirac_positive_levels(mass, eB, hbar, fine, k);
  for (std::size_t i = 0; i < k; ++i)
    s.self_convergence = std::max(s.self_convergence, std::abs(s.eigenvalues[i] - s.refined[i]));
  return s;
}

// ------------------------------------------------------ continuum limit

struct ConvergenceFamily {
  double mass = 0.0;
  double eB = 1.0;
  double hbar = 1.0;
  double p = 0.0;
  std::vector<double> eps_list;
};

struct ConvergencePoint {
  double eps_requested = 0.0;
  double eps = 0.0;  // snapped so that eps^2 eB / hbar = 2 pi / n exactly
  int n = 0;
  double theta_s = 0.0;
  double scaled = 0.0;  // theta_s / eps
  double error = 0.0;   // |scaled - dirac_energy|
};

struct ConvergenceReport {
  std::vector<ConvergencePoint> points;
  double alpha = 0.0;  // least-squares slope of log(error) against log(eps)
  double dirac_energy = 0.0;
  double dirac_self_convergence = 0.0;
  DiracGrid grid;
};

/// eps values for the flux denominators `ns` at fixed eB.
inline std::vector<double> eps_for_denominators(const std::vector<int>& ns, double eB = 1.0,
                                                double hbar = 1.0) {
  std::vector<double> out;
  for (int n : ns) out.push_back(std::sqrt(kTwoPi * hbar / (n * eB)));
  return out;
}

inline constexpr int kMaxConvergenceDenominator = 1024;

inline ConvergenceReport continuum_convergence(const ConvergenceFamily& family,
                                               int dirac_points = 8192) {
  if (family.eps_list.size() < 3)
    throw Error(ErrorKind::InvalidArgument, "need at least 3 eps values for a fit");
  if (!(family.eB > 0.0) || !(family.hbar > 0.0))
    throw Error(ErrorKind::InvalidArgument, "needs eB > 0 and hbar > 0");

  ConvergenceReport report;
  report.grid = DiracGrid::around_orbit(family.eB, family.p, family.hbar, dirac_points);
  const auto dirac = dirac_fd_spectrum(family.mass, family.eB, family.hbar, report.grid, 1);
  report.dirac_energy = dirac.eigenvalues.front();
  report.dirac_self_convergence = dirac.self_convergence;

  std::vector<double> lx, ly;
  for (double eps_req : family.eps_list) {
    if (!(eps_req > 0.0)) throw Error(ErrorKind::NonPositiveEpsilon, "eps values must be positive");
    const long n = std::lround(kTwoPi * family.hbar / (eps_req * eps_req * family.eB));
    if (n < 1 || n > kMaxConvergenceDenominator)
      throw Error(ErrorKind::InvalidArgument,
                  "eps = " + std::to_string(eps_req) + " needs flux denominator " + std::to_string(n));
    ConvergencePoint pt;
    pt.eps_requested = eps_req;
    pt.n = static_cast<int>(n);
    pt.eps = std::sqrt(kTwoPi * family.hbar / (static_cast<double>(n) * family.eB));
    const auto params = rational_flux(pt.n, pt.eps, family.mass, family.hbar);
    const auto es = eigendecompose(build_step_unitary(params, Momentum::physical(family.p, params)));
    pt.theta_s = smallest_positive_phase(es).theta;
    pt.scaled = pt.theta_s / pt.eps;
    pt.error = std::abs(pt.scaled - report.dirac_energy);
    lx.push_back(std::log(pt.eps));
    ly.push_back(std::log(pt.error));
    report.points.push_back(pt);
  }

  const double n = static_cast<double>(lx.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sx += lx[i];
    sy += ly[i];
    sxx += lx[i] * lx[i];
    sxy += lx[i] * ly[i];
  }
  const double denom = n * sxx - sx * sx;
  if (denom == 0.0) throw Error(ErrorKind::InvalidArgument, "eps values must be distinct");
  report.alpha = (n * sxy - sx * sy) / denom;
  return report;
}

}  // namespace mqw
