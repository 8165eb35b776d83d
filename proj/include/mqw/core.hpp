#pragma once

// Shared domain types for magnetic quantum walks: walk parameters, coin
// angles, momenta, spinor fields on periodic lattices, and the probabilistic
// observables (density, average position) read off those fields.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mqw/error.hpp"

namespace mqw {

using cplx = std::complex<double>;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline constexpr cplx kI{0.0, 1.0};

/// Tolerance on |eps^2 eB / hbar - 2 pi / N| accepted in rational-flux mode.
inline constexpr double kFluxTolerance = 1e-12;

/// Maps x to [0, 2 pi).
inline double wrap_two_pi(double x) {
  double r = std::fmod(x, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  if (r >= kTwoPi) r -= kTwoPi;
  return r;
}

/// Maps x to (-pi, pi].
inline double principal_angle(double x) {
  double r = std::remainder(x, kTwoPi);
  if (r <= -kPi) r += kTwoPi;
  return r;
}

struct CoinAngles {
  double theta_plus = 0.0;
  double theta_minus = 0.0;

  double c_plus() const { return std::cos(theta_plus); }
  double s_plus() const { return std::sin(theta_plus); }
  double c_minus() const { return std::cos(theta_minus); }
  double s_minus() const { return std::sin(theta_minus); }
};

/// Unvalidated parameter record, as read from a CLI or a config file.
struct ParamRecord {
  double epsilon = 1.0;
  double hbar = 1.0;
  double mass = 0.0;
  double eB = 0.0;
  std::optional<int> flux_denominator;
  std::optional<CoinAngles> coin_override;
};

/// Validated walk configuration. Only obtainable through validate_params()
/// (or the rational_flux() shorthand), so every instance satisfies
/// epsilon > 0, hbar > 0 and, in rational-flux mode, eps^2 eB / hbar = 2 pi / N.
class PhysParams {
 public:
  double epsilon() const { return epsilon_; }
  double hbar() const { return hbar_; }
  double mass() const { return mass_; }
  double eB() const { return eB_; }
  const std::optional<int>& flux_denominator() const { return flux_denominator_; }
  const std::optional<CoinAngles>& coin_override() const { return coin_override_; }

  /// Magnetic phase per plaquette, eps^2 eB / hbar.
  double flux_phase() const { return epsilon_ * epsilon_ * eB_ / hbar_; }

  ParamRecord record() const {
    return {epsilon_, hbar_, mass_, eB_, flux_denominator_, coin_override_};
  }

  friend PhysParams validate_params(const ParamRecord& raw);

 private:
  PhysParams() = default;

  double epsilon_ = 1.0;
  double hbar_ = 1.0;
  double mass_ = 0.0;
  double eB_ = 0.0;
  std::optional<int> flux_denominator_;
  std::optional<CoinAngles> coin_override_;
};

inline PhysParams validate_params(const ParamRecord& raw) {
  if (!(raw.epsilon > 0.0) || !std::isfinite(raw.epsilon))
    throw Error(ErrorKind::NonPositiveEpsilon, "epsilon must be a finite positive number");
  if (!(raw.hbar > 0.0) || !std::isfinite(raw.hbar))
    throw Error(ErrorKind::NonPositiveHbar, "hbar must be a finite positive number");
  if (!(raw.mass >= 0.0) || !std::isfinite(raw.mass))
    throw Error(ErrorKind::InvalidArgument, "mass must be finite and non-negative");
  if (!std::isfinite(raw.eB)) throw Error(ErrorKind::InvalidArgument, "eB must be finite");
  if (raw.coin_override &&
      !(std::isfinite(raw.coin_override->theta_plus) &&
        std::isfinite(raw.coin_override->theta_minus)))
    throw Error(ErrorKind::InvalidArgument, "coin angles must be finite");

  if (raw.flux_denominator) {
    const int n = *raw.flux_denominator;
    if (n <= 0) throw Error(ErrorKind::InvalidArgument, "flux denominator must be positive");
    const double phase = raw.epsilon * raw.epsilon * raw.eB / raw.hbar;
    const double target = kTwoPi / n;
    if (std::abs(phase - target) > kFluxTolerance)
      throw Error(ErrorKind::FluxMismatch, "eps^2 eB / hbar = " + std::to_string(phase) +
                                               " but 2 pi / N = " + std::to_string(target));
  }

  PhysParams p;
  p.epsilon_ = raw.epsilon;
  p.hbar_ = raw.hbar;
  p.mass_ = raw.mass;
  p.eB_ = raw.eB;
  p.flux_denominator_ = raw.flux_denominator;
  p.coin_override_ = raw.coin_override;
  return p;
}

/// Rational-flux configuration: eB chosen so that eps^2 eB / hbar = 2 pi / n.
inline PhysParams rational_flux(int n, double epsilon = 1.0, double mass = 0.0,
                                double hbar = 1.0,
                                std::optional<CoinAngles> coin = std::nullopt) {
  if (n <= 0) throw Error(ErrorKind::InvalidArgument, "flux denominator must be positive");
  ParamRecord raw;
  raw.epsilon = epsilon;
  raw.hbar = hbar;
  raw.mass = mass;
  raw.eB = kTwoPi * hbar / (epsilon * epsilon * n);
  raw.flux_denominator = n;
  raw.coin_override = coin;
  return validate_params(raw);
}

/// theta^{+/-} = +/- pi/4 - eps m / (2 hbar).
inline CoinAngles coin_angles_for_mass(double epsilon, double mass, double hbar) {
  const double shift = epsilon * mass / (2.0 * hbar);
  return {kPi / 4.0 - shift, -kPi / 4.0 - shift};
}

inline CoinAngles coin_angles(const PhysParams& params) {
  if (params.coin_override()) return *params.coin_override();
  return coin_angles_for_mass(params.epsilon(), params.mass(), params.hbar());
}

/// Momentum along the translation-invariant direction. `p` is the walk label
/// (the plane wave is exp(-i p eps^2 r / hbar)); `p_bar_raw` = eps^2 p / hbar is
/// kept un-reduced so that coefficient periodicity in p_bar can be exercised,
/// `p_bar` is its canonical representative in [0, 2 pi).
struct Momentum {
  double p = 0.0;
  double p_bar_raw = 0.0;
  double p_bar = 0.0;

  static Momentum physical(double p, const PhysParams& params) {
    const double raw = params.epsilon() * params.epsilon() * p / params.hbar();
    return {p, raw, wrap_two_pi(raw)};
  }

  static Momentum reduced(double p_bar, const PhysParams& params) {
    const double p = p_bar * params.hbar() / (params.epsilon() * params.epsilon());
    return {p, p_bar, wrap_two_pi(p_bar)};
  }
};

/// alpha_q = eps^2 eB q / (2 hbar).
inline double alpha_phase(long q, const PhysParams& params) {
  return params.flux_phase() * static_cast<double>(q) / 2.0;
}

/// beta_q = alpha_q - eps^2 p / (2 hbar).
inline double beta_phase(long q, const Momentum& mom, const PhysParams& params) {
  return alpha_phase(q, params) - mom.p_bar_raw / 2.0;
}

/// Continuum centre of the Landau orbit carried by momentum label p. The
/// physical y-momentum of exp(-i p eps^2 r / hbar) is eps p, hence eps p / eB.
inline double center_position(const Momentum& mom, const PhysParams& params) {
  if (params.eB() == 0.0) throw Error(ErrorKind::InvalidArgument, "center undefined for eB = 0");
  return params.epsilon() * mom.p / params.eB();
}

/// beta_q written as eps eB (x_q - x(p)) / (2 hbar), x_q = eps q.
inline double beta_phase_from_positions(long q, const Momentum& mom, const PhysParams& params) {
  const double x_q = params.epsilon() * static_cast<double>(q);
  return params.epsilon() * params.eB() * (x_q - center_position(mom, params)) /
         (2.0 * params.hbar());
}

/// Two-component field on a periodic 1D lattice, stored interleaved as
/// (L_0, R_0, L_1, R_1, ...). The flat layout is the one the step unitary
/// acts on.
class SpinorField1D {
 public:
  SpinorField1D() = default;
  explicit SpinorField1D(std::size_t n_sites) : n_sites_(n_sites), amp_(2 * n_sites) {
    if (n_sites == 0) throw Error(ErrorKind::InvalidArgument, "field needs at least one site");
  }

  static SpinorField1D from_flat(std::span<const cplx> flat) {
    if (flat.size() % 2 != 0 || flat.empty())
      throw Error(ErrorKind::DimensionMismatch, "flat spinor data must have even, nonzero length");
    SpinorField1D f(flat.size() / 2);
    std::copy(flat.begin(), flat.end(), f.amp_.begin());
    return f;
  }

  std::size_t n_sites() const { return n_sites_; }

  cplx& L(std::size_t q) { return amp_[2 * q]; }
  cplx& R(std::size_t q) { return amp_[2 * q + 1]; }
  const cplx& L(std::size_t q) const { return amp_[2 * q]; }
  const cplx& R(std::size_t q) const { return amp_[2 * q + 1]; }

  std::span<cplx> flat() { return amp_; }
  std::span<const cplx> flat() const { return amp_; }

  double norm2() const {
    double s = 0.0;
    for (const auto& a : amp_) s += std::norm(a);
    return s;
  }

  SpinorField1D& operator*=(cplx s) {
    for (auto& a : amp_) a *= s;
    return *this;
  }

 private:
  std::size_t n_sites_ = 0;
  std::vector<cplx> amp_;
};

/// Two-component field on an n_q x n_r torus.
class SpinorField2D {
 public:
  SpinorField2D() = default;
  SpinorField2D(std::size_t n_q, std::size_t n_r) : n_q_(n_q), n_r_(n_r), amp_(2 * n_q * n_r) {
    if (n_q == 0 || n_r == 0) throw Error(ErrorKind::InvalidArgument, "empty 2D field");
  }

  std::size_t n_q() const { return n_q_; }
  std::size_t n_r() const { return n_r_; }

  cplx& L(std::size_t q, std::size_t r) { return amp_[index(q, r)]; }
  cplx& R(std::size_t q, std::size_t r) { return amp_[index(q, r) + 1]; }
  const cplx& L(std::size_t q, std::size_t r) const { return amp_[index(q, r)]; }
  const cplx& R(std::size_t q, std::size_t r) const { return amp_[index(q, r) + 1]; }

  std::span<cplx> flat() { return amp_; }
  std::span<const cplx> flat() const { return amp_; }

  double norm2() const {
    double s = 0.0;
    for (const auto& a : amp_) s += std::norm(a);
    return s;
  }

 private:
  std::size_t index(std::size_t q, std::size_t r) const { return 2 * (q * n_r_ + r); }

  std::size_t n_q_ = 0;
  std::size_t n_r_ = 0;
  std::vector<cplx> amp_;
};

/// Born-rule site probabilities rho_q = (|L_q|^2 + |R_q|^2) / norm^2.
inline std::vector<double> density(const SpinorField1D& field) {
  const double n2 = field.norm2();
  if (!(n2 > 0.0)) throw Error(ErrorKind::ZeroNorm, "density of a zero field");
  std::vector<double> rho(field.n_sites());
  for (std::size_t q = 0; q < rho.size(); ++q)
    rho[q] = (std::norm(field.L(q)) + std::norm(field.R(q))) / n2;
  return rho;
}

/// <q> = sum_q q rho_q over the periodicity set {0..N-1}.
inline double average_position(std::span<const double> rho) {
  double a = 0.0;
  for (std::size_t q = 0; q < rho.size(); ++q) a += static_cast<double>(q) * rho[q];
  return a;
}

inline double average_position(const SpinorField1D& field) {
  const auto rho = density(field);
  return average_position(std::span<const double>(rho));
}

}  // namespace mqw
