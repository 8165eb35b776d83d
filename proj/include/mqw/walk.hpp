#pragma once

// Time steppers for the magnetic walk on the torus (2D) and for its
// momentum-reduced form on the ring (1D). Both share step_weights(), which is
// the single transcription of the update rule.

#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "mqw/core.hpp"

namespace mqw {

/// Coefficients of one site update. `*_up` terms carry e^{2i phi} and read the
/// r+1 neighbour; `*_down` terms carry e^{-2i phi} and read the r-1 neighbour.
/// First letter is the output component, second the input one; inputs are
/// always L at q+1 and R at q-1.
struct StepWeights {
  cplx ll_up, lr_up, ll_down, lr_down;
  cplx rl_up, rr_up, rl_down, rr_down;

  // Weights of the momentum-reduced update, where both r branches collapse.
  cplx ll() const { return ll_up + ll_down; }
  cplx lr() const { return lr_up + lr_down; }
  cplx rl() const { return rl_up + rl_down; }
  cplx rr() const { return rr_up + rr_down; }
};

/// phi is alpha_q for the 2D walk and beta_q for the reduced one.
inline StepWeights step_weights(double phi, const CoinAngles& coin) {
  const double cp = coin.c_plus(), sp = coin.s_plus();
  const double cm = coin.c_minus(), sm = coin.s_minus();
  const cplx up = std::polar(1.0, 2.0 * phi);
  const cplx down = std::conj(up);
  StepWeights w;
  w.ll_up = up * (cm * cp);
  w.lr_up = up * kI * (cm * sp);
  w.ll_down = down * (-sm * sp);
  w.lr_down = down * kI * (sm * cp);
  w.rl_up = up * kI * (sm * cp);
  w.rr_up = up * (-sm * sp);
  w.rl_down = down * kI * (cm * sp);
  w.rr_down = down * (cm * cp);
  return w;
}

namespace detail {

inline bool ring_is_commensurate(std::size_t n, const PhysParams& params) {
  if (params.flux_denominator()) return n % static_cast<std::size_t>(*params.flux_denominator()) == 0;
  const double turns = params.flux_phase() * static_cast<double>(n) / kTwoPi;
  return std::abs(turns - std::round(turns)) <= 1e-9;
}

inline std::size_t next(std::size_t i, std::size_t n) { return i + 1 == n ? 0 : i + 1; }
inline std::size_t prev(std::size_t i, std::size_t n) { return i == 0 ? n - 1 : i - 1; }

}  // namespace detail

/// One step of the walk on the n_q x n_r torus.
inline SpinorField2D step_2d(const SpinorField2D& field, const PhysParams& params) {
  const std::size_t nq = field.n_q(), nr = field.n_r();
  if (!detail::ring_is_commensurate(nq, params))
    throw Error(ErrorKind::DimensionMismatch,
                "n_q = " + std::to_string(nq) + " is not a period of the magnetic phase");
  const CoinAngles coin = coin_angles(params);
  SpinorField2D out(nq, nr);
  for (std::size_t q = 0; q < nq; ++q) {
    const StepWeights w = step_weights(alpha_phase(static_cast<long>(q), params), coin);
    const std::size_t qp = detail::next(q, nq), qm = detail::prev(q, nq);
    for (std::size_t r = 0; r < nr; ++r) {
      const std::size_t rp = detail::next(r, nr), rm = detail::prev(r, nr);
      const cplx l_up = field.L(qp, rp), r_up = field.R(qm, rp);
      const cplx l_dn = field.L(qp, rm), r_dn = field.R(qm, rm);
      out.L(q, r) = w.ll_up * l_up + w.lr_up * r_up + w.ll_down * l_dn + w.lr_down * r_dn;
      out.R(q, r) = w.rl_up * l_up + w.rr_up * r_up + w.rl_down * l_dn + w.rr_down * r_dn;
    }
  }
  return out;
}

/// One step of the p-dependent walk on the ring {0..N-1}.
inline SpinorField1D step_1d(const SpinorField1D& field, const Momentum& mom,
                             const PhysParams& params) {
  const std::size_t n = field.n_sites();
  if (!detail::ring_is_commensurate(n, params))
    throw Error(ErrorKind::DimensionMismatch,
                "n_sites = " + std::to_string(n) + " is not a period of the magnetic phase");
  const CoinAngles coin = coin_angles(params);
  SpinorField1D out(n);
  for (std::size_t q = 0; q < n; ++q) {
    const StepWeights w = step_weights(beta_phase(static_cast<long>(q), mom, params), coin);
    const cplx l_in = field.L(detail::next(q, n));
    const cplx r_in = field.R(detail::prev(q, n));
    out.L(q) = w.ll() * l_in + w.lr() * r_in;
    out.R(q) = w.rl() * l_in + w.rr() * r_in;
  }
  return out;
}

/// Evolution bookkeeping: j = 0..steps.
struct WalkEvolution {
  PhysParams params;
  std::size_t steps = 0;
  bool record_norms = false;
};

template <class Field>
struct EvolutionResult {
  Field field;
  std::vector<double> norms;  // ||psi_j|| for j = 0..steps when recorded
};

/// Applies `stepper` `steps` times. `stepper` maps a Field to the next Field.
template <class Field, class Stepper>
EvolutionResult<Field> evolve(Field field, std::size_t steps, Stepper&& stepper,
                              bool record_norms = false) {
  EvolutionResult<Field> res;
  if (record_norms) {
    res.norms.reserve(steps + 1);
    res.norms.push_back(std::sqrt(field.norm2()));
  }
  for (std::size_t j = 0; j < steps; ++j) {
    field = stepper(field);
    if (record_norms) res.norms.push_back(std::sqrt(field.norm2()));
  }
  res.field = std::move(field);
  return res;
}

inline EvolutionResult<SpinorField1D> evolve(SpinorField1D field, const Momentum& mom,
                                             const WalkEvolution& ev) {
  return evolve(std::move(field), ev.steps,
                [&](const SpinorField1D& f) { return step_1d(f, mom, ev.params); },
                ev.record_norms);
}

inline EvolutionResult<SpinorField2D> evolve(SpinorField2D field, const WalkEvolution& ev) {
  return evolve(std::move(field), ev.steps,
                [&](const SpinorField2D& f) { return step_2d(f, ev.params); }, ev.record_norms);
}

/// Plane-wave lift Psi_{q,r} = Phi_q exp(-i p_bar r) onto an n_r ring.
inline SpinorField2D lift_plane_wave(const SpinorField1D& phi, const Momentum& mom,
                                     std::size_t ring_size) {
  SpinorField2D psi(phi.n_sites(), ring_size);
  for (std::size_t r = 0; r < ring_size; ++r) {
    const cplx phase = std::polar(1.0, -mom.p_bar_raw * static_cast<double>(r));
    for (std::size_t q = 0; q < phi.n_sites(); ++q) {
      psi.L(q, r) = phi.L(q) * phase;
      psi.R(q, r) = phi.R(q) * phase;
    }
  }
  return psi;
}

/// Evolves the lifted plane wave with step_2d and phi0 with step_1d, then
/// returns max_{q,r} |Psi_{q,r} - Phi_q e^{-i p_bar r}|.
inline double fourier_reduction_check(const SpinorField1D& phi0, const Momentum& mom,
                                      const PhysParams& params, std::size_t steps,
                                      std::size_t ring_size) {
  if (ring_size == 0) throw Error(ErrorKind::InvalidArgument, "ring size must be positive");
  const double harmonic = mom.p_bar_raw * static_cast<double>(ring_size) / kTwoPi;
  if (std::abs(harmonic - std::round(harmonic)) > 1e-9)
    throw Error(ErrorKind::IncommensurateMomentum,
                "p_bar is not a harmonic of the r-ring of size " + std::to_string(ring_size));

  WalkEvolution ev{params, steps, false};
  const auto psi = evolve(lift_plane_wave(phi0, mom, ring_size), ev).field;
  const auto phi = evolve(phi0, mom, ev).field;
  const auto expected = lift_plane_wave(phi, mom, ring_size);

  double dev = 0.0;
  const auto a = psi.flat();
  const auto b = expected.flat();
  for (std::size_t i = 0; i < a.size(); ++i) dev = std::max(dev, std::abs(a[i] - b[i]));
  return dev;
}

}  // namespace mqw
