#pragma once

// The discrete non-commutative-geometry marker: the average position
// A(p_bar) = <q> in the theta_S eigenspace, its derivative A'(p_bar) (the
// commutator [r, <q>] = i A'(p_bar)), the intervals on which A can be
// inverted, and the analytic fixtures of the fully degenerate walk.

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <span>
#include <thread>
#include <utility>
#include <vector>

#include "mqw/core.hpp"
#include "mqw/spectral.hpp"

namespace mqw {

struct NcgSample {
  double p_bar = 0.0;
  double theta_s = 0.0;
  double avg_q = 0.0;
  double d_avg_q = 0.0;
  int multiplicity = 1;  // size of the theta_S eigenspace
};

struct NcgCurve {
  PhysParams params;
  std::vector<NcgSample> samples;  // uniform grid p_bar_k = 2 pi k / M

  std::size_t grid() const { return samples.size(); }
  double spacing() const { return kTwoPi / static_cast<double>(samples.size()); }
};

/// Worker count for sweeps: hardware concurrency, capped by MQW_THREADS.
inline unsigned sweep_threads() {
  unsigned n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("MQW_THREADS")) {
    const long cap = std::strtol(env, nullptr, 10);
    if (cap > 0) n = std::min(n, static_cast<unsigned>(cap));
  }
  return n;
}

/// theta_S and <q> at one (un-reduced) p_bar.
inline NcgSample ncg_sample(const PhysParams& params, double p_bar) {
  const auto es = eigendecompose(build_step_unitary(params, Momentum::reduced(p_bar, params)));
  const auto s = smallest_positive_phase(es);
  NcgSample row;
  row.p_bar = p_bar;
  row.theta_s = s.theta;
  row.avg_q = average_position(std::span<const double>(s.density));
  row.multiplicity = s.multiplicity;
  return row;
}

inline NcgCurve curve_derivative(NcgCurve curve);

/// Samples theta_S and A on p_bar_k = 2 pi k / M, k = 0..M-1, then fills A'.
/// Rows are independent and evaluated in parallel; output order is by k.
inline NcgCurve ncg_sweep(const PhysParams& params, std::size_t grid,
                          unsigned threads = sweep_threads()) {
  if (grid < 16) throw Error(ErrorKind::InvalidArgument, "sweep grid must have at least 16 points");
  if (!params.flux_denominator()) throw Error(ErrorKind::MissingFlux, "sweep needs a rational flux");

  NcgCurve curve{params, std::vector<NcgSample>(grid)};
  const double h = kTwoPi / static_cast<double>(grid);
  auto work = [&](std::size_t begin, std::size_t stride) {
    for (std::size_t k = begin; k < grid; k += stride)
      curve.samples[k] = ncg_sample(params, h * static_cast<double>(k));
  };

  threads = std::clamp<unsigned>(threads, 1u, static_cast<unsigned>(grid));
  if (threads == 1) {
    work(0, 1);
  } else {
    std::vector<std::jthread> pool;
    std::vector<std::exception_ptr> errors(threads);
    for (unsigned t = 0; t < threads; ++t)
      pool.emplace_back([&, t] {
        try {
          work(t, threads);
        } catch (...) {
          errors[t] = std::current_exception();
        }
      });
    pool.clear();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }
  return curve_derivative(std::move(curve));
}

/// Periodic central differences, A(0) identified with A(2 pi).
inline NcgCurve curve_derivative(NcgCurve curve) {
  const std::size_t m = curve.grid();
  if (m < 16) throw Error(ErrorKind::InvalidArgument, "derivative needs at least 16 samples");
  const double h = curve.spacing();
  std::vector<double> d(m);
  for (std::size_t k = 0; k < m; ++k) {
    const double ahead = curve.samples[(k + 1) % m].avg_q;
    const double behind = curve.samples[(k + m - 1) % m].avg_q;
    d[k] = (ahead - behind) / (2.0 * h);
  }
  for (std::size_t k = 0; k < m; ++k) curve.samples[k].d_avg_q = d[k];
  return curve;
}

/// max_k |A(p_bar_k + 2 pi) - A(p_bar_k)| with the shifted momenta fed to the
/// unitary un-reduced.
inline double periodicity_mismatch(const NcgCurve& curve) {
  double worst = 0.0;
  for (const auto& s : curve.samples)
    worst = std::max(worst, std::abs(ncg_sample(curve.params, s.p_bar + kTwoPi).avg_q - s.avg_q));
  return worst;
}

struct MonotoneSegment {
  std::size_t first = 0;  // index of the first sample
  std::size_t count = 0;  // number of samples, may wrap past M-1
  double p_start = 0.0;
  double p_end = 0.0;     // p_end < p_start when the segment wraps through 0
  int sign = 0;           // sign of A' on the segment
};

struct InvertibilitySegments {
  std::vector<MonotoneSegment> segments;
  bool globally_invertible = false;
};

/// Splits the circle at sign changes of A' (|A'| <= threshold counts as a
/// critical point and belongs to no segment). Runs touching 0 and 2 pi with
/// the same sign are one segment.
inline InvertibilitySegments invertibility_segments(const NcgCurve& curve,
                                                    double threshold = 1e-9) {
  const std::size_t m = curve.grid();
  std::vector<int> sign(m, 0);
  bool any = false;
  for (std::size_t k = 0; k < m; ++k) {
    const double d = curve.samples[k].d_avg_q;
    sign[k] = d > threshold ? 1 : (d < -threshold ? -1 : 0);
    any = any || sign[k] != 0;
  }
  if (!any) throw Error(ErrorKind::DegenerateCurve, "A' vanishes on the whole grid");

  InvertibilitySegments out;
  for (std::size_t k = 0; k < m;) {
    if (sign[k] == 0) {
      ++k;
      continue;
    }
    MonotoneSegment seg;
    seg.first = k;
    seg.sign = sign[k];
    while (k < m && sign[k] == seg.sign) ++k;
    seg.count = k - seg.first;
    out.segments.push_back(seg);
  }
  if (out.segments.size() > 1) {
    auto& head = out.segments.front();
    const auto& tail = out.segments.back();
    if (head.first == 0 && tail.first + tail.count == m && head.sign == tail.sign) {
      head.first = tail.first;
      head.count += tail.count;
      out.segments.pop_back();
    }
  }
  for (auto& seg : out.segments) {
    seg.p_start = curve.samples[seg.first].p_bar;
    seg.p_end = curve.samples[(seg.first + seg.count - 1) % m].p_bar;
  }
  out.globally_invertible = out.segments.size() == 1;
  return out;
}

/// Tabulated local form B(<q>) of the commutator on one monotone segment:
/// A inverted on the segment and composed with A'.
struct LocalCommutator {
  std::vector<std::pair<double, double>> table;  // (<q>, B), <q> ascending

  double operator()(double q) const {
    if (table.empty()) throw Error(ErrorKind::InvalidArgument, "empty commutator table");
    if (q <= table.front().first) return table.front().second;
    if (q >= table.back().first) return table.back().second;
    const auto hi = std::lower_bound(table.begin(), table.end(), q,
                                     [](const auto& row, double x) { return row.first < x; });
    const auto lo = std::prev(hi);
    const double t = (q - lo->first) / (hi->first - lo->first);
    return lo->second + t * (hi->second - lo->second);
  }
};

inline std::vector<LocalCommutator> local_commutator_tables(const NcgCurve& curve,
                                                            const InvertibilitySegments& segs) {
  std::vector<LocalCommutator> out;
  const std::size_t m = curve.grid();
  for (const auto& seg : segs.segments) {
    LocalCommutator lc;
    for (std::size_t j = 0; j < seg.count; ++j) {
      const auto& s = curve.samples[(seg.first + j) % m];
      lc.table.emplace_back(s.avg_q, s.d_avg_q);
    }
    std::sort(lc.table.begin(), lc.table.end());
    out.push_back(std::move(lc));
  }
  return out;
}

/// Coin angles of the fully degenerate walk: theta+ = pi/2, theta- = 0.
inline constexpr CoinAngles kExample2Coin{kPi / 2.0, 0.0};

inline PhysParams example2_params(int n) { return rational_flux(n, 1.0, 0.0, 1.0, kExample2Coin); }

enum class Example2Convention {
  WithFactorI,  // phi^R_{q-1} = +/- (i/sqrt2) e^{i p_bar} e^{-i pi (2q-1)/N}
  Invariant,    // the same without the factor i; exact eigenvectors
};

struct Example2Vector {
  int site = 0;  // vector lives on (site-1, site)
  int sign = 1;
  SpinorField1D field;
  cplx best_lambda;       // unit-modulus lambda minimising ||Uv - lambda v||
  double residual = 0.0;  // that minimum
};

struct Example2Analysis {
  std::vector<Example2Vector> vectors;
  Matrix overlaps;  // Gram matrix <v_i, v_j>
  double max_offdiag_overlap = 0.0;
  double max_residual = 0.0;
};

/// The 2N pair-localised vectors of the theta+ = pi/2, theta- = 0 walk at
/// eps = 1, eB = 2 pi / N, each scored against the numerical step unitary.
inline Example2Analysis example2_analytic(int n, double p_bar,
                                          Example2Convention conv = Example2Convention::WithFactorI) {
  if (n < 2) throw Error(ErrorKind::InvalidArgument, "needs N >= 2");
  const PhysParams params = example2_params(n);
  const auto u = build_step_unitary(params, Momentum::reduced(p_bar, params));
  const cplx prefactor = conv == Example2Convention::WithFactorI ? kI : cplx{1.0, 0.0};
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);

  Example2Analysis out;
  for (int q = 0; q < n; ++q) {
    for (int sign : {+1, -1}) {
      Example2Vector v{q, sign, SpinorField1D(static_cast<std::size_t>(n)), {}, 0.0};
      const auto left = static_cast<std::size_t>((q - 1 + n) % n);
      v.field.L(static_cast<std::size_t>(q)) = inv_sqrt2;
      v.field.R(left) = static_cast<double>(sign) * prefactor * inv_sqrt2 *
                        std::polar(1.0, p_bar - kPi * (2.0 * q - 1.0) / n);
      const Vector x = Eigen::Map<const Vector>(v.field.flat().data(), u.dim());
      const cplx overlap = x.dot(u.entries * x);  // <v, U v>, ||v|| = 1
      const double mag = std::abs(overlap);
      v.best_lambda = mag > 0.0 ? overlap / mag : cplx{1.0, 0.0};
      v.residual = (u.entries * x - v.best_lambda * x).norm();
      out.max_residual = std::max(out.max_residual, v.residual);
      out.vectors.push_back(std::move(v));
    }
  }

  const auto count = static_cast<Eigen::Index>(out.vectors.size());
  out.overlaps.resize(count, count);
  for (Eigen::Index i = 0; i < count; ++i) {
    const Vector a = Eigen::Map<const Vector>(out.vectors[static_cast<std::size_t>(i)].field.flat().data(), u.dim());
    for (Eigen::Index j = 0; j < count; ++j) {
      const Vector b = Eigen::Map<const Vector>(out.vectors[static_cast<std::size_t>(j)].field.flat().data(), u.dim());
      out.overlaps(i, j) = a.dot(b);
      if (i != j) out.max_offdiag_overlap = std::max(out.max_offdiag_overlap, std::abs(out.overlaps(i, j)));
    }
  }
  return out;
}

/// Checks r f_r = (inverse transform of i d f_hat / d p_bar)_r for a band-limited
/// sequence f_r, r = -K..K (coefficients[r + K]). The right-hand side is built
/// from samples of f_hat only: spectral differentiation on an even grid, then
/// the trapezoid inverse transform, both exact for trigonometric polynomials of
/// degree below half the grid. Returns max_r |difference|.
inline double fourier_position_identity(std::span<const cplx> coefficients) {
  if (coefficients.empty() || coefficients.size() % 2 == 0)
    throw Error(ErrorKind::InvalidArgument, "need 2K+1 coefficients");
  const long k_max = static_cast<long>(coefficients.size() / 2);
  const std::size_t m = static_cast<std::size_t>(4 * (k_max + 1));
  const double h = kTwoPi / static_cast<double>(m);
  const double norm = 1.0 / std::sqrt(kTwoPi);

  std::vector<cplx> f_hat(m);
  for (std::size_t j = 0; j < m; ++j) {
    cplx acc = 0.0;
    for (long r = -k_max; r <= k_max; ++r)
      acc += coefficients[static_cast<std::size_t>(r + k_max)] *
             std::polar(1.0, -h * static_cast<double>(j) * static_cast<double>(r));
    f_hat[j] = norm * acc;
  }

  std::vector<cplx> i_df(m);
  for (std::size_t j = 0; j < m; ++j) {
    cplx acc = 0.0;
    for (std::size_t l = 0; l < m; ++l) {
      if (l == j) continue;
      const long diff = static_cast<long>(j) - static_cast<long>(l);
      const double sgn = (diff % 2 == 0) ? 1.0 : -1.0;
      acc += 0.5 * sgn / std::tan(static_cast<double>(diff) * h / 2.0) * f_hat[l];
    }
    i_df[j] = kI * acc;
  }

  double worst = 0.0;
  for (long r = -k_max; r <= k_max; ++r) {
    cplx acc = 0.0;
    for (std::size_t j = 0; j < m; ++j)
      acc += i_df[j] * std::polar(1.0, h * static_cast<double>(j) * static_cast<double>(r));
    const cplx via_derivative = norm * h * acc;
    const cplx direct = static_cast<double>(r) * coefficients[static_cast<std::size_t>(r + k_max)];
    worst = std::max(worst, std::abs(direct - via_derivative));
  }
  return worst;
}

}  // namespace mqw
