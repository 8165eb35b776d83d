#pragma once

// One-step unitary of the momentum-reduced walk at rational flux, its
// eigensystem and characteristic polynomial, and the eigenphase observables
// built on them.

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "mqw/core.hpp"
#include "mqw/walk.hpp"

namespace mqw {

using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

/// Default single-linkage threshold (arc distance) for eigenvalue clusters.
inline constexpr double kDegeneracyTolerance = 1e-8;
/// Phases at or below this are not "positive".
inline constexpr double kPositivePhaseThreshold = 1e-12;

struct StepUnitary {
  Matrix entries;
  Momentum mom;
  PhysParams params;

  Eigen::Index dim() const { return entries.rows(); }

  /// max |(U^dagger U - I)_{ij}|
  double unitarity_defect() const {
    const Matrix d = entries.adjoint() * entries - Matrix::Identity(dim(), dim());
    return d.cwiseAbs().maxCoeff();
  }

  SpinorField1D apply(const SpinorField1D& field) const {
    if (static_cast<Eigen::Index>(2 * field.n_sites()) != dim())
      throw Error(ErrorKind::DimensionMismatch, "field size does not match the unitary");
    Vector v = Eigen::Map<const Vector>(field.flat().data(), dim());
    const Vector w = entries * v;
    return SpinorField1D::from_flat(std::span<const cplx>(w.data(), static_cast<std::size_t>(w.size())));
  }
};

/// Dense 2N x 2N matrix of step_1d acting on (L_0, R_0, ..., L_{N-1}, R_{N-1}).
inline StepUnitary build_step_unitary(const PhysParams& params, const Momentum& mom) {
  if (!params.flux_denominator())
    throw Error(ErrorKind::MissingFlux, "the step unitary needs a rational flux 2 pi / N");
  const std::size_t n = static_cast<std::size_t>(*params.flux_denominator());
  const CoinAngles coin = coin_angles(params);
  Matrix u = Matrix::Zero(2 * n, 2 * n);
  for (std::size_t q = 0; q < n; ++q) {
    const StepWeights w = step_weights(beta_phase(static_cast<long>(q), mom, params), coin);
    const auto lq = static_cast<Eigen::Index>(2 * q);
    const auto l_src = static_cast<Eigen::Index>(2 * detail::next(q, n));
    const auto r_src = static_cast<Eigen::Index>(2 * detail::prev(q, n) + 1);
    u(lq, l_src) += w.ll();
    u(lq, r_src) += w.lr();
    u(lq + 1, l_src) += w.rl();
    u(lq + 1, r_src) += w.rr();
  }
  return {std::move(u), mom, params};
}

struct EigenSystem {
  std::vector<double> phases;     // ascending, in (-pi, pi]
  std::vector<cplx> eigenvalues;  // matching phases
  Matrix vectors;                 // column k pairs with phases[k]; orthonormal
  std::vector<double> residuals;  // ||U v_k - lambda_k v_k||

  std::size_t size() const { return phases.size(); }

  double max_residual() const {
    return residuals.empty() ? 0.0 : *std::max_element(residuals.begin(), residuals.end());
  }

  double max_modulus_defect() const {
    double d = 0.0;
    for (const auto& l : eigenvalues) d = std::max(d, std::abs(std::abs(l) - 1.0));
    return d;
  }

  SpinorField1D field(std::size_t k) const {
    const Vector v = vectors.col(static_cast<Eigen::Index>(k));
    return SpinorField1D::from_flat(std::span<const cplx>(v.data(), static_cast<std::size_t>(v.size())));
  }
};

namespace detail {

// Multiplies v by a unit phase so that its first non-negligible entry is real positive.
inline void fix_phase(Eigen::Ref<Vector> v) {
  const double scale = v.cwiseAbs().maxCoeff();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::abs(v(i)) > 1e-8 * scale) {
      v *= std::conj(v(i)) / std::abs(v(i));
      return;
    }
  }
}

}  // namespace detail

/// Complete eigensystem of a unitary via complex Schur decomposition. For a
/// normal matrix the Schur factor is diagonal up to rounding, so the Schur
/// vectors are an orthonormal eigenbasis, including inside degenerate clusters.
inline EigenSystem eigendecompose(const Matrix& u) {
  if (u.rows() != u.cols()) throw Error(ErrorKind::DimensionMismatch, "matrix is not square");
  Eigen::ComplexSchur<Matrix> schur(u.rows());
  schur.setMaxIterations(200 * static_cast<Eigen::Index>(std::max<Eigen::Index>(u.rows(), 1)));
  schur.compute(u, true);
  if (schur.info() != Eigen::Success)
    throw Error(ErrorKind::ConvergenceFailure, "Schur iteration did not converge");

  const Matrix& t = schur.matrixT();
  Matrix q = schur.matrixU();
  const auto n = u.rows();

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::vector<double> phase(static_cast<std::size_t>(n));
  for (Eigen::Index k = 0; k < n; ++k) {
    phase[static_cast<std::size_t>(k)] = principal_angle(std::arg(t(k, k)));
    detail::fix_phase(q.col(k));
  }
  auto phase_of = [&](Eigen::Index k) { return phase[static_cast<std::size_t>(k)]; };
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return phase_of(a) < phase_of(b); });

  EigenSystem es;
  es.vectors.resize(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const Eigen::Index k = order[static_cast<std::size_t>(j)];
    const cplx lambda = t(k, k);
    es.phases.push_back(phase[static_cast<std::size_t>(k)]);
    es.eigenvalues.push_back(lambda);
    es.vectors.col(j) = q.col(k);
    es.residuals.push_back((u * q.col(k) - lambda * q.col(k)).norm());
  }
  return es;
}

inline EigenSystem eigendecompose(const StepUnitary& u) { return eigendecompose(u.entries); }

/// Monic characteristic polynomial det(lambda I - U), coefficients from the
/// highest degree down.
struct CharPoly {
  std::vector<cplx> coefficients;

  std::size_t degree() const { return coefficients.empty() ? 0 : coefficients.size() - 1; }

  cplx evaluate(cplx z) const {
    cplx acc = 0.0;
    for (const auto& c : coefficients) acc = acc * z + c;
    return acc;
  }

  double max_imag() const {
    double m = 0.0;
    for (const auto& c : coefficients) m = std::max(m, std::abs(c.imag()));
    return m;
  }
};

/// Faddeev-LeVerrier trace recursion: M_0 = 0, c_n = 1,
/// M_k = A M_{k-1} + c_{n-k+1} I, c_{n-k} = -tr(A M_k) / k.
/// Uses no eigenvalue information.
inline CharPoly characteristic_polynomial(const Matrix& a) {
  if (a.rows() != a.cols()) throw Error(ErrorKind::DimensionMismatch, "matrix is not square");
  const auto n = a.rows();
  CharPoly poly;
  poly.coefficients.assign(static_cast<std::size_t>(n + 1), cplx{0.0, 0.0});
  poly.coefficients[0] = 1.0;
  Matrix m = Matrix::Zero(n, n);
  const Matrix id = Matrix::Identity(n, n);
  for (Eigen::Index k = 1; k <= n; ++k) {
    m = a * m + poly.coefficients[static_cast<std::size_t>(k - 1)] * id;
    poly.coefficients[static_cast<std::size_t>(k)] = -(a * m).trace() / static_cast<double>(k);
  }
  return poly;
}

inline CharPoly characteristic_polynomial(const StepUnitary& u) {
  return characteristic_polynomial(u.entries);
}

/// Cluster labels (0-based, in phase order) under single linkage on the
/// circle: consecutive sorted phases closer than `tol` share a label, and the
/// last cluster merges with the first across the -pi/pi cut.
inline std::vector<int> cluster_labels(const EigenSystem& es, double tol = kDegeneracyTolerance) {
  const std::size_t n = es.size();
  std::vector<int> labels(n, 0);
  if (n == 0) return labels;
  int label = 0;
  for (std::size_t k = 1; k < n; ++k) {
    if (es.phases[k] - es.phases[k - 1] > tol) ++label;
    labels[k] = label;
  }
  const double wrap_gap = kTwoPi - (es.phases.back() - es.phases.front());
  if (label > 0 && wrap_gap <= tol) {
    for (auto& l : labels)
      if (l == label) l = 0;
  }
  return labels;
}

inline int distinct_count(const EigenSystem& es, double tol = kDegeneracyTolerance) {
  if (!(tol > 0.0)) throw Error(ErrorKind::InvalidArgument, "cluster tolerance must be positive");
  const auto labels = cluster_labels(es, tol);
  return labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;
}

struct PositivePhase {
  double theta = 0.0;
  Vector vector;                // first eigenvector of the theta_S eigenspace
  std::vector<double> density;  // eigenspace-averaged site density
  int multiplicity = 1;
};

/// Smallest eigenphase above `threshold` (theta_S). When several phases sit
/// within `gap` of it the density is taken from the normalised projector onto
/// that eigenspace, which is basis independent.
inline PositivePhase smallest_positive_phase(const EigenSystem& es,
                                             double threshold = kPositivePhaseThreshold,
                                             double gap = kDegeneracyTolerance) {
  std::size_t first = es.size();
  for (std::size_t k = 0; k < es.size(); ++k) {
    if (es.phases[k] > threshold) {
      first = k;
      break;
    }
  }
  if (first == es.size()) throw Error(ErrorKind::NoPositivePhase, "no eigenphase above threshold");

  std::size_t last = first;
  while (last + 1 < es.size() && es.phases[last + 1] - es.phases[last] < gap) ++last;

  PositivePhase res;
  res.theta = es.phases[first];
  res.vector = es.vectors.col(static_cast<Eigen::Index>(first));
  res.multiplicity = static_cast<int>(last - first + 1);
  const auto n_sites = static_cast<std::size_t>(es.vectors.rows() / 2);
  res.density.assign(n_sites, 0.0);
  for (std::size_t k = first; k <= last; ++k) {
    const auto col = es.vectors.col(static_cast<Eigen::Index>(k));
    const double n2 = col.squaredNorm();
    for (std::size_t q = 0; q < n_sites; ++q)
      res.density[q] += (std::norm(col(static_cast<Eigen::Index>(2 * q))) +
                         std::norm(col(static_cast<Eigen::Index>(2 * q + 1)))) / n2;
  }
  for (auto& r : res.density) r /= static_cast<double>(res.multiplicity);
  return res;
}

/// Symmetric Hausdorff distance between two phase sets, measured on the circle.
inline double spectrum_distance(std::span<const double> a, std::span<const double> b) {
  auto one_way = [](std::span<const double> x, std::span<const double> y) {
    double worst = 0.0;
    for (double px : x) {
      double best = kTwoPi;
      for (double py : y) best = std::min(best, std::abs(principal_angle(px - py)));
      worst = std::max(worst, best);
    }
    return worst;
  };
  return std::max(one_way(a, b), one_way(b, a));
}

/// Checks that p_bar -> p_bar + 2 pi k / N together with the cyclic relabelling
/// Phi_q -> Phi_{q+k} (the new spinor at q is the old one at q - k) maps the
/// eigensystem of U(p_bar) onto that of U(p_bar + shift). Returns the larger
/// of the spectral distance and the worst eigenvector residual
/// ||U(p_bar + shift) v' - lambda v'||.
inline double translation_covariance_check(const PhysParams& params, double p_bar, double shift) {
  if (!params.flux_denominator())
    throw Error(ErrorKind::MissingFlux, "translation covariance needs a rational flux");
  const int n = *params.flux_denominator();
  const double k_real = shift * n / kTwoPi;
  const long k = std::lround(k_real);
  if (std::abs(k_real - static_cast<double>(k)) > 1e-9)
    throw Error(ErrorKind::InvalidArgument, "shift must be a multiple of 2 pi / N");

  const auto u0 = build_step_unitary(params, Momentum::reduced(p_bar, params));
  const auto u1 = build_step_unitary(params, Momentum::reduced(p_bar + shift, params));
  const auto es0 = eigendecompose(u0);
  const auto es1 = eigendecompose(u1);
  double worst = spectrum_distance(es0.phases, es1.phases);

  const auto sites = static_cast<long>(n);
  Vector moved(u0.dim());
  for (std::size_t j = 0; j < es0.size(); ++j) {
    const auto v = es0.vectors.col(static_cast<Eigen::Index>(j));
    for (long q = 0; q < sites; ++q) {
      const long src = ((q - k) % sites + sites) % sites;
      moved(2 * q) = v(2 * src);
      moved(2 * q + 1) = v(2 * src + 1);
    }
    const double res = (u1.entries * moved - es0.eigenvalues[j] * moved).norm();
    worst = std::max(worst, res);
  }
  return worst;
}

}  // namespace mqw
