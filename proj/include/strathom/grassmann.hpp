#pragma once

// Linear subspaces of R^n held as orthonormal bases. Subspaces are compared
// only through principal angles; the basis matrix is never canonical.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "strathom/error.hpp"

namespace strathom {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Relative singular-value cutoff for numerical rank.
inline constexpr double kRankTol = 1e-8;
/// Default containment tolerance, radians.
inline constexpr double kAngleTol = 1e-6;

class Subspace {
 public:
  Subspace() = default;

  /// Takes `basis` as already column-orthonormal.
  static Subspace from_orthonormal(MatrixXd basis) {
    Subspace s;
    s.basis_ = std::move(basis);
    return s;
  }

  static Subspace zero(Index n) { return from_orthonormal(MatrixXd(n, 0)); }
  static Subspace full(Index n) { return from_orthonormal(MatrixXd::Identity(n, n)); }

  Index ambient_dim() const { return basis_.rows(); }
  Index dim() const { return basis_.cols(); }
  const MatrixXd& basis() const { return basis_; }

  MatrixXd projector() const { return basis_ * basis_.transpose(); }

  /// Max |B^T B - I| entry.
  double orthonormality_error() const {
    if (dim() == 0) return 0.0;
    return (basis_.transpose() * basis_ - MatrixXd::Identity(dim(), dim())).cwiseAbs().maxCoeff();
  }

 private:
  MatrixXd basis_ = MatrixXd(0, 0);
};

inline void require_same_ambient(const Subspace& a, const Subspace& b) {
  if (a.ambient_dim() != b.ambient_dim())
    throw DimensionError("subspaces live in R^" + std::to_string(a.ambient_dim()) + " and R^" +
                         std::to_string(b.ambient_dim()));
}

namespace detail {

inline Index rank_from_singular_values(const VectorXd& sv, double tol) {
  if (sv.size() == 0) return 0;
  const double smax = sv(0);
  if (!(smax > 0.0)) return 0;
  Index r = 0;
  for (Index i = 0; i < sv.size(); ++i)
    if (sv(i) > tol * smax) ++r;
  return r;
}

}  // namespace detail

inline Index numerical_rank(const MatrixXd& m, double tol = kRankTol) {
  if (m.size() == 0) return 0;
  Eigen::JacobiSVD<MatrixXd> svd(m);
  return detail::rank_from_singular_values(svd.singularValues(), tol);
}

/// Orthonormal basis of the column span; dimension is the numerical rank.
inline Subspace span_of(const MatrixXd& columns, double tol = kRankTol) {
  const Index n = columns.rows();
  if (columns.cols() == 0) return Subspace::zero(n);
  Eigen::JacobiSVD<MatrixXd> svd(columns, Eigen::ComputeThinU);
  const Index r = detail::rank_from_singular_values(svd.singularValues(), tol);
  return Subspace::from_orthonormal(svd.matrixU().leftCols(r));
}

inline Subspace span_of(const std::vector<VectorXd>& vectors, Index n, double tol = kRankTol) {
  MatrixXd m(n, static_cast<Index>(vectors.size()));
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    if (vectors[i].size() != n) throw DimensionError("span_of: vectors differ in dimension");
    m.col(static_cast<Index>(i)) = vectors[i];
  }
  return span_of(m, tol);
}

/// Principal angles in [0, pi/2], nondecreasing, min(dim A, dim B) of them.
inline std::vector<double> principal_angles(const Subspace& a, const Subspace& b) {
  require_same_ambient(a, b);
  const Subspace& large = a.dim() >= b.dim() ? a : b;
  const Subspace& small = a.dim() >= b.dim() ? b : a;
  const Index k = small.dim();
  if (k == 0) return {};
  const MatrixXd cross = large.basis().transpose() * small.basis();
  const VectorXd cosines = Eigen::JacobiSVD<MatrixXd>(cross).singularValues();
  const MatrixXd residual = small.basis() - large.basis() * cross;
  const VectorXd sines = Eigen::JacobiSVD<MatrixXd>(residual).singularValues();
  std::vector<double> angles(static_cast<std::size_t>(k));
  for (Index i = 0; i < k; ++i) {
    const double c = std::clamp(cosines(i), -1.0, 1.0);
    const double s = std::clamp(sines(k - 1 - i), 0.0, 1.0);
    angles[static_cast<std::size_t>(i)] = c * c < 0.5 ? std::acos(c) : std::asin(s);
  }
  std::sort(angles.begin(), angles.end());
  return angles;
}

/// Largest principal angle; subspaces of different dimension are pi/2 apart.
inline double grassmann_distance(const Subspace& a, const Subspace& b) {
  require_same_ambient(a, b);
  if (a.dim() != b.dim()) return std::numbers::pi / 2;
  const auto angles = principal_angles(a, b);
  return angles.empty() ? 0.0 : angles.back();
}

inline Subspace subspace_sum(const Subspace& a, const Subspace& b, double tol = kRankTol) {
  require_same_ambient(a, b);
  MatrixXd stacked(a.ambient_dim(), a.dim() + b.dim());
  stacked << a.basis(), b.basis();
  return span_of(stacked, tol);
}

/// A ∩ B from the null space of [A B]. Uses the same singular values as
/// subspace_sum, so dim(A+B) + dim(A∩B) = dim A + dim B holds exactly.
inline Subspace subspace_intersection(const Subspace& a, const Subspace& b,
                                      double tol = kRankTol) {
  require_same_ambient(a, b);
  const Index n = a.ambient_dim();
  if (a.dim() == 0 || b.dim() == 0) return Subspace::zero(n);
  MatrixXd stacked(n, a.dim() + b.dim());
  stacked << a.basis(), b.basis();
  Eigen::JacobiSVD<MatrixXd> svd(stacked, Eigen::ComputeFullV);
  const Index r = detail::rank_from_singular_values(svd.singularValues(), tol);
  const Index null_dim = stacked.cols() - r;
  if (null_dim == 0) return Subspace::zero(n);
  const MatrixXd w = a.basis() * svd.matrixV().rightCols(null_dim).topRows(a.dim());
  Eigen::JacobiSVD<MatrixXd> ortho(w, Eigen::ComputeThinU);
  return Subspace::from_orthonormal(ortho.matrixU());
}

struct Containment {
  bool holds = true;
  /// Largest angle between a vector of B and its projection onto A.
  double angle = 0.0;
  /// Unit vector of B realizing `angle` (empty when B = {0}).
  VectorXd worst;
};

/// Whether B ⊆ A within `tol` radians.
inline Containment contains(const Subspace& a, const Subspace& b, double tol = kAngleTol) {
  require_same_ambient(a, b);
  Containment out;
  if (b.dim() == 0) return out;
  const MatrixXd along = a.basis().transpose() * b.basis();
  const MatrixXd residual = b.basis() - a.basis() * along;
  Eigen::JacobiSVD<MatrixXd> svd(residual, Eigen::ComputeThinV);
  const VectorXd v = svd.matrixV().col(0);
  const double s = svd.singularValues()(0);
  const double c = (along * v).norm();
  out.angle = std::atan2(s, c);
  out.worst = b.basis() * v;
  out.worst.normalize();
  out.holds = out.angle < tol;
  return out;
}

/// Numerical null space (right singular vectors with sigma < tol * sigma_max).
inline Subspace kernel(const MatrixXd& m, double tol = kRankTol) {
  const Index n = m.cols();
  if (m.rows() == 0 || n == 0) return Subspace::full(n);
  Eigen::JacobiSVD<MatrixXd> svd(m, Eigen::ComputeFullV);
  const Index r = detail::rank_from_singular_values(svd.singularValues(), tol);
  return Subspace::from_orthonormal(svd.matrixV().rightCols(n - r));
}

/// Null space of the prescribed dimension n - rank (the `rank` smallest
/// directions are dropped regardless of their singular values).
inline Subspace kernel_of_rank(const MatrixXd& m, Index rank) {
  const Index n = m.cols();
  if (rank < 0 || rank > n) throw DimensionError("kernel_of_rank: rank out of range");
  if (rank == 0) return Subspace::full(n);
  Eigen::JacobiSVD<MatrixXd> svd(m, Eigen::ComputeFullV);
  return Subspace::from_orthonormal(svd.matrixV().rightCols(n - rank));
}

struct SubspaceSequence {
  std::vector<Subspace> items;
  /// Which approach point produced each entry.
  std::vector<std::string> provenance;

  void push(Subspace s, std::string tag = {}) {
    items.push_back(std::move(s));
    provenance.push_back(std::move(tag));
  }
};

struct LimitReport {
  bool converged = false;
  Subspace limit;
  /// Max pairwise principal angle over the trailing window.
  double residual = 0.0;
  /// Window residual ending at each index (from window-1 on).
  std::vector<double> residual_history;
  std::size_t window = 0;
  double tol = 0.0;
};

inline double window_residual(const std::vector<Subspace>& items, std::size_t end,
                              std::size_t window) {
  double worst = 0.0;
  const std::size_t begin = end + 1 - window;
  for (std::size_t i = begin; i <= end; ++i)
    for (std::size_t j = i + 1; j <= end; ++j)
      worst = std::max(worst, grassmann_distance(items[i], items[j]));
  return worst;
}

/// Grassmann limit estimate via a trailing Cauchy window.
inline LimitReport grassmann_limit(const SubspaceSequence& seq, std::size_t window = 5,
                                   double tol = 1e-3) {
  if (seq.items.empty()) throw PreconditionError("grassmann_limit: empty sequence");
  if (window < 2) window = 2;
  const Index n = seq.items.front().ambient_dim();
  const Index k = seq.items.front().dim();
  for (std::size_t i = 0; i < seq.items.size(); ++i) {
    if (seq.items[i].ambient_dim() != n || seq.items[i].dim() != k)
      throw DimensionError("subspace sequence changes dimension at index " + std::to_string(i) +
                           " (" + std::to_string(seq.items[i].dim()) + " vs " +
                           std::to_string(k) + ")");
  }
  LimitReport report;
  report.window = window;
  report.tol = tol;
  report.limit = seq.items.back();
  const std::size_t w = std::min(window, seq.items.size());
  for (std::size_t end = w - 1; end < seq.items.size(); ++end)
    report.residual_history.push_back(window_residual(seq.items, end, w));
  report.residual = report.residual_history.back();
  report.converged = seq.items.size() >= window && report.residual < tol;
  return report;
}

}  // namespace strathom
