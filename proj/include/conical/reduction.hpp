#pragma once

#include <algorithm>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "conical/family.hpp"

namespace conical {

/// Ascending eigenvalues with paired orthonormal eigenvectors at a point.
///
/// Each eigenvector is normalized so that its largest-magnitude component is
/// real and positive (first index wins ties).
struct EigenSystem {
  RVector values;
  CMatrix vectors;
  ParameterPoint point;

  std::size_t size() const { return static_cast<std::size_t>(values.size()); }
  double scale() const { return 1.0 + values.cwiseAbs().maxCoeff(); }
};

namespace detail {

template <typename Vec>
void fix_phase(Vec&& v) {
  Eigen::Index best = 0;
  double mag = -1.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double a = std::abs(v[i]);
    if (a > mag) {
      mag = a;
      best = i;
    }
  }
  if (mag <= 0.0) return;
  v *= std::conj(v[best]) / mag;
  v[best] = mag;
}

}  // namespace detail

inline EigenSystem eigensystem(const MatrixFamily& family, const ParameterPoint& r) {
  const CMatrix a = family.evaluate(r);
  if (!a.allFinite()) throw EigenError("matrix has non-finite entries at the requested point");
  EigenSystem es;
  es.point = r;
  if (family.symmetry() == SymmetryClass::RealSymmetric) {
    Eigen::SelfAdjointEigenSolver<RMatrix> solver(a.real());
    if (solver.info() != Eigen::Success) throw EigenError("symmetric eigensolver failed");
    es.values = solver.eigenvalues();
    es.vectors = solver.eigenvectors().cast<Complex>();
  } else {
    Eigen::SelfAdjointEigenSolver<CMatrix> solver(a);
    if (solver.info() != Eigen::Success) throw EigenError("Hermitian eigensolver failed");
    es.values = solver.eigenvalues();
    es.vectors = solver.eigenvectors();
  }
  if (!es.values.allFinite() || !es.vectors.allFinite()) throw EigenError("eigensolver produced non-finite output");
  for (Eigen::Index j = 0; j < es.vectors.cols(); ++j) detail::fix_phase(es.vectors.col(j));
  return es;
}

enum class ModeTag { Double2D, HermitianDouble3D, InversionSymmetric2D, Triple5D };

inline std::string_view to_string(ModeTag m) {
  switch (m) {
    case ModeTag::Double2D: return "Double2D";
    case ModeTag::HermitianDouble3D: return "HermitianDouble3D";
    case ModeTag::InversionSymmetric2D: return "InversionSymmetric2D";
    case ModeTag::Triple5D: return "Triple5D";
  }
  return "?";
}

inline ModeTag mode_from_string(std::string_view s) {
  if (s == "Double2D") return ModeTag::Double2D;
  if (s == "HermitianDouble3D") return ModeTag::HermitianDouble3D;
  if (s == "InversionSymmetric2D") return ModeTag::InversionSymmetric2D;
  if (s == "Triple5D") return ModeTag::Triple5D;
  throw ModeError("unknown multiplicity mode '" + std::string(s) + "'");
}

/// Which multiplicity is sought, and between which eigenvalues.
/// `pair_index` is the 1-based index k of the lowest eigenvalue of the
/// coalescing group; unset means "the tightest group at the evaluation point".
struct MultiplicityMode {
  ModeTag tag = ModeTag::Double2D;
  std::optional<std::size_t> pair_index;

  std::size_t group_size() const { return tag == ModeTag::Triple5D ? 3 : 2; }

  std::size_t parameter_dimension() const {
    switch (tag) {
      case ModeTag::Double2D:
      case ModeTag::InversionSymmetric2D: return 2;
      case ModeTag::HermitianDouble3D: return 3;
      case ModeTag::Triple5D: return 5;
    }
    return 0;
  }

  MultiplicityMode with_pair(std::size_t k) const { return {tag, k}; }
};

/// Picks a sensible mode for a family: Triple5D for d=5, HermitianDouble3D for
/// d=3, InversionSymmetric2D for inversion-symmetric families, else Double2D.
inline MultiplicityMode default_mode(const MatrixFamily& family) {
  if (family.d() == 5) return {ModeTag::Triple5D, std::nullopt};
  if (family.d() == 3) return {ModeTag::HermitianDouble3D, std::nullopt};
  if (family.symmetry() == SymmetryClass::InversionSymmetricHermitian)
    return {ModeTag::InversionSymmetric2D, std::nullopt};
  return {ModeTag::Double2D, std::nullopt};
}

inline void check_compatible(const MatrixFamily& family, const MultiplicityMode& mode) {
  if (family.d() != mode.parameter_dimension())
    throw ModeError("mode " + std::string(to_string(mode.tag)) + " needs " +
                    std::to_string(mode.parameter_dimension()) + " parameters, family '" + family.name() + "' has " +
                    std::to_string(family.d()));
  if (mode.tag == ModeTag::Triple5D && family.symmetry() != SymmetryClass::RealSymmetric)
    throw ModeError("Triple5D requires a real symmetric family");
  if (mode.tag == ModeTag::InversionSymmetric2D && family.symmetry() != SymmetryClass::InversionSymmetricHermitian)
    throw ModeError("InversionSymmetric2D requires an inversion-symmetric Hermitian family");
  if (family.n() < mode.group_size()) throw ModeError("matrix is smaller than the multiplicity group");
}

/// Resolves the 1-based index of the first eigenvalue of the group.
inline std::size_t resolve_pair_index(const EigenSystem& es, const MultiplicityMode& mode) {
  const std::size_t g = mode.group_size();
  const std::size_t n = es.size();
  if (mode.pair_index) {
    const std::size_t k = *mode.pair_index;
    if (k < 1 || k + g - 1 > n)
      throw ModeError("pair index " + std::to_string(k) + " out of range for n=" + std::to_string(n));
    return k;
  }
  std::size_t best = 1;
  double spread = std::numeric_limits<double>::infinity();
  for (std::size_t k = 1; k + g - 1 <= n; ++k) {
    const double s = es.values[static_cast<Eigen::Index>(k + g - 2)] - es.values[static_cast<Eigen::Index>(k - 1)];
    if (s < spread) {
      spread = s;
      best = k;
    }
  }
  return best;
}

/// Objective F and Jacobian J of the fixed-eigenbasis reduction at a point.
///
/// Row order of F and J:
///   Double2D              (A11 − A22, 2 A12)
///   InversionSymmetric2D  (A11 − A22, 2 Im A12)
///   HermitianDouble3D     (A11 − A22, 2 Re A12, 2 Im A12)
///   Triple5D              (A11 − A22, A22 − A33, 2 A12, 2 A13, 2 A23)
/// where A_ij = <v_i, A v_j> with the group eigenvectors frozen at the point.
/// At the point itself the reduced block is diagonal, so every entry of F past
/// the gap slots is exactly zero.
struct ReducedSystem {
  RVector objective;
  RMatrix jacobian;
  std::vector<double> gaps;  // λ_{k+1} − λ_k [, λ_{k+2} − λ_{k+1}]
  double det_j = 0.0;
  double conditioning = 0.0;  // σ_min / σ_max of J
  std::size_t pair_index = 1;
  double isolation = std::numeric_limits<double>::infinity();  // distance from the group to the rest of the spectrum
  bool group_isolated = true;
  EigenSystem eigen;

  double max_gap() const { return *std::max_element(gaps.begin(), gaps.end()); }
  double scale() const { return eigen.scale(); }
};

namespace detail {

// Off-diagonal derivative rows c_a = 2<v1, ∂_a A v2> are complex. Their phase
// depends on the eigenvector gauge; the row kept is the projection onto the
// dominant real direction of (Re c, Im c), which is gauge independent. For a
// real family this is exactly 2 ∂_a A12; for an inversion-symmetric family it
// is 2 ∂_a Im A12 in the gauge where the real part's derivative vanishes.
inline RVector dominant_real_row(const Eigen::VectorXcd& c) {
  const RVector re = c.real();
  const RVector im = c.imag();
  if (im.squaredNorm() == 0.0) return re;
  Eigen::Matrix2d m;
  m << re.squaredNorm(), re.dot(im), re.dot(im), im.squaredNorm();
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> solver(m);
  const Eigen::Vector2d u = solver.eigenvectors().col(1);
  RVector row = u[0] * re + u[1] * im;
  // The direction is gauge independent only up to sign; fix it from the row itself.
  Eigen::Index k = 0;
  row.cwiseAbs().maxCoeff(&k);
  if (row[k] < 0) row = -row;
  return row;
}

}  // namespace detail

inline double singular_ratio(const RMatrix& j) {
  Eigen::JacobiSVD<RMatrix> svd(j);
  const auto& s = svd.singularValues();
  const double smax = s[0];
  if (!(smax > 0.0)) return 0.0;
  return s[s.size() - 1] / smax;
}

/// Builds F and J at r from the eigenvectors of A(r).
inline ReducedSystem reduce_at(const MatrixFamily& family, const EigenSystem& es, const MultiplicityMode& mode) {
  check_compatible(family, mode);
  const ParameterPoint& r = es.point;
  const std::size_t g = mode.group_size();
  const std::size_t d = family.d();
  const std::size_t n = family.n();
  const std::size_t k = resolve_pair_index(es, mode);
  const auto k0 = static_cast<Eigen::Index>(k - 1);
  const auto di = static_cast<Eigen::Index>(d);

  ReducedSystem rs;
  rs.pair_index = k;
  rs.eigen = es;
  const CMatrix v = es.vectors.middleCols(k0, static_cast<Eigen::Index>(g));
  for (std::size_t i = 0; i + 1 < g; ++i)
    rs.gaps.push_back(es.values[k0 + static_cast<Eigen::Index>(i) + 1] - es.values[k0 + static_cast<Eigen::Index>(i)]);

  if (k > 1) rs.isolation = es.values[k0] - es.values[k0 - 1];
  if (k + g - 1 < n)
    rs.isolation = std::min(rs.isolation, es.values[k0 + static_cast<Eigen::Index>(g)] -
                                              es.values[k0 + static_cast<Eigen::Index>(g) - 1]);
  rs.group_isolated = rs.isolation > 1e-8 * es.scale();

  // D_a = V* ∂_a A V, one g×g block per axis.
  std::vector<CMatrix> blocks;
  blocks.reserve(d);
  for (std::size_t a = 0; a < d; ++a) blocks.push_back(v.adjoint() * family.derivative(r, a) * v);

  rs.objective = RVector::Zero(di);
  rs.jacobian = RMatrix::Zero(di, di);
  rs.objective[0] = -rs.gaps[0];
  for (std::size_t a = 0; a < d; ++a) {
    const auto ai = static_cast<Eigen::Index>(a);
    rs.jacobian(0, ai) = (blocks[a](0, 0) - blocks[a](1, 1)).real();
  }

  switch (mode.tag) {
    case ModeTag::Double2D:
    case ModeTag::InversionSymmetric2D: {
      Eigen::VectorXcd c(di);
      for (std::size_t a = 0; a < d; ++a) c[static_cast<Eigen::Index>(a)] = 2.0 * blocks[a](0, 1);
      rs.jacobian.row(1) = detail::dominant_real_row(c).transpose();
      break;
    }
    case ModeTag::HermitianDouble3D:
      for (std::size_t a = 0; a < d; ++a) {
        const auto ai = static_cast<Eigen::Index>(a);
        rs.jacobian(1, ai) = 2.0 * blocks[a](0, 1).real();
        rs.jacobian(2, ai) = 2.0 * blocks[a](0, 1).imag();
      }
      break;
    case ModeTag::Triple5D:
      rs.objective[1] = -rs.gaps[1];
      for (std::size_t a = 0; a < d; ++a) {
        const auto ai = static_cast<Eigen::Index>(a);
        const CMatrix& b = blocks[a];
        rs.jacobian(1, ai) = (b(1, 1) - b(2, 2)).real();
        rs.jacobian(2, ai) = 2.0 * b(0, 1).real();
        rs.jacobian(3, ai) = 2.0 * b(0, 2).real();
        rs.jacobian(4, ai) = 2.0 * b(1, 2).real();
      }
      break;
  }
  rs.det_j = rs.jacobian.determinant();
  rs.conditioning = singular_ratio(rs.jacobian);
  return rs;
}

inline ReducedSystem reduce(const MatrixFamily& family, const ParameterPoint& r, const MultiplicityMode& mode) {
  check_compatible(family, mode);
  return reduce_at(family, eigensystem(family, r), mode);
}

/// Ã^p(r) = V_g* A(r) V_g with V_g the group eigenvectors of A(p).
inline CMatrix reduced_block(const MatrixFamily& family, const ParameterPoint& p, const ParameterPoint& r,
                             const MultiplicityMode& mode) {
  check_compatible(family, mode);
  const EigenSystem es = eigensystem(family, p);
  const std::size_t k = resolve_pair_index(es, mode);
  const CMatrix v = es.vectors.middleCols(static_cast<Eigen::Index>(k - 1), static_cast<Eigen::Index>(mode.group_size()));
  return v.adjoint() * family.evaluate(r) * v;
}

}  // namespace conical
