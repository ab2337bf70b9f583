#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "conical/types.hpp"

namespace conical {

enum class TermKind { Constant, Cos, Sin, Cis, Monomial };

inline std::string_view to_string(TermKind k) {
  switch (k) {
    case TermKind::Constant: return "constant";
    case TermKind::Cos: return "cos";
    case TermKind::Sin: return "sin";
    case TermKind::Cis: return "cis";
    case TermKind::Monomial: return "monomial";
  }
  return "?";
}

inline TermKind term_kind_from_string(std::string_view s) {
  if (s == "constant") return TermKind::Constant;
  if (s == "cos") return TermKind::Cos;
  if (s == "sin") return TermKind::Sin;
  if (s == "cis") return TermKind::Cis;
  if (s == "monomial") return TermKind::Monomial;
  throw SchemaError("unknown term kind '" + std::string(s) + "'");
}

/// One additive contribution to the upper triangle of A(r).
///
/// Indices are zero-based and row <= col; the lower-triangle partner is the
/// conjugate (Hermitian classes) or the same value (real class). The scalar
/// function is selected by `kind`:
///   constant  c
///   cos       c cos(<m, r> + phase)
///   sin       c sin(<m, r> + phase)
///   cis       c exp(i (<m, r> + phase))
///   monomial  c prod_i r_i^e_i
struct TermSpec {
  std::size_t row = 0;
  std::size_t col = 0;
  Complex coefficient{0.0, 0.0};
  TermKind kind = TermKind::Constant;
  std::vector<int> wavevector;
  double phase = 0.0;
  std::vector<unsigned> exponents;

  friend bool operator==(const TermSpec&, const TermSpec&) = default;
};

namespace detail {

inline double phase_angle(const TermSpec& t, const ParameterPoint& r) {
  double theta = t.phase;
  for (std::size_t i = 0; i < t.wavevector.size(); ++i) theta += t.wavevector[i] * r[i];
  return theta;
}

inline double monomial_value(const std::vector<unsigned>& exps, const ParameterPoint& r,
                             std::optional<std::size_t> skip = std::nullopt) {
  double v = 1.0;
  for (std::size_t i = 0; i < exps.size(); ++i) {
    if (skip && *skip == i) continue;
    for (unsigned e = 0; e < exps[i]; ++e) v *= r[i];
  }
  return v;
}

inline Complex term_value(const TermSpec& t, const ParameterPoint& r) {
  switch (t.kind) {
    case TermKind::Constant: return t.coefficient;
    case TermKind::Cos: return t.coefficient * std::cos(phase_angle(t, r));
    case TermKind::Sin: return t.coefficient * std::sin(phase_angle(t, r));
    case TermKind::Cis: return t.coefficient * std::polar(1.0, phase_angle(t, r));
    case TermKind::Monomial: return t.coefficient * monomial_value(t.exponents, r);
  }
  return {};
}

inline Complex term_partial(const TermSpec& t, const ParameterPoint& r, std::size_t axis) {
  switch (t.kind) {
    case TermKind::Constant: return {};
    case TermKind::Cos: {
      const int m = t.wavevector[axis];
      if (m == 0) return {};
      return -t.coefficient * static_cast<double>(m) * std::sin(phase_angle(t, r));
    }
    case TermKind::Sin: {
      const int m = t.wavevector[axis];
      if (m == 0) return {};
      return t.coefficient * static_cast<double>(m) * std::cos(phase_angle(t, r));
    }
    case TermKind::Cis: {
      const int m = t.wavevector[axis];
      if (m == 0) return {};
      return t.coefficient * Complex(0.0, static_cast<double>(m)) * std::polar(1.0, phase_angle(t, r));
    }
    case TermKind::Monomial: {
      const unsigned e = t.exponents[axis];
      if (e == 0) return {};
      double lead = static_cast<double>(e);
      for (unsigned k = 1; k < e; ++k) lead *= r[axis];
      return t.coefficient * lead * monomial_value(t.exponents, r, axis);
    }
  }
  return {};
}

inline void scatter(CMatrix& a, const TermSpec& t, Complex v) {
  const auto i = static_cast<Eigen::Index>(t.row);
  const auto j = static_cast<Eigen::Index>(t.col);
  if (i == j) {
    a(i, i) += v;
  } else {
    a(i, j) += v;
    a(j, i) += std::conj(v);
  }
}

}  // namespace detail

/// ‖A − A*‖_F, the Hermiticity defect of a square matrix.
inline double hermitian_defect(const CMatrix& a) { return (a - a.adjoint()).norm(); }

/// A smooth parametric matrix family r ↦ A(r) ∈ C^{n×n}.
///
/// Either a list of analytic terms (exact derivatives by term calculus) or a
/// pair of callbacks. Callback families are the caller's responsibility as to
/// smoothness; without a derivative callback, derivatives fall back to central
/// differences unless that is disabled.
class MatrixFamily {
public:
  using Evaluator = std::function<CMatrix(const ParameterPoint&)>;
  using DerivativeEvaluator = std::function<CMatrix(const ParameterPoint&, std::size_t)>;

  static MatrixFamily from_terms(std::size_t n, std::size_t d, SymmetryClass symmetry, std::vector<TermSpec> terms,
                                 std::string name = {}) {
    MatrixFamily f(n, d, symmetry, std::move(name));
    for (auto& t : terms) {
      if (t.wavevector.empty()) t.wavevector.assign(d, 0);
      if (t.exponents.empty()) t.exponents.assign(d, 0u);
    }
    f.terms_ = std::make_shared<const std::vector<TermSpec>>(std::move(terms));
    f.validate_terms();
    if (symmetry == SymmetryClass::InversionSymmetricHermitian) f.check_inversion_symmetry();
    return f;
  }

  static MatrixFamily from_callback(std::size_t n, std::size_t d, SymmetryClass symmetry, Evaluator evaluator,
                                    DerivativeEvaluator derivative = {}, std::string name = {},
                                    bool allow_finite_difference = true) {
    if (!evaluator) throw Error("callback family requires an evaluator");
    MatrixFamily f(n, d, symmetry, std::move(name));
    f.evaluator_ = std::make_shared<const Evaluator>(std::move(evaluator));
    if (derivative) f.derivative_ = std::make_shared<const DerivativeEvaluator>(std::move(derivative));
    f.allow_fd_ = allow_finite_difference;
    return f;
  }

  std::size_t n() const { return n_; }
  std::size_t d() const { return d_; }
  SymmetryClass symmetry() const { return symmetry_; }
  const std::string& name() const { return name_; }

  bool term_based() const { return static_cast<bool>(terms_); }
  const std::vector<TermSpec>& terms() const {
    if (!terms_) throw Error("family '" + name_ + "' is callback-based and has no term list");
    return *terms_;
  }
  bool has_analytic_derivatives() const { return terms_ || derivative_; }
  bool allows_finite_difference() const { return allow_fd_; }

  CMatrix evaluate(const ParameterPoint& r) const {
    check_point(r);
    CMatrix a = CMatrix::Zero(static_cast<Eigen::Index>(n_), static_cast<Eigen::Index>(n_));
    if (terms_) {
      for (const auto& t : *terms_) detail::scatter(a, t, detail::term_value(t, r));
      return a;
    }
    a = (*evaluator_)(r);
    check_callback_output(a, "evaluator");
    return a;
  }

  /// Exact ∂A/∂r_axis. Falls back to central differences for callback
  /// families without a derivative evaluator when that is permitted.
  CMatrix derivative(const ParameterPoint& r, std::size_t axis) const {
    check_point(r);
    check_axis(axis);
    if (terms_) {
      CMatrix a = CMatrix::Zero(static_cast<Eigen::Index>(n_), static_cast<Eigen::Index>(n_));
      for (const auto& t : *terms_) detail::scatter(a, t, detail::term_partial(t, r, axis));
      return a;
    }
    if (derivative_) {
      CMatrix a = (*derivative_)(r, axis);
      check_callback_output(a, "derivative evaluator");
      return a;
    }
    if (!allow_fd_) throw Error("family '" + name_ + "' has no analytic derivative and finite differences are disabled");
    return fd_derivative(r, axis);
  }

  static double default_fd_step(double coordinate) { return std::cbrt(kMachineEps) * (1.0 + std::abs(coordinate)); }

  /// Central difference (A(r + h e_axis) − A(r − h e_axis)) / 2h.
  CMatrix fd_derivative(const ParameterPoint& r, std::size_t axis, std::optional<double> h = std::nullopt) const {
    check_point(r);
    check_axis(axis);
    const double step = h.value_or(default_fd_step(r[axis]));
    if (!(step > 0.0)) throw Error("finite-difference step must be positive");
    return (evaluate(r.shifted(axis, step)) - evaluate(r.shifted(axis, -step))) / (2.0 * step);
  }

private:
  MatrixFamily(std::size_t n, std::size_t d, SymmetryClass symmetry, std::string name)
      : n_(n), d_(d), symmetry_(symmetry), name_(std::move(name)) {
    if (n_ == 0) throw SchemaError("matrix dimension must be positive");
    if (d_ == 0) throw SchemaError("parameter dimension must be positive");
  }

  void check_point(const ParameterPoint& r) const {
    if (r.size() != d_)
      throw DimensionError("parameter point has length " + std::to_string(r.size()) + ", family '" + name_ +
                           "' expects " + std::to_string(d_));
  }

  void check_axis(std::size_t axis) const {
    if (axis >= d_) throw DimensionError("derivative axis " + std::to_string(axis) + " out of range");
  }

  void check_callback_output(const CMatrix& a, const char* what) const {
    if (a.rows() != static_cast<Eigen::Index>(n_) || a.cols() != static_cast<Eigen::Index>(n_))
      throw DimensionError(std::string(what) + " returned a matrix of the wrong size");
    if (!a.allFinite()) throw Error(std::string(what) + " returned non-finite entries");
    if (hermitian_defect(a) > 1e-12 * (1.0 + a.norm()))
      throw SymmetryError(std::string(what) + " of family '" + name_ + "' returned a non-Hermitian matrix");
    if (symmetry_ == SymmetryClass::RealSymmetric && a.imag().norm() > 1e-12 * (1.0 + a.norm()))
      throw SymmetryError(std::string(what) + " of real family '" + name_ + "' returned complex entries");
  }

  void validate_terms() const {
    const bool real = symmetry_ == SymmetryClass::RealSymmetric;
    for (std::size_t k = 0; k < terms_->size(); ++k) {
      const auto& t = (*terms_)[k];
      const std::string where = "term " + std::to_string(k) + ": ";
      if (t.row >= n_ || t.col >= n_) throw SchemaError(where + "index out of range");
      if (t.row > t.col) throw SchemaError(where + "terms must address the upper triangle (row <= col)");
      if (t.wavevector.size() != d_) throw SchemaError(where + "wavevector length must equal d");
      if (t.exponents.size() != d_) throw SchemaError(where + "exponents length must equal d");
      if (!std::isfinite(t.coefficient.real()) || !std::isfinite(t.coefficient.imag()) || !std::isfinite(t.phase))
        throw SchemaError(where + "non-finite coefficient or phase");
      if (real) {
        if (t.kind == TermKind::Cis) throw SymmetryError(where + "cis terms are not allowed in a real symmetric family");
        if (t.coefficient.imag() != 0.0)
          throw SymmetryError(where + "complex coefficient in a real symmetric family");
      }
      if (t.row == t.col) {
        if (t.kind == TermKind::Cis) throw SymmetryError(where + "cis term on the diagonal is not real-valued");
        if (t.coefficient.imag() != 0.0) throw SymmetryError(where + "diagonal term with imaginary coefficient");
      }
    }
  }

  void check_inversion_symmetry() const {
    // conj(A(−r)) = A(r) at a fixed set of probe points.
    for (int s = 1; s <= 7; ++s) {
      RVector c(static_cast<Eigen::Index>(d_));
      for (std::size_t i = 0; i < d_; ++i) c[static_cast<Eigen::Index>(i)] = std::sin(1.7 * s + 2.3 * i) * 3.0;
      const ParameterPoint r(c);
      const ParameterPoint mr(RVector(-c));
      const CMatrix a = evaluate(r);
      if ((evaluate(mr).conjugate() - a).norm() > 1e-12 * (1.0 + a.norm()))
        throw SymmetryError("family '" + name_ + "' violates conj(A(-r)) = A(r)");
    }
  }

  std::size_t n_ = 0;
  std::size_t d_ = 0;
  SymmetryClass symmetry_ = SymmetryClass::RealSymmetric;
  std::string name_;
  std::shared_ptr<const std::vector<TermSpec>> terms_;
  std::shared_ptr<const Evaluator> evaluator_;
  std::shared_ptr<const DerivativeEvaluator> derivative_;
  bool allow_fd_ = true;
};

}  // namespace conical
