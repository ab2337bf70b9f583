#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <initializer_list>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>

#include <Eigen/Dense>

namespace conical {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
public:
  using Error::Error;
};

class SchemaError : public Error {
public:
  using Error::Error;
};

class SymmetryError : public Error {
public:
  using Error::Error;
};

class EigenError : public Error {
public:
  using Error::Error;
};

class ModeError : public Error {
public:
  using Error::Error;
};

/// A point r = (x, y, ...) in parameter space.
class ParameterPoint {
public:
  ParameterPoint() = default;
  explicit ParameterPoint(RVector coords) : coords_(std::move(coords)) {}
  ParameterPoint(std::initializer_list<double> coords) : coords_(static_cast<Eigen::Index>(coords.size())) {
    Eigen::Index i = 0;
    for (double c : coords) coords_[i++] = c;
  }

  std::size_t size() const { return static_cast<std::size_t>(coords_.size()); }
  double operator[](std::size_t i) const { return coords_[static_cast<Eigen::Index>(i)]; }
  double& operator[](std::size_t i) { return coords_[static_cast<Eigen::Index>(i)]; }

  const RVector& coords() const { return coords_; }

  bool finite() const { return coords_.allFinite(); }

  double distance(const ParameterPoint& other) const { return (coords_ - other.coords_).norm(); }

  ParameterPoint shifted(std::size_t axis, double h) const {
    ParameterPoint p = *this;
    p[axis] += h;
    return p;
  }

  friend ParameterPoint operator-(const ParameterPoint& p, const RVector& step) {
    return ParameterPoint(RVector(p.coords_ - step));
  }
  friend ParameterPoint operator+(const ParameterPoint& p, const RVector& step) {
    return ParameterPoint(RVector(p.coords_ + step));
  }
  friend bool operator==(const ParameterPoint& a, const ParameterPoint& b) {
    return a.coords_.size() == b.coords_.size() && a.coords_ == b.coords_;
  }

private:
  RVector coords_;
};

enum class SymmetryClass { RealSymmetric, Hermitian, InversionSymmetricHermitian };

inline std::string_view to_string(SymmetryClass s) {
  switch (s) {
    case SymmetryClass::RealSymmetric: return "RealSymmetric";
    case SymmetryClass::Hermitian: return "Hermitian";
    case SymmetryClass::InversionSymmetricHermitian: return "InversionSymmetricHermitian";
  }
  return "?";
}

inline SymmetryClass symmetry_from_string(std::string_view s) {
  if (s == "RealSymmetric") return SymmetryClass::RealSymmetric;
  if (s == "Hermitian") return SymmetryClass::Hermitian;
  if (s == "InversionSymmetricHermitian") return SymmetryClass::InversionSymmetricHermitian;
  throw SchemaError("unknown symmetry class '" + std::string(s) + "'");
}

inline constexpr double kMachineEps = std::numeric_limits<double>::epsilon();

inline double nan() { return std::numeric_limits<double>::quiet_NaN(); }

}  // namespace conical
