#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "conical/family.hpp"

namespace conical {

using ParamMap = std::map<std::string, double>;

struct BuiltinInfo {
  std::string name;
  std::size_t n;
  std::size_t d;
  std::vector<std::string> required_params;
  std::vector<std::string> optional_params;
  std::string description;
};

inline const std::vector<BuiltinInfo>& builtin_catalog() {
  static const std::vector<BuiltinInfo> catalog = {
      {"paper-2x2-trig", 2, 2, {}, {}, "[[cos y sin x, 2-3sin(y-x)], [., 2cos y - sin x]]; conical points where sin(y-x) = 2/3 and the diagonals agree"},
      {"rank-one-4x4", 4, 2, {}, {}, "rank-one perturbation of diag(2cos x, 0.5+cos y, 1, 1); double eigenvalue 1 at (pi/3, pi/3)"},
      {"magnetic-graph-10x10", 10, 3, {}, {}, "magnetic Laplacian of a 10-vertex graph, fluxes x and y, extra edge weight z"},
      {"avoided-2x2", 2, 2, {"eps"}, {}, "[[x+3sin y, y+i eps], [., -x-x^2]]; conical point at 0 iff eps = 0"},
      {"graphene", 2, 2, {"p"}, {}, "[[0, -1-e^{ix}/2-p e^{iy}], [., 0]]; two Dirac points for p > 1/2, none below"},
      {"triple-5param", 3, 5, {}, {}, "5-parameter 3x3 family (v,w,x,y,z) with a triple eigenvalue 1 at the origin"},
      {"canonical-cone", 2, 2, {}, {}, "[[x, y], [y, -x]]; double eigenvalue at the origin"},
      {"linear-random", 2, 2, {"seed"}, {"n"}, "A0 + x A1 + y A2 with seeded random symmetric coefficients"},
  };
  return catalog;
}

namespace detail {

inline std::vector<int> wave(std::initializer_list<int> m) { return m; }
inline std::vector<unsigned> expo(std::initializer_list<unsigned> e) { return e; }

// 1-based helpers mirroring the way the matrices are usually written down.
inline TermSpec constant(std::size_t i, std::size_t j, Complex c) {
  TermSpec t;
  t.row = i - 1;
  t.col = j - 1;
  t.coefficient = c;
  t.kind = TermKind::Constant;
  return t;
}

inline TermSpec trig(TermKind kind, std::size_t i, std::size_t j, Complex c, std::vector<int> m, double phase = 0.0) {
  TermSpec t = constant(i, j, c);
  t.kind = kind;
  t.wavevector = std::move(m);
  t.phase = phase;
  return t;
}

inline TermSpec mono(std::size_t i, std::size_t j, double c, std::vector<unsigned> e) {
  TermSpec t = constant(i, j, c);
  t.kind = TermKind::Monomial;
  t.exponents = std::move(e);
  return t;
}

inline double take_param(const ParamMap& params, const std::string& key, const std::string& family) {
  auto it = params.find(key);
  if (it == params.end()) throw Error("builtin '" + family + "' requires parameter '" + key + "'");
  return it->second;
}

inline double uniform_pm1(std::mt19937_64& rng) {
  // mt19937_64 output is fixed by the standard; distributions are not.
  return static_cast<double>(rng() >> 11) * 0x1.0p-53 * 2.0 - 1.0;
}

}  // namespace detail

/// Builds one of the reference families by name.
inline MatrixFamily builtin(const std::string& name, const ParamMap& params = {}) {
  using namespace detail;
  const BuiltinInfo* info = nullptr;
  for (const auto& b : builtin_catalog())
    if (b.name == name) info = &b;
  if (!info) throw Error("unknown builtin family '" + name + "'");
  for (const auto& [key, value] : params) {
    bool known = false;
    for (const auto& k : info->required_params) known |= k == key;
    for (const auto& k : info->optional_params) known |= k == key;
    if (!known) throw Error("builtin '" + name + "' has no parameter '" + key + "'");
  }

  std::vector<TermSpec> t;
  if (name == "paper-2x2-trig") {
    // cos y sin x = (sin(x+y) + sin(x-y)) / 2
    t.push_back(trig(TermKind::Sin, 1, 1, 0.5, wave({1, 1})));
    t.push_back(trig(TermKind::Sin, 1, 1, 0.5, wave({1, -1})));
    t.push_back(constant(1, 2, 2.0));
    t.push_back(trig(TermKind::Sin, 1, 2, -3.0, wave({-1, 1})));
    t.push_back(trig(TermKind::Cos, 2, 2, 2.0, wave({0, 1})));
    t.push_back(trig(TermKind::Sin, 2, 2, -1.0, wave({1, 0})));
    return MatrixFamily::from_terms(2, 2, SymmetryClass::RealSymmetric, std::move(t), name);
  }
  if (name == "rank-one-4x4") {
    t.push_back(trig(TermKind::Cos, 1, 1, 2.0, wave({1, 0})));
    t.push_back(constant(2, 2, 0.5));
    t.push_back(trig(TermKind::Cos, 2, 2, 1.0, wave({0, 1})));
    t.push_back(constant(3, 3, 1.0));
    t.push_back(constant(4, 4, 1.0));
    for (std::size_t i = 1; i <= 3; ++i) t.push_back(constant(i, 4, 1.0));
    return MatrixFamily::from_terms(4, 2, SymmetryClass::RealSymmetric, std::move(t), name);
  }
  if (name == "magnetic-graph-10x10") {
    const double diag[10] = {1, 3, 2, 3, 3, 3, 3, 2, 3, 1};
    for (std::size_t i = 1; i <= 10; ++i) t.push_back(constant(i, i, diag[i - 1]));
    const std::pair<std::size_t, std::size_t> edges[] = {{1, 2}, {2, 4}, {3, 4}, {4, 5}, {5, 6},
                                                         {5, 7}, {7, 8}, {7, 9}, {9, 10}};
    for (auto [i, j] : edges) t.push_back(constant(i, j, 1.0));
    t.push_back(trig(TermKind::Cis, 2, 3, 1.0, wave({1, 0, 0})));
    t.push_back(trig(TermKind::Cis, 8, 9, 1.0, wave({0, 1, 0})));
    t.push_back(mono(1, 10, 1.0, expo({0, 0, 1})));
    return MatrixFamily::from_terms(10, 3, SymmetryClass::Hermitian, std::move(t), name);
  }
  if (name == "avoided-2x2") {
    const double eps = take_param(params, "eps", name);
    t.push_back(mono(1, 1, 1.0, expo({1, 0})));
    t.push_back(trig(TermKind::Sin, 1, 1, 3.0, wave({0, 1})));
    t.push_back(mono(1, 2, 1.0, expo({0, 1})));
    if (eps != 0.0) t.push_back(constant(1, 2, Complex(0.0, eps)));
    t.push_back(mono(2, 2, -1.0, expo({1, 0})));
    t.push_back(mono(2, 2, -1.0, expo({2, 0})));
    const auto cls = eps == 0.0 ? SymmetryClass::RealSymmetric : SymmetryClass::Hermitian;
    return MatrixFamily::from_terms(2, 2, cls, std::move(t), name);
  }
  if (name == "graphene") {
    const double p = take_param(params, "p", name);
    t.push_back(constant(1, 2, -1.0));
    t.push_back(trig(TermKind::Cis, 1, 2, -0.5, wave({1, 0})));
    t.push_back(trig(TermKind::Cis, 1, 2, -p, wave({0, 1})));
    return MatrixFamily::from_terms(2, 2, SymmetryClass::InversionSymmetricHermitian, std::move(t), name);
  }
  if (name == "triple-5param") {
    // parameter order (v, w, x, y, z)
    t.push_back(constant(1, 1, 1.0));
    t.push_back(mono(1, 1, 1.0, expo({1, 0, 0, 0, 0})));
    t.push_back(mono(1, 1, 1.0, expo({0, 1, 0, 0, 0})));
    t.push_back(mono(1, 1, 1.0, expo({0, 0, 1, 0, 0})));
    t.push_back(mono(1, 1, -3.0, expo({0, 0, 0, 1, 0})));
    t.push_back(mono(1, 1, -1.0, expo({0, 0, 0, 0, 1})));
    t.push_back(mono(1, 2, 2.0, expo({0, 0, 1, 0, 0})));
    t.push_back(mono(1, 2, 1.0, expo({0, 0, 0, 1, 0})));
    t.push_back(mono(1, 2, 2.0, expo({0, 0, 0, 0, 1})));
    t.push_back(mono(1, 3, 1.0, expo({0, 0, 1, 0, 0})));
    t.push_back(mono(1, 3, 1.0, expo({0, 0, 1, 0, 1})));
    t.push_back(mono(1, 3, 1.0, expo({0, 0, 0, 1, 0})));
    t.push_back(constant(2, 2, 1.0));
    t.push_back(mono(2, 2, 1.0, expo({0, 0, 1, 0, 0})));
    t.push_back(mono(2, 2, 1.0, expo({0, 0, 0, 1, 1})));
    t.push_back(mono(2, 3, 2.0, expo({1, 0, 0, 0, 0})));
    t.push_back(mono(2, 3, -1.0, expo({0, 1, 0, 0, 0})));
    t.push_back(mono(2, 3, 1.0, expo({0, 0, 0, 0, 1})));
    t.push_back(constant(3, 3, 1.0));
    t.push_back(mono(3, 3, 1.0, expo({1, 1, 0, 0, 0})));
    return MatrixFamily::from_terms(3, 5, SymmetryClass::RealSymmetric, std::move(t), name);
  }
  if (name == "canonical-cone") {
    t.push_back(mono(1, 1, 1.0, expo({1, 0})));
    t.push_back(mono(1, 2, 1.0, expo({0, 1})));
    t.push_back(mono(2, 2, -1.0, expo({1, 0})));
    return MatrixFamily::from_terms(2, 2, SymmetryClass::RealSymmetric, std::move(t), name);
  }
  if (name == "linear-random") {
    const auto seed = static_cast<std::uint64_t>(take_param(params, "seed", name));
    const auto n = static_cast<std::size_t>(params.count("n") ? params.at("n") : 2.0);
    if (n < 2) throw Error("linear-random requires n >= 2");
    std::mt19937_64 rng(seed);
    const std::vector<unsigned> axes[3] = {expo({0, 0}), expo({1, 0}), expo({0, 1})};
    for (const auto& e : axes)
      for (std::size_t i = 1; i <= n; ++i)
        for (std::size_t j = i; j <= n; ++j) t.push_back(mono(i, j, uniform_pm1(rng), e));
    return MatrixFamily::from_terms(n, 2, SymmetryClass::RealSymmetric, std::move(t), name);
  }
  throw Error("unknown builtin family '" + name + "'");
}

}  // namespace conical
