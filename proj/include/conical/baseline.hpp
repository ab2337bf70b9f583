#pragma once

#include <cmath>
#include <optional>

#include "conical/reduction.hpp"
#include "conical/solver.hpp"

namespace conical {

struct BaselineConfig {
  int max_iter = 200;
  double grad_tol = 1e-10;
  std::optional<double> fd_step;  // default ε^{1/3}(1 + |r_a|)
  double shrink = 0.5;
  double sufficient_decrease = 1e-4;
  int max_backtracks = 60;

  void validate() const {
    if (max_iter < 1) throw Error("baseline max_iter must be >= 1");
    if (!(grad_tol > 0)) throw Error("baseline grad_tol must be positive");
    if (fd_step && !(*fd_step > 0)) throw Error("baseline fd_step must be positive");
    if (!(shrink > 0 && shrink < 1)) throw Error("line-search shrink must lie in (0, 1)");
    if (!(sufficient_decrease > 0 && sufficient_decrease < 1)) throw Error("sufficient_decrease must lie in (0, 1)");
    if (max_backtracks < 1) throw Error("max_backtracks must be >= 1");
  }
};

/// g(r) = (λ_k − λ_{k+1})².
inline double gap_squared(const MatrixFamily& family, const ParameterPoint& r, std::size_t k) {
  const EigenSystem es = eigensystem(family, r);
  if (k < 1 || k >= es.size()) throw ModeError("pair index out of range");
  const double g = es.values[static_cast<Eigen::Index>(k)] - es.values[static_cast<Eigen::Index>(k - 1)];
  return g * g;
}

/// BFGS on the squared gap with a central-difference gradient and Armijo
/// backtracking. Converged means the gradient norm fell below grad_tol; it
/// says nothing about whether the minimum is a true degeneracy.
inline SolveReport minimize_gap_squared(const MatrixFamily& family, const ParameterPoint& start, std::size_t k,
                                        const BaselineConfig& config = {}) {
  config.validate();
  const auto d = static_cast<Eigen::Index>(family.d());
  SolveReport report;
  report.pair_index = k;
  long evals = 0;

  auto g = [&](const ParameterPoint& r) {
    ++evals;
    return gap_squared(family, r, k);
  };
  auto gradient = [&](const ParameterPoint& r) {
    RVector grad(d);
    for (Eigen::Index a = 0; a < d; ++a) {
      const auto axis = static_cast<std::size_t>(a);
      const double h = config.fd_step.value_or(MatrixFamily::default_fd_step(r[axis]));
      grad[a] = (g(r.shifted(axis, h)) - g(r.shifted(axis, -h))) / (2.0 * h);
    }
    return grad;
  };
  auto finish = [&](Outcome o, const ParameterPoint& at, double f, std::string note = {}) {
    report.outcome = o;
    report.final = at;
    report.final_gap = std::sqrt(std::max(f, 0.0));
    report.evaluations = evals;
    report.note = std::move(note);
    return report;
  };

  ParameterPoint x = start;
  if (!x.finite()) return finish(Outcome::NotConverging, x, nan(), "non-finite start");
  double f = g(x);
  RVector grad = gradient(x);
  RMatrix h_inv = RMatrix::Identity(d, d);

  for (int it = 0; it < config.max_iter; ++it) {
    IterationRecord rec;
    rec.index = it;
    rec.point = x;
    rec.gap = std::sqrt(std::max(f, 0.0));
    rec.evaluations = evals;
    if (!std::isfinite(f) || !grad.allFinite()) {
      report.trace.push_back(rec);
      return finish(Outcome::NotConverging, x, f, "non-finite objective or gradient");
    }
    if (grad.norm() <= config.grad_tol) {
      report.trace.push_back(rec);
      return finish(Outcome::Converged, x, f);
    }

    RVector dir = -h_inv * grad;
    double slope = grad.dot(dir);
    if (!(slope < 0.0)) {
      h_inv.setIdentity();
      dir = -grad;
      slope = grad.dot(dir);
    }
    double t = 1.0;
    ParameterPoint trial = x + RVector(t * dir);
    double f_trial = g(trial);
    int backtracks = 0;
    while (!(f_trial <= f + config.sufficient_decrease * t * slope)) {
      if (++backtracks > config.max_backtracks) {
        report.trace.push_back(rec);
        return finish(Outcome::NotConverging, x, f, "line search failed");
      }
      t *= config.shrink;
      trial = x + RVector(t * dir);
      f_trial = g(trial);
    }

    const RVector s = t * dir;
    const RVector grad_new = gradient(trial);
    const RVector y = grad_new - grad;
    const double ys = y.dot(s);
    if (it == 0 && ys > 0.0) h_inv *= ys / y.squaredNorm();
    if (ys > 1e-12 * y.norm() * s.norm()) {
      const double rho = 1.0 / ys;
      const RMatrix eye = RMatrix::Identity(d, d);
      h_inv = (eye - rho * s * y.transpose()) * h_inv * (eye - rho * y * s.transpose()) + rho * s * s.transpose();
    }
    rec.step_norm = s.norm();
    report.trace.push_back(rec);
    x = trial;
    f = f_trial;
    grad = grad_new;
  }
  return finish(Outcome::BudgetExhausted, x, f);
}

}  // namespace conical
