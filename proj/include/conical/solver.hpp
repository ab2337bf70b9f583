#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/LU>
#include <Eigen/SVD>

#include "conical/reduction.hpp"

namespace conical {

struct SolverConfig {
  int max_iter = 50;
  double gap_tol = 1e-12;               // relative to 1 + ‖A(r)‖
  double step_tol = 1e-12;
  double pinv_rel_threshold = 1e-8;     // σ_min/σ_max below this → truncated-SVD pseudoinverse
  int oscillation_window = 6;
  double oscillation_factor = 0.9;
  std::optional<double> max_step_norm;  // off unless requested

  void validate() const {
    if (max_iter < 1) throw Error("max_iter must be >= 1");
    if (!(gap_tol > 0) || !(step_tol > 0) || !(pinv_rel_threshold > 0)) throw Error("tolerances must be positive");
    if (oscillation_window < 1) throw Error("oscillation_window must be >= 1");
    if (!(oscillation_factor > 0 && oscillation_factor < 1)) throw Error("oscillation_factor must lie in (0, 1)");
    if (max_step_norm && !(*max_step_norm > 0)) throw Error("max_step_norm must be positive");
  }
};

struct IterationRecord {
  int index = 0;
  ParameterPoint point;
  double gap = 0.0;                     // λ_{k+1} − λ_k
  std::optional<double> second_gap;     // λ_{k+2} − λ_{k+1} (triple mode)
  double step_norm = 0.0;
  double det_j = nan();
  double cond_j = nan();
  bool used_pseudoinverse = false;
  long evaluations = 0;                 // cumulative eigenvalue computations
};

enum class Outcome { Converged, AvoidedCrossing, NotConverging, BudgetExhausted };

inline std::string_view to_string(Outcome o) {
  switch (o) {
    case Outcome::Converged: return "Converged";
    case Outcome::AvoidedCrossing: return "AvoidedCrossing";
    case Outcome::NotConverging: return "NotConverging";
    case Outcome::BudgetExhausted: return "BudgetExhausted";
  }
  return "?";
}

/// Non-degeneracy data at a converged point.
struct DegeneracyDiagnostics {
  double det_j = nan();
  double cond_j = nan();
  RVector hessian_eigenvalues;  // of 2 JᵀJ
};

struct SolveReport {
  Outcome outcome = Outcome::BudgetExhausted;
  std::vector<IterationRecord> trace;
  ParameterPoint final;
  double final_gap = nan();
  std::size_t pair_index = 1;
  long evaluations = 0;
  std::string note;
  std::optional<DegeneracyDiagnostics> diagnostics;

  double min_gap() const {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& r : trace) m = std::min(m, r.gap);
    return m;
  }
};

/// Result of solving J s = F.
struct NewtonStep {
  RVector delta;
  bool used_pseudoinverse = false;
};

/// s = J⁻¹ F, or the truncated-SVD pseudoinverse solution when σ_min/σ_max
/// falls below the threshold.
inline NewtonStep solve_linear(const RMatrix& j, const RVector& f, double pinv_rel_threshold) {
  Eigen::JacobiSVD<RMatrix> svd(j, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const RVector& s = svd.singularValues();
  const double smax = s[0];
  NewtonStep out;
  if (smax > 0.0 && s[s.size() - 1] >= pinv_rel_threshold * smax) {
    out.delta = j.partialPivLu().solve(f);
    return out;
  }
  out.used_pseudoinverse = true;
  RVector coeffs = svd.matrixU().transpose() * f;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    coeffs[i] = (smax > 0.0 && s[i] >= pinv_rel_threshold * smax) ? coeffs[i] / s[i] : 0.0;
  out.delta = svd.matrixV() * coeffs;
  return out;
}

namespace detail {

inline bool gaps_below(const ReducedSystem& rs, double tol) {
  const double limit = tol * rs.scale();
  return std::all_of(rs.gaps.begin(), rs.gaps.end(), [&](double g) { return g <= limit; });
}

inline IterationRecord record_from(const ReducedSystem& rs, int index) {
  IterationRecord rec;
  rec.index = index;
  rec.point = rs.eigen.point;
  rec.gap = std::max(rs.gaps[0], 0.0);
  if (rs.gaps.size() > 1) rec.second_gap = std::max(rs.gaps[1], 0.0);
  rec.det_j = rs.det_j;
  rec.cond_j = rs.conditioning;
  return rec;
}

inline double geometric_mean(std::vector<double>::const_iterator first, std::vector<double>::const_iterator last) {
  double acc = 0.0;
  long count = 0;
  for (auto it = first; it != last; ++it, ++count) acc += std::log(std::max(*it, 1e-300));
  return std::exp(acc / static_cast<double>(count));
}

}  // namespace detail

/// One application of the fixed-eigenbasis Newton map from a reduced system.
inline std::pair<ParameterPoint, IterationRecord> step_from(const ReducedSystem& rs, const SolverConfig& config,
                                                            int index = 0) {
  IterationRecord rec = detail::record_from(rs, index);
  if (detail::gaps_below(rs, config.gap_tol)) return {rs.eigen.point, rec};
  NewtonStep ns = solve_linear(rs.jacobian, rs.objective, config.pinv_rel_threshold);
  if (config.max_step_norm) {
    const double norm = ns.delta.norm();
    if (norm > *config.max_step_norm) ns.delta *= *config.max_step_norm / norm;
  }
  rec.step_norm = ns.delta.norm();
  rec.used_pseudoinverse = ns.used_pseudoinverse;
  return {rs.eigen.point - ns.delta, rec};
}

/// r' = r − J⁺ F at a single point. Returns r unchanged (zero step) when the
/// group is already degenerate to tolerance.
inline std::pair<ParameterPoint, IterationRecord> step(const MatrixFamily& family, const ParameterPoint& r,
                                                       const MultiplicityMode& mode, const SolverConfig& config = {}) {
  config.validate();
  auto result = step_from(reduce(family, r, mode), config);
  result.second.evaluations = 1;
  return result;
}

inline DegeneracyDiagnostics diagnostics_from(const ReducedSystem& rs) {
  DegeneracyDiagnostics dd;
  dd.det_j = rs.det_j;
  dd.cond_j = rs.conditioning;
  const RMatrix h = 2.0 * rs.jacobian.transpose() * rs.jacobian;
  dd.hessian_eigenvalues = Eigen::SelfAdjointEigenSolver<RMatrix>(h, Eigen::EigenvaluesOnly).eigenvalues();
  return dd;
}

/// Iterates the Newton map from `start` and classifies the outcome.
///
/// Stops with Converged once the group gap(s) drop below gap_tol·(1+‖A‖) or a
/// step is shorter than step_tol. Oscillation: when the geometric-mean step
/// over the last window is not below oscillation_factor times the one before,
/// and the trailing window sets no new gap low (by the same factor), the run
/// is an AvoidedCrossing if the gap ever fell below 1e-2 of its initial value,
/// otherwise NotConverging. Non-finite iterates are NotConverging.
inline SolveReport solve(const MatrixFamily& family, const ParameterPoint& start, const MultiplicityMode& mode,
                         const SolverConfig& config = {}) {
  config.validate();
  check_compatible(family, mode);
  SolveReport report;
  ParameterPoint r = start;

  auto finish = [&](Outcome o, const ParameterPoint& at, std::string note = {}) {
    report.outcome = o;
    report.final = at;
    report.note = std::move(note);
    return report;
  };

  if (!start.finite()) return finish(Outcome::NotConverging, start, "non-finite start");

  ReducedSystem rs;
  try {
    rs = reduce(family, r, mode);
  } catch (const EigenError& e) {
    return finish(Outcome::NotConverging, r, e.what());
  }
  ++report.evaluations;
  const MultiplicityMode fixed = mode.with_pair(rs.pair_index);
  report.pair_index = rs.pair_index;
  const double initial_gap = rs.gaps[0];
  const auto w = static_cast<std::size_t>(config.oscillation_window);
  std::vector<double> steps;
  std::vector<double> gaps;

  for (int i = 0; i < config.max_iter; ++i) {
    auto [next, rec] = step_from(rs, config, i);
    rec.evaluations = report.evaluations;
    report.trace.push_back(rec);
    gaps.push_back(rec.second_gap ? std::max(rec.gap, *rec.second_gap) : rec.gap);

    if (detail::gaps_below(rs, config.gap_tol)) {
      report.final_gap = rec.gap;
      report.diagnostics = diagnostics_from(rs);
      return finish(Outcome::Converged, r);
    }
    if (!next.finite()) return finish(Outcome::NotConverging, r, "iterate left the finite domain");

    steps.push_back(rec.step_norm);
    r = next;
    try {
      rs = reduce(family, r, fixed);
    } catch (const EigenError& e) {
      return finish(Outcome::NotConverging, r, e.what());
    }
    ++report.evaluations;

    if (rec.step_norm <= config.step_tol) {
      IterationRecord last = detail::record_from(rs, i + 1);
      last.evaluations = report.evaluations;
      report.trace.push_back(last);
      report.final_gap = last.gap;
      report.diagnostics = diagnostics_from(rs);
      return finish(Outcome::Converged, r);
    }

    if (steps.size() >= 2 * w) {
      const auto end = steps.end();
      const double trailing = detail::geometric_mean(end - static_cast<long>(w), end);
      const double preceding = detail::geometric_mean(end - static_cast<long>(2 * w), end - static_cast<long>(w));
      const double recent_low = *std::min_element(gaps.end() - static_cast<long>(w), gaps.end());
      const double earlier_low = *std::min_element(gaps.begin(), gaps.end() - static_cast<long>(w));
      const bool steps_shrinking = trailing < config.oscillation_factor * preceding;
      const bool gap_improving = recent_low < config.oscillation_factor * earlier_low;
      if (!steps_shrinking && !gap_improving) {
        report.final_gap = rs.gaps[0];
        const double low = *std::min_element(gaps.begin(), gaps.end());
        if (low < 1e-2 * initial_gap) return finish(Outcome::AvoidedCrossing, r, "oscillating on a small gap plateau");
        return finish(Outcome::NotConverging, r, "oscillating without approaching a degeneracy");
      }
    }
  }
  report.final_gap = rs.gaps[0];
  return finish(Outcome::BudgetExhausted, r);
}

/// Thrown when a trace has too few points in the asymptotic regime.
class InsufficientData : public Error {
public:
  using Error::Error;
};

/// Error sequence of a trace: distances to `target`, or successive step
/// norms when the target is unknown.
inline std::vector<double> error_sequence(const std::vector<IterationRecord>& trace,
                                          const std::optional<ParameterPoint>& target) {
  std::vector<double> e;
  if (target) {
    for (const auto& r : trace) e.push_back(r.point.distance(*target));
  } else {
    for (const auto& r : trace)
      if (r.step_norm > 0.0) e.push_back(r.step_norm);
  }
  return e;
}

/// Least-squares slope of log e_{i+1} against log e_i over consecutive pairs
/// with both errors in (100 ε, cap).
inline double convergence_order(const std::vector<IterationRecord>& trace,
                                 const std::optional<ParameterPoint>& target, double cap = 0.1) {
  const std::vector<double> e = error_sequence(trace, target);
  const double floor = 100.0 * kMachineEps;
  auto ok = [&](double v) { return v > floor && v < cap; };
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i + 1 < e.size(); ++i) {
    if (ok(e[i]) && ok(e[i + 1])) {
      xs.push_back(std::log(e[i]));
      ys.push_back(std::log(e[i + 1]));
    }
  }
  if (xs.size() < 2) throw InsufficientData("fewer than three qualifying records for an order estimate");
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / static_cast<double>(ys.size());
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  if (sxx == 0.0) throw InsufficientData("degenerate error sequence");
  return sxy / sxx;
}

}  // namespace conical
