#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <future>
#include <numbers>
#include <optional>
#include <thread>
#include <vector>

#include "conical/reduction.hpp"

namespace conical {

class NotADegeneracy : public Error {
public:
  using Error::Error;
};

class GapCollapse : public Error {
public:
  GapCollapse(const std::string& what, ParameterPoint where) : Error(what), where_(std::move(where)) {}
  const ParameterPoint& where() const { return where_; }

private:
  ParameterPoint where_;
};

/// (M11 − M22)² + 4|M12|², the squared eigenvalue gap of a 2×2 Hermitian matrix.
inline double discriminant2x2(const RMatrix& m) {
  if (m.rows() != 2 || m.cols() != 2) throw DimensionError("discriminant2x2 needs a 2x2 matrix");
  const double d = m(0, 0) - m(1, 1);
  return d * d + 4.0 * m(0, 1) * m(0, 1);
}

inline double discriminant2x2(const CMatrix& m) {
  if (m.rows() != 2 || m.cols() != 2) throw DimensionError("discriminant2x2 needs a 2x2 matrix");
  const double d = (m(0, 0) - m(1, 1)).real();
  return d * d + 4.0 * std::norm(m(0, 1));
}

/// Eigenvalue-invariant discriminant of the group: (λ_k − λ_{k+1})² for pairs,
/// Σ_{i<j} (λ_i − λ_j)² for triples.
inline double group_discriminant(const EigenSystem& es, std::size_t k, std::size_t g) {
  double disc = 0.0;
  for (std::size_t i = 0; i < g; ++i)
    for (std::size_t j = i + 1; j < g; ++j) {
      const double gap = es.values[static_cast<Eigen::Index>(k - 1 + j)] - es.values[static_cast<Eigen::Index>(k - 1 + i)];
      disc += gap * gap;
    }
  return disc;
}

/// Quadratic form M with disc = Fᵀ M F in terms of the reduced objective rows.
inline RMatrix discriminant_metric(const MultiplicityMode& mode) {
  const auto d = static_cast<Eigen::Index>(mode.parameter_dimension());
  RMatrix m = RMatrix::Identity(d, d);
  if (mode.tag == ModeTag::Triple5D) {
    m.topLeftCorner(2, 2) << 2.0, 1.0, 1.0, 2.0;
    m.bottomRightCorner(3, 3) *= 1.5;
  }
  return m;
}

struct DegeneracyCertificate {
  ParameterPoint point;
  std::size_t pair_index = 1;
  double gap = 0.0;
  double det_j = 0.0;
  double cond_j = 0.0;
  RMatrix hessian;
  RVector hessian_eigenvalues;
  double fd_hessian_residual = 0.0;
  bool nondegenerate = false;
};

/// Central second-difference Hessian of f at r with per-axis step
/// ε^{1/4}(1 + |r_a|).
inline RMatrix fd_hessian(const std::function<double(const ParameterPoint&)>& f, const ParameterPoint& r) {
  const std::size_t d = r.size();
  RMatrix h(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  std::vector<double> step(d);
  for (std::size_t a = 0; a < d; ++a) step[a] = std::pow(kMachineEps, 0.25) * (1.0 + std::abs(r[a]));
  const double f0 = f(r);
  for (std::size_t a = 0; a < d; ++a) {
    const auto ai = static_cast<Eigen::Index>(a);
    h(ai, ai) = (f(r.shifted(a, step[a])) - 2.0 * f0 + f(r.shifted(a, -step[a]))) / (step[a] * step[a]);
    for (std::size_t b = a + 1; b < d; ++b) {
      const auto bi = static_cast<Eigen::Index>(b);
      const double pp = f(r.shifted(a, step[a]).shifted(b, step[b]));
      const double pm = f(r.shifted(a, step[a]).shifted(b, -step[b]));
      const double mp = f(r.shifted(a, -step[a]).shifted(b, step[b]));
      const double mm = f(r.shifted(a, -step[a]).shifted(b, -step[b]));
      h(ai, bi) = h(bi, ai) = (pp - pm - mp + mm) / (4.0 * step[a] * step[b]);
    }
  }
  return h;
}

/// Certifies a located degeneracy: Hessian of the discriminant from the
/// Jacobian (2 JᵀMJ, M = I for pairs) and its agreement with a
/// finite-difference Hessian of the squared eigenvalue gap(s).
inline DegeneracyCertificate certify(const MatrixFamily& family, const ParameterPoint& alpha,
                                     const MultiplicityMode& mode, double nondegeneracy_threshold = 1e-8) {
  const ReducedSystem rs = reduce(family, alpha, mode);
  if (rs.max_gap() > 1e-8 * rs.scale())
    throw NotADegeneracy("gap " + std::to_string(rs.max_gap()) + " at the given point exceeds 1e-8 (1 + |A|)");

  DegeneracyCertificate c;
  c.point = alpha;
  c.pair_index = rs.pair_index;
  c.gap = rs.max_gap();
  c.det_j = rs.det_j;
  c.cond_j = rs.conditioning;
  c.hessian = 2.0 * rs.jacobian.transpose() * discriminant_metric(mode) * rs.jacobian;
  c.hessian = 0.5 * (c.hessian + c.hessian.transpose());
  c.hessian_eigenvalues = Eigen::SelfAdjointEigenSolver<RMatrix>(c.hessian, Eigen::EigenvaluesOnly).eigenvalues();
  c.nondegenerate = rs.conditioning > nondegeneracy_threshold;

  const std::size_t k = rs.pair_index;
  const std::size_t g = mode.group_size();
  const RMatrix fd = fd_hessian([&](const ParameterPoint& r) { return group_discriminant(eigensystem(family, r), k, g); },
                                alpha);
  const double norm = c.hessian.norm();
  c.fd_hessian_residual = norm > 0.0 ? (fd - c.hessian).norm() / norm : (fd - c.hessian).norm();
  return c;
}

enum class Rotation { Zero, Pi, Inconclusive };

inline std::string_view to_string(Rotation r) {
  switch (r) {
    case Rotation::Zero: return "0";
    case Rotation::Pi: return "pi";
    case Rotation::Inconclusive: return "inconclusive";
  }
  return "?";
}

struct LoopSpec {
  ParameterPoint center;
  double radius = 0.0;
  int samples = 64;
  double start_angle = 0.0;
};

namespace detail {

struct Holonomy {
  Complex product{1.0, 0.0};
  double min_overlap = 1.0;
};

// Transports v_k around the closed polygon `points` by aligning each sample
// with the previous one; the accumulated overlap product is ±1 (real case) or
// a unit phase. Throws GapCollapse if v_k stops being isolated on the loop.
inline Holonomy transport(const MatrixFamily& family, const std::vector<ParameterPoint>& points, std::size_t k) {
  Holonomy h;
  Eigen::VectorXcd first, prev;
  const auto k0 = static_cast<Eigen::Index>(k - 1);
  for (std::size_t i = 0; i <= points.size(); ++i) {
    Eigen::VectorXcd v;
    if (i == points.size()) {
      v = first;
    } else {
      const EigenSystem es = eigensystem(family, points[i]);
      if (k < 1 || k >= es.size()) throw ModeError("pair index out of range for Berry transport");
      const double tol = 1e-8 * es.scale();
      const bool low_ok = k == 1 || es.values[k0] - es.values[k0 - 1] > tol;
      const bool high_ok = es.values[k0 + 1] - es.values[k0] > tol;
      if (!low_ok || !high_ok) throw GapCollapse("eigenvalue gap collapses on the loop", points[i]);
      v = es.vectors.col(k0);
      if (i == 0) first = v;
    }
    if (i > 0) {
      const Complex o = prev.dot(v);
      const double m = std::abs(o);
      h.min_overlap = std::min(h.min_overlap, m);
      if (m > 0.0) h.product *= o / m;
    }
    prev = v;
  }
  return h;
}

inline Rotation classify(const Holonomy& h) {
  // Nearly orthogonal consecutive samples leave the alignment sign undefined.
  if (h.min_overlap < 0.05) return Rotation::Inconclusive;
  const double phase = std::abs(std::arg(h.product));
  if (phase < std::numbers::pi / 4) return Rotation::Zero;
  if (phase > 3 * std::numbers::pi / 4) return Rotation::Pi;
  return Rotation::Inconclusive;
}

inline Rotation stable_rotation(const MatrixFamily& family,
                                const std::function<std::vector<ParameterPoint>(int)>& polygon, int samples,
                                std::size_t k) {
  const Rotation coarse = classify(transport(family, polygon(samples), k));
  const Rotation fine = classify(transport(family, polygon(2 * samples), k));
  return coarse == fine ? coarse : Rotation::Inconclusive;
}

}  // namespace detail

inline std::vector<ParameterPoint> circle_points(const LoopSpec& loop, int samples) {
  std::vector<ParameterPoint> pts;
  pts.reserve(static_cast<std::size_t>(samples));
  for (int i = 0; i < samples; ++i) {
    const double t = loop.start_angle + 2.0 * std::numbers::pi * i / samples;
    pts.push_back(ParameterPoint{loop.center[0] + loop.radius * std::cos(t), loop.center[1] + loop.radius * std::sin(t)});
  }
  return pts;
}

/// Rotation class (0 or π) of the continuously transported eigenvector v_k
/// around a circle; Inconclusive if the answer changes when the sample count
/// is doubled. A π rotation signals an enclosed conical point.
inline Rotation berry_loop(const MatrixFamily& family, const LoopSpec& loop, std::size_t k) {
  if (family.d() != 2 || loop.center.size() != 2) throw DimensionError("Berry loops need a two-parameter family");
  if (!(loop.radius > 0.0)) throw Error("loop radius must be positive");
  if (loop.samples < 16) throw Error("loops need at least 16 samples");
  return detail::stable_rotation(family, [&](int s) { return circle_points(loop, s); }, loop.samples, k);
}

struct Box {
  std::array<double, 2> lo{};
  std::array<double, 2> hi{};
};

struct ScanCell {
  std::size_t ix = 0;
  std::size_t iy = 0;
  Box bounds;
  Rotation rotation = Rotation::Inconclusive;
  std::string note;
  std::optional<ParameterPoint> collapse_at;  // boundary sample where the gap closed

  ParameterPoint center() const {
    return ParameterPoint{0.5 * (bounds.lo[0] + bounds.hi[0]), 0.5 * (bounds.lo[1] + bounds.hi[1])};
  }
  bool contains(const ParameterPoint& p) const {
    return p[0] >= bounds.lo[0] && p[0] <= bounds.hi[0] && p[1] >= bounds.lo[1] && p[1] <= bounds.hi[1];
  }
};

struct ScanResult {
  std::vector<ScanCell> candidates;
  std::vector<ScanCell> inconclusive;
};

inline std::vector<ParameterPoint> rectangle_points(const Box& b, int per_side) {
  std::vector<ParameterPoint> pts;
  pts.reserve(static_cast<std::size_t>(4 * per_side));
  const std::array<std::array<double, 2>, 4> corners = {
      {{b.lo[0], b.lo[1]}, {b.hi[0], b.lo[1]}, {b.hi[0], b.hi[1]}, {b.lo[0], b.hi[1]}}};
  for (std::size_t c = 0; c < 4; ++c) {
    const auto& p = corners[c];
    const auto& q = corners[(c + 1) % 4];
    for (int i = 0; i < per_side; ++i) {
      const double t = static_cast<double>(i) / per_side;
      pts.push_back(ParameterPoint{p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])});
    }
  }
  return pts;
}

/// Splits `region` into resolution × resolution cells and runs the Berry test
/// on every cell boundary. Cells with rotation π are candidates; cells whose
/// boundary hits a gap collapse or whose answer is unstable are reported
/// separately.
inline ScanResult grid_scan(const MatrixFamily& family, const Box& region, std::size_t resolution, std::size_t k,
                            int samples_per_side = 16, unsigned threads = 0) {
  if (family.d() != 2) throw DimensionError("grid_scan needs a two-parameter family");
  if (resolution < 1) throw Error("resolution must be positive");
  if (!(region.hi[0] > region.lo[0] && region.hi[1] > region.lo[1])) throw Error("empty scan region");

  const std::size_t total = resolution * resolution;
  std::vector<ScanCell> cells(total);
  const double wx = (region.hi[0] - region.lo[0]) / static_cast<double>(resolution);
  const double wy = (region.hi[1] - region.lo[1]) / static_cast<double>(resolution);
  for (std::size_t iy = 0; iy < resolution; ++iy)
    for (std::size_t ix = 0; ix < resolution; ++ix) {
      auto& c = cells[iy * resolution + ix];
      c.ix = ix;
      c.iy = iy;
      c.bounds.lo = {region.lo[0] + wx * static_cast<double>(ix), region.lo[1] + wy * static_cast<double>(iy)};
      c.bounds.hi = {ix + 1 == resolution ? region.hi[0] : region.lo[0] + wx * static_cast<double>(ix + 1),
                     iy + 1 == resolution ? region.hi[1] : region.lo[1] + wy * static_cast<double>(iy + 1)};
    }

  auto evaluate_cell = [&](ScanCell& c) {
    try {
      c.rotation = detail::stable_rotation(family, [&](int s) { return rectangle_points(c.bounds, s); },
                                           samples_per_side, k);
      if (c.rotation == Rotation::Inconclusive) c.note = "unstable under sample doubling";
    } catch (const GapCollapse& e) {
      c.rotation = Rotation::Inconclusive;
      c.note = e.what();
      c.collapse_at = e.where();
    }
  };

  const unsigned workers = std::max(1u, threads ? threads : std::thread::hardware_concurrency());
  std::vector<std::future<void>> jobs;
  for (unsigned w = 0; w < workers; ++w)
    jobs.push_back(std::async(std::launch::async, [&, w] {
      for (std::size_t i = w; i < total; i += workers) evaluate_cell(cells[i]);
    }));
  for (auto& j : jobs) j.get();

  ScanResult out;
  for (auto& c : cells) {
    if (c.rotation == Rotation::Pi) out.candidates.push_back(c);
    else if (c.rotation == Rotation::Inconclusive) out.inconclusive.push_back(c);
  }
  return out;
}

}  // namespace conical
