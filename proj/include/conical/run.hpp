#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <future>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"

#include "conical/baseline.hpp"
#include "conical/builtins.hpp"
#include "conical/diagnostics.hpp"
#include "conical/family_io.hpp"
#include "conical/solver.hpp"
#include "conical/trace_io.hpp"

namespace conical {

/// Bad configuration or arguments; the CLI maps this to exit status 1.
class UsageError : public Error {
public:
  using Error::Error;
};

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int usage = 1;
inline constexpr int avoided_crossing = 2;
inline constexpr int not_converging = 3;
inline constexpr int budget_exhausted = 4;
}  // namespace exit_code

namespace detail {

inline double strict_number(const std::string& s) {
  if (s.empty() || s == "nan" || s == "null") throw Error("not a number");
  return parse_number(s);
}

// One product term: a plain number or a multiple/fraction of pi.
inline double parse_term(const std::string& s) {
  const auto at = s.find("pi");
  if (at == std::string::npos) return strict_number(s);
  std::string head = s.substr(0, at);
  const std::string tail = s.substr(at + 2);
  if (!head.empty() && head.back() == '*') head.pop_back();
  double v = std::numbers::pi;
  if (head == "-") v = -v;
  else if (!head.empty() && head != "+") v *= strict_number(head);
  if (!tail.empty()) {
    if (tail[0] != '/') throw Error("trailing characters");
    v /= strict_number(tail.substr(1));
  }
  return v;
}

}  // namespace detail

/// Parses a real number, also accepting multiples and fractions of pi and
/// sums of such terms: "pi", "-pi/2", "0.8pi", "1.2*pi", "pi/3+0.5".
inline double parse_scalar(std::string_view text) {
  std::string s;
  for (char c : text)
    if (c != ' ') s += c;
  if (s.empty()) throw UsageError("empty number");
  try {
    double total = 0.0;
    std::size_t start = 0;
    for (std::size_t i = 1; i <= s.size(); ++i) {
      const bool split = i == s.size() ||
                         ((s[i] == '+' || s[i] == '-') && s[i - 1] != 'e' && s[i - 1] != 'E' && s[i - 1] != '*' &&
                          s[i - 1] != '/');
      if (!split) continue;
      std::string term = s.substr(start, i - start);
      if (!term.empty() && term[0] == '+') term.erase(0, 1);
      total += detail::parse_term(term);
      start = i;
    }
    return total;
  } catch (const Error&) {
    throw UsageError("malformed number '" + std::string(text) + "'");
  }
}

inline ParameterPoint parse_point(std::string_view text) {
  std::vector<double> v;
  for (const auto& part : detail::split(text, ',')) v.push_back(parse_scalar(part));
  RVector r(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) r[static_cast<Eigen::Index>(i)] = v[i];
  return ParameterPoint(r);
}

/// "x,y;x,y;..." into a list of points.
inline std::vector<ParameterPoint> parse_point_list(std::string_view text) {
  std::vector<ParameterPoint> pts;
  for (const auto& part : detail::split(text, ';'))
    if (!part.empty()) pts.push_back(parse_point(part));
  return pts;
}

/// "lo:hi,lo:hi,..." into per-axis intervals.
inline std::vector<std::pair<double, double>> parse_intervals(std::string_view text) {
  std::vector<std::pair<double, double>> out;
  for (const auto& part : detail::split(text, ',')) {
    const auto bounds = detail::split(part, ':');
    if (bounds.size() != 2) throw UsageError("interval '" + part + "' is not of the form lo:hi");
    out.emplace_back(parse_scalar(bounds[0]), parse_scalar(bounds[1]));
  }
  return out;
}

struct FamilySource {
  std::string builtin;
  ParamMap params;
  std::string file;
};

struct StartSpec {
  enum class Kind { Default, Points, Box, Circle };
  Kind kind = Kind::Default;
  std::vector<ParameterPoint> points;
  std::vector<std::pair<double, double>> box;
  ParameterPoint center;
  double radius = 0.0;
  int count = 10;
  std::uint64_t seed = 0;
};

struct RunConfig {
  FamilySource family;
  std::optional<ModeTag> mode;
  std::optional<std::size_t> pair;
  StartSpec starts;
  SolverConfig solver;
  std::optional<BaselineConfig> baseline;
  std::string out_path;
  TraceFormat format = TraceFormat::JsonLines;
  std::vector<std::pair<double, double>> region;  // scan box; defaults to [-pi, pi]^2
  std::size_t resolution = 16;
  int samples_per_side = 16;
  unsigned threads = 0;
};

namespace detail {

inline double scalar_from_json(const nlohmann::json& j, const std::string& what) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) return parse_scalar(j.get<std::string>());
  throw UsageError(what + " must be a number or a string such as \"pi/3\"");
}

inline ParameterPoint point_from_json(const nlohmann::json& j, const std::string& what) {
  if (!j.is_array()) throw UsageError(what + " must be an array");
  RVector r(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) r[static_cast<Eigen::Index>(i)] = scalar_from_json(j[i], what);
  return ParameterPoint(r);
}

inline std::vector<std::pair<double, double>> intervals_from_json(const nlohmann::json& j, const std::string& what) {
  if (!j.is_array()) throw UsageError(what + " must be an array of [lo, hi] pairs");
  std::vector<std::pair<double, double>> out;
  for (const auto& iv : j) {
    if (!iv.is_array() || iv.size() != 2) throw UsageError(what + " entries must be [lo, hi]");
    out.emplace_back(scalar_from_json(iv[0], what), scalar_from_json(iv[1], what));
  }
  return out;
}

inline void reject_unknown(const nlohmann::json& obj, std::initializer_list<const char*> keys, const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (const char* k : keys) known |= it.key() == k;
    if (!known) throw UsageError("unknown key '" + it.key() + "' in " + where);
  }
}

inline double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

}  // namespace detail

inline RunConfig config_from_json(const nlohmann::json& j) {
  using detail::scalar_from_json;
  if (!j.is_object()) throw UsageError("config must be a JSON object");
  detail::reject_unknown(j, {"family", "mode", "pair", "starts", "solver", "baseline", "output", "scan", "threads"},
                         "config");
  RunConfig c;
  if (j.contains("family")) {
    const auto& f = j["family"];
    detail::reject_unknown(f, {"builtin", "params", "file"}, "family");
    c.family.builtin = f.value("builtin", "");
    c.family.file = f.value("file", "");
    if (f.contains("params"))
      for (auto it = f["params"].begin(); it != f["params"].end(); ++it)
        c.family.params[it.key()] = scalar_from_json(it.value(), "family parameter " + it.key());
  }
  if (j.contains("mode")) c.mode = mode_from_string(j["mode"].get<std::string>());
  if (j.contains("pair")) c.pair = j["pair"].get<std::size_t>();
  if (j.contains("starts")) {
    const auto& s = j["starts"];
    detail::reject_unknown(s, {"points", "box", "circle", "count", "seed"}, "starts");
    if (s.contains("points")) {
      c.starts.kind = StartSpec::Kind::Points;
      for (const auto& p : s["points"]) c.starts.points.push_back(detail::point_from_json(p, "starts.points"));
    } else if (s.contains("box")) {
      c.starts.kind = StartSpec::Kind::Box;
      c.starts.box = detail::intervals_from_json(s["box"], "starts.box");
    } else if (s.contains("circle")) {
      c.starts.kind = StartSpec::Kind::Circle;
      c.starts.center = detail::point_from_json(s["circle"].at("center"), "starts.circle.center");
      c.starts.radius = scalar_from_json(s["circle"].at("radius"), "starts.circle.radius");
    }
    if (s.contains("count")) c.starts.count = s["count"].get<int>();
    if (s.contains("seed")) c.starts.seed = s["seed"].get<std::uint64_t>();
  }
  if (j.contains("solver")) {
    const auto& s = j["solver"];
    detail::reject_unknown(s,
                           {"max_iter", "gap_tol", "step_tol", "pinv_rel_threshold", "oscillation_window",
                            "oscillation_factor", "max_step_norm"},
                           "solver");
    if (s.contains("max_iter")) c.solver.max_iter = s["max_iter"].get<int>();
    if (s.contains("gap_tol")) c.solver.gap_tol = scalar_from_json(s["gap_tol"], "gap_tol");
    if (s.contains("step_tol")) c.solver.step_tol = scalar_from_json(s["step_tol"], "step_tol");
    if (s.contains("pinv_rel_threshold"))
      c.solver.pinv_rel_threshold = scalar_from_json(s["pinv_rel_threshold"], "pinv_rel_threshold");
    if (s.contains("oscillation_window")) c.solver.oscillation_window = s["oscillation_window"].get<int>();
    if (s.contains("oscillation_factor"))
      c.solver.oscillation_factor = scalar_from_json(s["oscillation_factor"], "oscillation_factor");
    if (s.contains("max_step_norm")) c.solver.max_step_norm = scalar_from_json(s["max_step_norm"], "max_step_norm");
  }
  if (j.contains("baseline")) {
    const auto& b = j["baseline"];
    detail::reject_unknown(b, {"max_iter", "grad_tol", "fd_step", "shrink", "sufficient_decrease", "max_backtracks"},
                           "baseline");
    BaselineConfig bc;
    if (b.contains("max_iter")) bc.max_iter = b["max_iter"].get<int>();
    if (b.contains("grad_tol")) bc.grad_tol = scalar_from_json(b["grad_tol"], "grad_tol");
    if (b.contains("fd_step")) bc.fd_step = scalar_from_json(b["fd_step"], "fd_step");
    if (b.contains("shrink")) bc.shrink = scalar_from_json(b["shrink"], "shrink");
    if (b.contains("sufficient_decrease"))
      bc.sufficient_decrease = scalar_from_json(b["sufficient_decrease"], "sufficient_decrease");
    if (b.contains("max_backtracks")) bc.max_backtracks = b["max_backtracks"].get<int>();
    c.baseline = bc;
  }
  if (j.contains("output")) {
    const auto& o = j["output"];
    detail::reject_unknown(o, {"path", "format"}, "output");
    c.out_path = o.value("path", "");
    if (o.contains("format")) c.format = trace_format_from_string(o["format"].get<std::string>());
  }
  if (j.contains("scan")) {
    const auto& s = j["scan"];
    detail::reject_unknown(s, {"region", "resolution", "samples_per_side"}, "scan");
    if (s.contains("region")) c.region = detail::intervals_from_json(s["region"], "scan.region");
    if (s.contains("resolution")) c.resolution = s["resolution"].get<std::size_t>();
    if (s.contains("samples_per_side")) c.samples_per_side = s["samples_per_side"].get<int>();
  }
  if (j.contains("threads")) c.threads = j["threads"].get<unsigned>();
  return c;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file '" + path + "'");
  try {
    return config_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw UsageError("config '" + path + "': " + e.what());
  }
}

inline MatrixFamily load_run_family(const FamilySource& src) {
  if (!src.builtin.empty() && !src.file.empty()) throw UsageError("give either a builtin family or a family file");
  if (!src.file.empty()) {
    std::ifstream in(src.file);
    if (!in) throw UsageError("cannot open family file '" + src.file + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return load_family(buf.str());
  }
  if (src.builtin.empty()) throw UsageError("no family given");
  return builtin(src.builtin, src.params);
}

inline MultiplicityMode resolve_mode(const RunConfig& config, const MatrixFamily& family) {
  MultiplicityMode mode = default_mode(family);
  if (config.mode) mode.tag = *config.mode;
  mode.pair_index = config.pair;
  check_compatible(family, mode);
  return mode;
}

/// Starting points for a run. Sampled starts depend only on the start description and d.
inline std::vector<ParameterPoint> sample_starts(const StartSpec& spec, std::size_t d) {
  if (spec.kind == StartSpec::Kind::Points) {
    for (const auto& p : spec.points)
      if (p.size() != d)
        throw UsageError("start has " + std::to_string(p.size()) + " coordinates, family has " + std::to_string(d));
    return spec.points;
  }
  if (spec.count < 1) throw UsageError("start count must be positive");
  std::mt19937_64 rng(spec.seed);
  std::vector<ParameterPoint> pts;
  if (spec.kind == StartSpec::Kind::Circle) {
    if (d != 2 || spec.center.size() != 2) throw UsageError("circle sampling needs a two-parameter family");
    for (int i = 0; i < spec.count; ++i) {
      const double t = 2.0 * std::numbers::pi * detail::uniform01(rng);
      pts.push_back(ParameterPoint{spec.center[0] + spec.radius * std::cos(t), spec.center[1] + spec.radius * std::sin(t)});
    }
    return pts;
  }
  auto box = spec.box;
  if (spec.kind == StartSpec::Kind::Default) box.assign(d, {-std::numbers::pi, std::numbers::pi});
  if (box.size() != d)
    throw UsageError("start box has " + std::to_string(box.size()) + " intervals, family has " + std::to_string(d));
  for (int i = 0; i < spec.count; ++i) {
    RVector r(static_cast<Eigen::Index>(d));
    for (std::size_t a = 0; a < d; ++a)
      r[static_cast<Eigen::Index>(a)] = box[a].first + (box[a].second - box[a].first) * detail::uniform01(rng);
    pts.push_back(ParameterPoint(r));
  }
  return pts;
}

/// Applies `fn` to 0..count-1 on a small worker pool; results keep index order.
template <class T, class Fn>
std::vector<T> parallel_map(std::size_t count, unsigned threads, Fn fn) {
  std::vector<T> out(count);
  const unsigned workers = std::max(1u, std::min<unsigned>(threads ? threads : std::thread::hardware_concurrency(),
                                                           static_cast<unsigned>(std::max<std::size_t>(count, 1))));
  std::vector<std::future<void>> jobs;
  for (unsigned w = 0; w < workers; ++w)
    jobs.push_back(std::async(std::launch::async, [&, w] {
      for (std::size_t i = w; i < count; i += workers) out[i] = fn(i);
    }));
  for (auto& j : jobs) j.get();
  return out;
}

struct RunRecord {
  int run_id = 0;
  std::string method;
  ParameterPoint start;
  SolveReport report;
};

struct Location {
  ParameterPoint point;
  std::vector<int> runs;
  std::optional<DegeneracyCertificate> certificate;
  std::string note;
};

struct RunResult {
  std::string command;
  std::string family;
  std::size_t d = 0;
  int exit_code = exit_code::ok;
  std::vector<RunRecord> runs;
  std::vector<Location> locations;
  std::vector<ScanCell> candidates;
  std::vector<ScanCell> inconclusive;
  std::optional<DegeneracyCertificate> certificate;  // certify only
};

/// 0 when every run converged; otherwise the most telling failure.
inline int exit_status(const std::vector<Outcome>& outcomes) {
  auto any = [&](Outcome o) { return std::find(outcomes.begin(), outcomes.end(), o) != outcomes.end(); };
  if (any(Outcome::AvoidedCrossing)) return exit_code::avoided_crossing;
  if (any(Outcome::NotConverging)) return exit_code::not_converging;
  if (any(Outcome::BudgetExhausted)) return exit_code::budget_exhausted;
  return exit_code::ok;
}

namespace detail {

inline std::vector<Location> merge_converged(const MatrixFamily& family, const MultiplicityMode& mode,
                                             const std::vector<RunRecord>& runs, double radius = 1e-6) {
  std::vector<Location> locs;
  for (const auto& run : runs) {
    if (run.report.outcome != Outcome::Converged) continue;
    auto it = std::find_if(locs.begin(), locs.end(),
                           [&](const Location& l) { return l.point.distance(run.report.final) <= radius; });
    if (it != locs.end()) {
      it->runs.push_back(run.run_id);
      continue;
    }
    Location l;
    l.point = run.report.final;
    l.runs.push_back(run.run_id);
    try {
      l.certificate = certify(family, l.point, mode.with_pair(run.report.pair_index));
    } catch (const NotADegeneracy& e) {
      l.note = e.what();
    }
    locs.push_back(std::move(l));
  }
  return locs;
}

inline std::vector<Outcome> outcomes_of(const std::vector<RunRecord>& runs, std::string_view method) {
  std::vector<Outcome> o;
  for (const auto& r : runs)
    if (r.method == method) o.push_back(r.report.outcome);
  return o;
}

}  // namespace detail

/// Multi-start solve; converged points merged within 1e-6 and certified.
inline RunResult run_locate(const RunConfig& config) {
  const MatrixFamily family = load_run_family(config.family);
  const MultiplicityMode mode = resolve_mode(config, family);
  config.solver.validate();
  const auto starts = sample_starts(config.starts, family.d());

  RunResult out;
  out.command = "locate";
  out.family = family.name();
  out.d = family.d();
  out.runs = parallel_map<RunRecord>(starts.size(), config.threads, [&](std::size_t i) {
    return RunRecord{static_cast<int>(i), "newton", starts[i], solve(family, starts[i], mode, config.solver)};
  });
  out.locations = detail::merge_converged(family, mode, out.runs);
  out.exit_code = exit_status(detail::outcomes_of(out.runs, "newton"));
  return out;
}

/// Berry-loop grid scan; each candidate cell is refined by a solve from its centre.
inline RunResult run_scan(const RunConfig& config) {
  const MatrixFamily family = load_run_family(config.family);
  if (family.d() != 2) throw UsageError("scan needs a two-parameter family");
  const MultiplicityMode mode = resolve_mode(config, family);
  config.solver.validate();

  Box region{{-std::numbers::pi, -std::numbers::pi}, {std::numbers::pi, std::numbers::pi}};
  if (!config.region.empty()) {
    if (config.region.size() != 2) throw UsageError("scan region needs two intervals");
    region.lo = {config.region[0].first, config.region[1].first};
    region.hi = {config.region[0].second, config.region[1].second};
  }
  const std::size_t k = config.pair.value_or(1);

  RunResult out;
  out.command = "scan";
  out.family = family.name();
  out.d = family.d();
  const ScanResult scan = grid_scan(family, region, config.resolution, k, config.samples_per_side, config.threads);
  out.candidates = scan.candidates;
  out.inconclusive = scan.inconclusive;
  // Seeds: candidate centres, then distinct points where a cell boundary ran
  // into a closed gap (a degeneracy sitting on the grid itself).
  std::vector<ParameterPoint> seeds;
  for (const auto& c : out.candidates) seeds.push_back(c.center());
  for (const auto& c : out.inconclusive) {
    if (!c.collapse_at) continue;
    const bool seen = std::any_of(seeds.begin(), seeds.end(),
                                  [&](const ParameterPoint& s) { return s.distance(*c.collapse_at) <= 1e-6; });
    if (!seen) seeds.push_back(*c.collapse_at);
  }
  const MultiplicityMode fixed = mode.with_pair(k);
  out.runs = parallel_map<RunRecord>(seeds.size(), config.threads, [&](std::size_t i) {
    return RunRecord{static_cast<int>(i), "newton", seeds[i], solve(family, seeds[i], fixed, config.solver)};
  });
  out.locations = detail::merge_converged(family, fixed, out.runs);
  out.exit_code = exit_status(detail::outcomes_of(out.runs, "newton"));
  return out;
}

/// Both methods from every start, sharing run ids so traces line up.
inline RunResult run_compare(const RunConfig& config) {
  const MatrixFamily family = load_run_family(config.family);
  const MultiplicityMode mode = resolve_mode(config, family);
  config.solver.validate();
  const BaselineConfig bcfg = config.baseline.value_or(BaselineConfig{});
  bcfg.validate();
  const auto starts = sample_starts(config.starts, family.d());

  RunResult out;
  out.command = "compare";
  out.family = family.name();
  out.d = family.d();
  auto pairs = parallel_map<std::pair<RunRecord, RunRecord>>(starts.size(), config.threads, [&](std::size_t i) {
    const int id = static_cast<int>(i);
    SolveReport newton = solve(family, starts[i], mode, config.solver);
    const std::size_t k = resolve_pair_index(eigensystem(family, starts[i]), mode);
    SolveReport quasi = minimize_gap_squared(family, starts[i], k, bcfg);
    return std::pair{RunRecord{id, "newton", starts[i], std::move(newton)},
                     RunRecord{id, "baseline", starts[i], std::move(quasi)}};
  });
  for (auto& [a, b] : pairs) {
    out.runs.push_back(std::move(a));
    out.runs.push_back(std::move(b));
  }
  out.exit_code = exit_status(detail::outcomes_of(out.runs, "newton"));
  return out;
}

/// Certificate at a user-supplied point; NotADegeneracy maps to exit 3.
inline RunResult run_certify(const RunConfig& config, const ParameterPoint& point) {
  const MatrixFamily family = load_run_family(config.family);
  const MultiplicityMode mode = resolve_mode(config, family);
  if (point.size() != family.d()) throw UsageError("point dimension does not match the family");
  RunResult out;
  out.command = "certify";
  out.family = family.name();
  out.d = family.d();
  out.certificate = certify(family, point, mode);
  return out;
}

namespace detail {

inline void write_cell(std::ostream& out, std::string_view type, const ScanCell& c) {
  out << "{\"type\":" << json_string(type) << ",\"ix\":" << c.ix << ",\"iy\":" << c.iy << ",\"lo\":["
      << json_number(c.bounds.lo[0]) << ',' << json_number(c.bounds.lo[1]) << "],\"hi\":["
      << json_number(c.bounds.hi[0]) << ',' << json_number(c.bounds.hi[1]) << "],\"rotation\":"
      << json_string(to_string(c.rotation)) << ",\"note\":" << json_string(c.note)
      << ",\"collapse_at\":" << (c.collapse_at ? json_array(*c.collapse_at) : "null") << "}\n";
}

}  // namespace detail

/// Summary, scan-cell, location and certificate records as JSON lines.
inline void write_summary_records(std::ostream& out, const RunResult& r) {
  for (const auto& run : r.runs) {
    const auto& rep = run.report;
    out << "{\"type\":\"summary\",\"run_id\":" << run.run_id << ",\"method\":" << json_string(run.method)
        << ",\"start\":" << json_array(run.start) << ",\"outcome\":" << json_string(to_string(rep.outcome))
        << ",\"final\":" << json_array(rep.final) << ",\"final_gap\":" << json_number(rep.final_gap)
        << ",\"min_gap\":" << json_number(rep.min_gap()) << ",\"pair\":" << rep.pair_index
        << ",\"iterations\":" << rep.trace.size() << ",\"evaluations\":" << rep.evaluations
        << ",\"note\":" << json_string(rep.note);
    if (rep.diagnostics)
      out << ",\"diagnostics\":{\"det_j\":" << json_number(rep.diagnostics->det_j)
          << ",\"cond_j\":" << json_number(rep.diagnostics->cond_j)
          << ",\"hessian_eigenvalues\":" << json_array(rep.diagnostics->hessian_eigenvalues) << "}";
    out << "}\n";
  }
  for (const auto& c : r.candidates) detail::write_cell(out, "candidate", c);
  for (const auto& c : r.inconclusive) detail::write_cell(out, "inconclusive", c);
  for (std::size_t i = 0; i < r.locations.size(); ++i) {
    const auto& l = r.locations[i];
    out << "{\"type\":\"location\",\"index\":" << i << ",\"point\":" << json_array(l.point) << ",\"runs\":[";
    for (std::size_t j = 0; j < l.runs.size(); ++j) out << (j ? "," : "") << l.runs[j];
    out << "],\"certificate\":" << (l.certificate ? certificate_json(*l.certificate) : "null")
        << ",\"note\":" << json_string(l.note) << "}\n";
  }
  if (r.certificate) out << "{\"type\":\"certificate\",\"certificate\":" << certificate_json(*r.certificate) << "}\n";
}

/// Iteration records ordered by (run_id, method, iter). Trace-json-lines also
/// carries the summary records; CSV holds iterations only.
inline void write_trace(std::ostream& out, const RunResult& r, TraceFormat format) {
  std::vector<const RunRecord*> order;
  for (const auto& run : r.runs) order.push_back(&run);
  std::stable_sort(order.begin(), order.end(), [](const RunRecord* a, const RunRecord* b) { return a->run_id < b->run_id; });
  if (format == TraceFormat::Csv) write_csv_header(out, r.d);
  for (const RunRecord* run : order)
    for (const auto& row : rows_from(run->run_id, run->method, run->report)) {
      if (format == TraceFormat::Csv) write_csv_row(out, row);
      else write_json_row(out, row);
    }
  if (format == TraceFormat::JsonLines) write_summary_records(out, r);
}

/// Short human-readable report.
inline void describe(std::ostream& out, const RunResult& r) {
  out << r.command << " on " << r.family << "\n";
  for (const auto& run : r.runs) {
    const auto& rep = run.report;
    out << "  run " << run.run_id << " [" << run.method << "] " << to_string(rep.outcome) << " after "
        << rep.trace.size() << " records, gap " << format_number(rep.final_gap) << ", at "
        << json_array(rep.final);
    if (!rep.note.empty()) out << " (" << rep.note << ")";
    out << "\n";
  }
  if (r.command == "scan")
    out << "  " << r.candidates.size() << " candidate cell(s), " << r.inconclusive.size() << " inconclusive\n";
  for (std::size_t i = 0; i < r.locations.size(); ++i) {
    const auto& l = r.locations[i];
    out << "  location " << i << " " << json_array(l.point) << " from " << l.runs.size() << " run(s)";
    if (l.certificate)
      out << ", det J " << format_number(l.certificate->det_j) << ", "
          << (l.certificate->nondegenerate ? "non-degenerate" : "degenerate");
    else if (!l.note.empty())
      out << ", " << l.note;
    out << "\n";
  }
  if (r.certificate)
    out << "  certificate " << certificate_json(*r.certificate) << "\n";
}

}  // namespace conical
