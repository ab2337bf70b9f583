#pragma once

#include <charconv>
#include <cmath>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "conical/diagnostics.hpp"
#include "conical/solver.hpp"

namespace conical {

enum class TraceFormat { JsonLines, Csv };

inline std::string_view to_string(TraceFormat f) { return f == TraceFormat::Csv ? "csv" : "trace-json-lines"; }

inline TraceFormat trace_format_from_string(std::string_view s) {
  if (s == "trace-json-lines" || s == "jsonl" || s == "json-lines") return TraceFormat::JsonLines;
  if (s == "csv") return TraceFormat::Csv;
  throw Error("unknown output format '" + std::string(s) + "' (expected trace-json-lines or csv)");
}

/// Shortest decimal string that parses back to exactly `v`.
inline std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

/// JSON has no non-finite literals; those become null.
inline std::string json_number(double v) { return std::isfinite(v) ? format_number(v) : "null"; }

inline std::string json_string(std::string_view s) { return nlohmann::json(std::string(s)).dump(); }

inline std::string json_array(const ParameterPoint& p) {
  std::string s = "[";
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (i) s += ',';
    s += json_number(p[i]);
  }
  return s + "]";
}

inline std::string json_array(const RVector& v) { return json_array(ParameterPoint(v)); }

inline double parse_number(std::string_view s) {
  if (s == "nan" || s == "null" || s.empty()) return nan();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw Error("malformed number '" + std::string(s) + "'");
  return v;
}

/// One serialized iteration, as read back from a trace file.
struct TraceRow {
  int run_id = 0;
  std::string method;
  int iter = 0;
  std::vector<double> point;
  double gap = 0.0;
  std::optional<double> gap2;
  double step_norm = 0.0;
  double det_j = 0.0;
  double cond_j = 0.0;
  bool pinv_used = false;
  long evaluations = 0;
  double error = 0.0;
};

/// Iteration records of one solve, tagged for the output sink. `error` is the
/// distance of each iterate to the final point when the run converged.
inline std::vector<TraceRow> rows_from(int run_id, std::string_view method, const SolveReport& report) {
  std::vector<TraceRow> rows;
  const bool known = report.outcome == Outcome::Converged;
  for (const auto& rec : report.trace) {
    TraceRow r;
    r.run_id = run_id;
    r.method = std::string(method);
    r.iter = rec.index;
    r.point.assign(rec.point.coords().data(), rec.point.coords().data() + rec.point.size());
    r.gap = rec.gap;
    r.gap2 = rec.second_gap;
    r.step_norm = rec.step_norm;
    r.det_j = rec.det_j;
    r.cond_j = rec.cond_j;
    r.pinv_used = rec.used_pseudoinverse;
    r.evaluations = rec.evaluations;
    r.error = known ? rec.point.distance(report.final) : nan();
    rows.push_back(std::move(r));
  }
  return rows;
}

inline void write_json_row(std::ostream& out, const TraceRow& r) {
  out << "{\"type\":\"iteration\",\"run_id\":" << r.run_id << ",\"method\":" << json_string(r.method)
      << ",\"iter\":" << r.iter << ",\"point\":[";
  for (std::size_t i = 0; i < r.point.size(); ++i) out << (i ? "," : "") << json_number(r.point[i]);
  out << "],\"gap\":" << json_number(r.gap) << ",\"gap2\":" << (r.gap2 ? json_number(*r.gap2) : "null")
      << ",\"step_norm\":" << json_number(r.step_norm) << ",\"det_j\":" << json_number(r.det_j)
      << ",\"cond_j\":" << json_number(r.cond_j) << ",\"pinv_used\":" << (r.pinv_used ? "true" : "false")
      << ",\"evaluations\":" << r.evaluations << ",\"error\":" << json_number(r.error) << "}\n";
}

inline void write_csv_header(std::ostream& out, std::size_t d) {
  out << "run_id,method,iter";
  for (std::size_t i = 0; i < d; ++i) out << ",x" << i;
  out << ",gap,gap2,step_norm,det_j,cond_j,pinv_used,evaluations,error\n";
}

inline void write_csv_row(std::ostream& out, const TraceRow& r) {
  out << r.run_id << ',' << r.method << ',' << r.iter;
  for (double x : r.point) out << ',' << format_number(x);
  out << ',' << format_number(r.gap) << ',' << (r.gap2 ? format_number(*r.gap2) : "") << ','
      << format_number(r.step_norm) << ',' << format_number(r.det_j) << ',' << format_number(r.cond_j) << ','
      << (r.pinv_used ? 1 : 0) << ',' << r.evaluations << ',' << format_number(r.error) << '\n';
}

namespace detail {

inline double json_value(const nlohmann::json& j) {
  if (j.is_null()) return nan();
  if (!j.is_number()) throw SchemaError("expected a number in trace record");
  return j.get<double>();
}

inline std::vector<std::string> split(std::string_view line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    out.emplace_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

}  // namespace detail

/// Iteration rows of a trace-json-lines stream; other record types are skipped.
inline std::vector<TraceRow> read_json_rows(std::istream& in) {
  std::vector<TraceRow> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto j = nlohmann::json::parse(line);
    if (j.value("type", "") != "iteration") continue;
    TraceRow r;
    r.run_id = j.at("run_id").get<int>();
    r.method = j.at("method").get<std::string>();
    r.iter = j.at("iter").get<int>();
    for (const auto& x : j.at("point")) r.point.push_back(detail::json_value(x));
    r.gap = detail::json_value(j.at("gap"));
    if (!j.at("gap2").is_null()) r.gap2 = detail::json_value(j.at("gap2"));
    r.step_norm = detail::json_value(j.at("step_norm"));
    r.det_j = detail::json_value(j.at("det_j"));
    r.cond_j = detail::json_value(j.at("cond_j"));
    r.pinv_used = j.at("pinv_used").get<bool>();
    r.evaluations = j.at("evaluations").get<long>();
    r.error = detail::json_value(j.at("error"));
    rows.push_back(std::move(r));
  }
  return rows;
}

inline std::vector<TraceRow> read_csv_rows(std::istream& in) {
  std::vector<TraceRow> rows;
  std::string line;
  if (!std::getline(in, line)) return rows;
  const auto header = detail::split(line, ',');
  if (header.size() < 11 || header[0] != "run_id") throw SchemaError("not a trace csv header");
  const std::size_t d = header.size() - 11;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = detail::split(line, ',');
    if (f.size() != header.size()) throw SchemaError("csv row has " + std::to_string(f.size()) + " fields");
    TraceRow r;
    r.run_id = std::stoi(f[0]);
    r.method = f[1];
    r.iter = std::stoi(f[2]);
    for (std::size_t i = 0; i < d; ++i) r.point.push_back(parse_number(f[3 + i]));
    std::size_t c = 3 + d;
    r.gap = parse_number(f[c++]);
    if (!f[c].empty()) r.gap2 = parse_number(f[c]);
    ++c;
    r.step_norm = parse_number(f[c++]);
    r.det_j = parse_number(f[c++]);
    r.cond_j = parse_number(f[c++]);
    r.pinv_used = f[c++] == "1";
    r.evaluations = std::stol(f[c++]);
    r.error = parse_number(f[c++]);
    rows.push_back(std::move(r));
  }
  return rows;
}

inline std::string certificate_json(const DegeneracyCertificate& c) {
  std::ostringstream s;
  s << "{\"point\":" << json_array(c.point) << ",\"pair\":" << c.pair_index << ",\"gap\":" << json_number(c.gap)
    << ",\"det_j\":" << json_number(c.det_j) << ",\"cond_j\":" << json_number(c.cond_j)
    << ",\"hessian_eigenvalues\":" << json_array(c.hessian_eigenvalues)
    << ",\"fd_hessian_residual\":" << json_number(c.fd_hessian_residual)
    << ",\"nondegenerate\":" << (c.nondegenerate ? "true" : "false") << "}";
  return s.str();
}

}  // namespace conical
