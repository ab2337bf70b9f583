// Command-line front end for the conical-point locator.

#include <fstream>
#include <iostream>

#include "CLI11.hpp"

#include "conical/run.hpp"

using namespace conical;

namespace {

struct Overrides {
  std::string config;
  std::string family;
  std::string family_file;
  std::vector<std::string> params;
  std::string mode;
  std::optional<std::size_t> pair;
  std::string starts;
  std::string box;
  std::string circle;
  std::optional<int> count;
  std::optional<std::uint64_t> seed;
  std::optional<int> max_iter;
  std::string out;
  std::string format;
  std::optional<unsigned> threads;
  // scan
  std::string region;
  std::optional<std::size_t> resolution;
  std::optional<int> samples;
  // compare
  std::optional<int> baseline_max_iter;
  // certify
  std::string point;
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config, "JSON run configuration; flags below override it");
  cmd->add_option("--family", o.family, "builtin family name (see list-builtins)");
  cmd->add_option("--family-file", o.family_file, "family description file");
  cmd->add_option("--param", o.params, "builtin parameter, e.g. --param p=0.6 (repeatable)");
  cmd->add_option("--mode", o.mode, "Double2D, InversionSymmetric2D, HermitianDouble3D or Triple5D");
  cmd->add_option("--pair", o.pair, "1-based index of the lowest eigenvalue of the group");
  cmd->add_option("--max-iter", o.max_iter, "iteration budget per solve");
  cmd->add_option("--out", o.out, "trace output file (stdout if omitted)");
  cmd->add_option("--format", o.format, "trace-json-lines or csv");
  cmd->add_option("--threads", o.threads, "worker threads (0 = hardware concurrency)");
}

void add_starts(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--starts", o.starts, "explicit starts, e.g. \"0.8pi,0.8pi;0.8pi,1.2pi\"");
  cmd->add_option("--box", o.box, "sample starts uniformly in a box, e.g. \"-pi:pi,-pi:pi\"");
  cmd->add_option("--circle", o.circle, "sample starts on a circle, \"cx,cy:radius\"");
  cmd->add_option("--count", o.count, "number of sampled starts");
  cmd->add_option("--seed", o.seed, "sampler seed");
}

RunConfig build_config(const Overrides& o) {
  RunConfig c = o.config.empty() ? RunConfig{} : load_config(o.config);
  if (!o.family.empty()) {
    c.family.builtin = o.family;
    c.family.file.clear();
  }
  if (!o.family_file.empty()) {
    c.family.file = o.family_file;
    c.family.builtin.clear();
  }
  for (const auto& p : o.params) {
    const auto eq = p.find('=');
    if (eq == std::string::npos || eq == 0) throw UsageError("--param expects name=value, got '" + p + "'");
    c.family.params[p.substr(0, eq)] = parse_scalar(p.substr(eq + 1));
  }
  if (!o.mode.empty()) c.mode = mode_from_string(o.mode);
  if (o.pair) c.pair = *o.pair;
  if (!o.starts.empty()) {
    c.starts.kind = StartSpec::Kind::Points;
    c.starts.points = parse_point_list(o.starts);
  }
  if (!o.box.empty()) {
    c.starts.kind = StartSpec::Kind::Box;
    c.starts.box = parse_intervals(o.box);
  }
  if (!o.circle.empty()) {
    const auto parts = detail::split(o.circle, ':');
    if (parts.size() != 2) throw UsageError("--circle expects cx,cy:radius");
    c.starts.kind = StartSpec::Kind::Circle;
    c.starts.center = parse_point(parts[0]);
    c.starts.radius = parse_scalar(parts[1]);
  }
  if (o.count) c.starts.count = *o.count;
  if (o.seed) c.starts.seed = *o.seed;
  if (o.max_iter) c.solver.max_iter = *o.max_iter;
  if (!o.out.empty()) c.out_path = o.out;
  if (!o.format.empty()) c.format = trace_format_from_string(o.format);
  if (o.threads) c.threads = *o.threads;
  if (!o.region.empty()) c.region = parse_intervals(o.region);
  if (o.resolution) c.resolution = *o.resolution;
  if (o.samples) c.samples_per_side = *o.samples;
  if (o.baseline_max_iter) {
    if (!c.baseline) c.baseline = BaselineConfig{};
    c.baseline->max_iter = *o.baseline_max_iter;
  }
  return c;
}

void emit(const RunResult& result, const RunConfig& config) {
  if (config.out_path.empty()) {
    write_trace(std::cout, result, config.format);
    describe(std::cerr, result);
    return;
  }
  std::ofstream out(config.out_path, std::ios::binary);
  if (!out) throw UsageError("cannot write '" + config.out_path + "'");
  write_trace(out, result, config.format);
  if (config.format == TraceFormat::Csv) {
    std::ofstream summary(config.out_path + ".summary.jsonl", std::ios::binary);
    if (!summary) throw UsageError("cannot write '" + config.out_path + ".summary.jsonl'");
    write_summary_records(summary, result);
  }
  describe(std::cout, result);
}

void list_builtins() {
  for (const auto& b : builtin_catalog()) {
    std::cout << b.name << "  n=" << b.n << " d=" << b.d;
    if (!b.required_params.empty()) {
      std::cout << "  requires:";
      for (const auto& p : b.required_params) std::cout << ' ' << p;
    }
    if (!b.optional_params.empty()) {
      std::cout << "  optional:";
      for (const auto& p : b.optional_params) std::cout << ' ' << p;
    }
    std::cout << "\n    " << b.description << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Locate conical points of parametric Hermitian matrix families"};
  app.require_subcommand(1);
  Overrides o;

  auto* locate = app.add_subcommand("locate", "multi-start Newton search for degeneracies");
  add_common(locate, o);
  add_starts(locate, o);

  auto* scan = app.add_subcommand("scan", "Berry-loop grid scan of a two-parameter family, refined by Newton");
  add_common(scan, o);
  scan->add_option("--region", o.region, "scan box, e.g. \"-pi:pi,-pi:pi\"");
  scan->add_option("--resolution", o.resolution, "cells per side");
  scan->add_option("--samples", o.samples, "loop samples per cell side");

  auto* cert = app.add_subcommand("certify", "non-degeneracy certificate at a given degeneracy");
  add_common(cert, o);
  cert->add_option("--point", o.point, "parameter point, e.g. \"pi/3,pi/3\"")->required();

  auto* compare = app.add_subcommand("compare", "Newton against the quasi-Newton gap minimizer");
  add_common(compare, o);
  add_starts(compare, o);
  compare->add_option("--baseline-max-iter", o.baseline_max_iter, "baseline iteration budget");

  app.add_subcommand("list-builtins", "list the builtin families");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : exit_code::usage;
  }

  try {
    if (app.got_subcommand("list-builtins")) {
      list_builtins();
      return exit_code::ok;
    }
    const RunConfig config = build_config(o);
    RunResult result;
    if (locate->parsed()) result = run_locate(config);
    else if (scan->parsed()) result = run_scan(config);
    else if (compare->parsed()) result = run_compare(config);
    else result = run_certify(config, parse_point(o.point));
    emit(result, config);
    return result.exit_code;
  } catch (const NotADegeneracy& e) {
    std::cerr << "not a degeneracy: " << e.what() << "\n";
    return exit_code::not_converging;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code::usage;
  }
}
