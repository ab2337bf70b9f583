#include <numbers>
#include <sstream>

#include <gtest/gtest.h>

#include "conical/run.hpp"
#include "oracles.hpp"

using namespace conical;
using std::numbers::pi;

namespace {

RunConfig builtin_config(const std::string& name, ParamMap params = {}) {
  RunConfig c;
  c.family.builtin = name;
  c.family.params = std::move(params);
  return c;
}

std::string render(const RunResult& r, TraceFormat f) {
  std::ostringstream s;
  write_trace(s, r, f);
  return s.str();
}

bool same(double a, double b) { return (std::isnan(a) && std::isnan(b)) || a == b; }

}  // namespace

TEST(Parse, Scalars) {
  EXPECT_DOUBLE_EQ(parse_scalar("1.5"), 1.5);
  EXPECT_DOUBLE_EQ(parse_scalar("-2e-3"), -2e-3);
  EXPECT_DOUBLE_EQ(parse_scalar("pi"), pi);
  EXPECT_DOUBLE_EQ(parse_scalar("-pi/2"), -pi / 2);
  EXPECT_DOUBLE_EQ(parse_scalar("0.8pi"), 0.8 * pi);
  EXPECT_DOUBLE_EQ(parse_scalar("1.2*pi"), 1.2 * pi);
  EXPECT_DOUBLE_EQ(parse_scalar("2pi/3"), 2 * pi / 3);
  EXPECT_DOUBLE_EQ(parse_scalar("pi/3+0.5"), pi / 3 + 0.5);
  EXPECT_DOUBLE_EQ(parse_scalar("pi/3 - 0.5"), pi / 3 - 0.5);
  EXPECT_DOUBLE_EQ(parse_scalar("1e-4"), 1e-4);
  for (const char* bad : {"", "abc", "pi*2", "1..2", "pi/"}) EXPECT_THROW(parse_scalar(bad), UsageError) << bad;
}

TEST(Parse, PointsAndIntervals) {
  const auto pts = parse_point_list("0.8pi,0.8pi;0.8pi,1.2pi");
  ASSERT_EQ(pts.size(), 2u);
  EXPECT_DOUBLE_EQ(pts[1][1], 1.2 * pi);
  const auto box = parse_intervals("-pi:pi,0:2pi");
  ASSERT_EQ(box.size(), 2u);
  EXPECT_DOUBLE_EQ(box[1].second, 2 * pi);
  EXPECT_THROW(parse_intervals("0-1"), UsageError);
}

TEST(Starts, SampledStartsAreReproducibleAndInside) {
  StartSpec s;
  s.kind = StartSpec::Kind::Box;
  s.box = {{0.0, 1.0}, {-2.0, -1.0}};
  s.count = 50;
  s.seed = 7;
  const auto a = sample_starts(s, 2);
  const auto b = sample_starts(s, 2);
  ASSERT_EQ(a.size(), 50u);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i], b[i]);
    EXPECT_GE(a[i][0], 0.0);
    EXPECT_LT(a[i][0], 1.0);
    EXPECT_GE(a[i][1], -2.0);
    EXPECT_LT(a[i][1], -1.0);
  }
  s.seed = 8;
  EXPECT_NE(sample_starts(s, 2)[0], a[0]);
  EXPECT_THROW(sample_starts(s, 3), UsageError);

  StartSpec c;
  c.kind = StartSpec::Kind::Circle;
  c.center = {1.0, 2.0};
  c.radius = 0.5;
  c.count = 10;
  for (const auto& p : sample_starts(c, 2)) EXPECT_NEAR(p.distance({1.0, 2.0}), 0.5, 1e-15);

  StartSpec d;
  d.kind = StartSpec::Kind::Points;
  d.points = {{1.0, 2.0, 3.0}};
  EXPECT_THROW(sample_starts(d, 2), UsageError);
}

TEST(Config, ParsesAllSections) {
  const auto j = nlohmann::json::parse(R"({
    "family": {"builtin": "graphene", "params": {"p": 0.6}},
    "mode": "InversionSymmetric2D",
    "pair": 1,
    "starts": {"box": [["0.7pi", "0.9pi"], [0, "2pi"]], "count": 4, "seed": 3},
    "solver": {"max_iter": 30, "gap_tol": 1e-11, "max_step_norm": 1.0},
    "baseline": {"max_iter": 99},
    "output": {"path": "out.csv", "format": "csv"},
    "scan": {"region": [[0, "2pi"], [0, "2pi"]], "resolution": 8},
    "threads": 2
  })");
  const auto c = config_from_json(j);
  EXPECT_EQ(c.family.builtin, "graphene");
  EXPECT_EQ(c.family.params.at("p"), 0.6);
  EXPECT_EQ(*c.mode, ModeTag::InversionSymmetric2D);
  EXPECT_EQ(*c.pair, 1u);
  EXPECT_EQ(c.starts.kind, StartSpec::Kind::Box);
  EXPECT_DOUBLE_EQ(c.starts.box[0].first, 0.7 * pi);
  EXPECT_EQ(c.starts.count, 4);
  EXPECT_EQ(c.solver.max_iter, 30);
  EXPECT_EQ(*c.solver.max_step_norm, 1.0);
  EXPECT_EQ(c.baseline->max_iter, 99);
  EXPECT_EQ(c.format, TraceFormat::Csv);
  EXPECT_EQ(c.resolution, 8u);
  EXPECT_EQ(c.threads, 2u);
}

TEST(Config, RejectsUnknownKeysAndBadValues) {
  EXPECT_THROW(config_from_json(nlohmann::json::parse(R"({"famly": {}})")), UsageError);
  EXPECT_THROW(config_from_json(nlohmann::json::parse(R"({"solver": {"maxiter": 3}})")), UsageError);
  EXPECT_THROW(config_from_json(nlohmann::json::parse(R"({"output": {"format": "xml"}})")), Error);
  EXPECT_THROW(config_from_json(nlohmann::json::parse(R"([1, 2])")), UsageError);
  EXPECT_THROW(load_config("/nonexistent/config.json"), UsageError);
}

TEST(Family, SourcesAreExclusive) {
  FamilySource s;
  EXPECT_THROW(load_run_family(s), UsageError);
  s.builtin = "canonical-cone";
  s.file = CONICAL_DATA_DIR "/families/avoided-eps0.json";
  EXPECT_THROW(load_run_family(s), UsageError);
  s.builtin.clear();
  EXPECT_EQ(load_run_family(s).n(), 2u);
  s.file = "/nonexistent.json";
  EXPECT_THROW(load_run_family(s), UsageError);
}

TEST(ExitStatus, Taxonomy) {
  using O = Outcome;
  EXPECT_EQ(exit_status({O::Converged, O::Converged}), 0);
  EXPECT_EQ(exit_status({O::Converged, O::AvoidedCrossing, O::NotConverging}), 2);
  EXPECT_EQ(exit_status({O::NotConverging, O::BudgetExhausted}), 3);
  EXPECT_EQ(exit_status({O::Converged, O::BudgetExhausted}), 4);
}

TEST(Locate, RankOneSeededStarts) {
  auto c = builtin_config("rank-one-4x4");
  c.starts.kind = StartSpec::Kind::Box;
  c.starts.box = {{pi / 3 - 0.5, pi / 3 + 0.5}, {pi / 3 - 0.5, pi / 3 + 0.5}};
  c.starts.count = 20;
  c.starts.seed = 7;
  const auto r = run_locate(c);
  EXPECT_EQ(r.exit_code, 0);
  ASSERT_EQ(r.runs.size(), 20u);
  for (const auto& run : r.runs) EXPECT_LE(run.report.final.distance({pi / 3, pi / 3}), 1e-9);
  ASSERT_EQ(r.locations.size(), 1u);
  EXPECT_EQ(r.locations[0].runs.size(), 20u);
  ASSERT_TRUE(r.locations[0].certificate.has_value());
  EXPECT_TRUE(r.locations[0].certificate->nondegenerate);
}

TEST(Locate, ExitCodes) {
  auto avoided = builtin_config("avoided-2x2", {{"eps", 1e-4}});
  avoided.starts.kind = StartSpec::Kind::Points;
  avoided.starts.points = {{0.3, 0.2}};
  EXPECT_EQ(run_locate(avoided).exit_code, exit_code::avoided_crossing);

  auto below = builtin_config("graphene", {{"p", 0.45}});
  below.starts.kind = StartSpec::Kind::Points;
  below.starts.points = {{0.8 * pi, 0.8 * pi}, {0.8 * pi, 1.2 * pi}};
  EXPECT_EQ(run_locate(below).exit_code, exit_code::not_converging);

  auto budget = builtin_config("rank-one-4x4");
  budget.starts.kind = StartSpec::Kind::Points;
  budget.starts.points = {{1.4, 0.7}};
  budget.solver.max_iter = 1;
  EXPECT_EQ(run_locate(budget).exit_code, exit_code::budget_exhausted);

  EXPECT_THROW(run_locate(builtin_config("graphene")), Error);
  auto wrong_mode = builtin_config("canonical-cone");
  wrong_mode.mode = ModeTag::Triple5D;
  EXPECT_THROW(run_locate(wrong_mode), ModeError);
}

TEST(Locate, FamilyFileMatchesBuiltin) {
  RunConfig c;
  c.family.file = CONICAL_DATA_DIR "/families/triple-5param.json";
  c.starts.kind = StartSpec::Kind::Box;
  c.starts.box.assign(5, {-0.2, 0.2});
  c.starts.count = 5;
  c.starts.seed = 1;
  const auto from_file = run_locate(c);
  c.family = {"triple-5param", {}, ""};
  const auto from_builtin = run_locate(c);
  EXPECT_EQ(from_file.exit_code, 0);
  EXPECT_EQ(render(from_file, TraceFormat::Csv), render(from_builtin, TraceFormat::Csv));
}

TEST(Scan, GrapheneDiracPointsAreMirrorImages) {
  auto c = builtin_config("graphene", {{"p", 0.6}});
  c.region = {{0.0, 2 * pi}, {0.0, 2 * pi}};
  const auto r = run_scan(c);
  EXPECT_EQ(r.exit_code, 0);
  ASSERT_EQ(r.locations.size(), 2u);
  const auto& a = r.locations[0].point;
  const auto& b = r.locations[1].point;
  EXPECT_NEAR(a[0] + b[0], 2 * pi, 1e-9);
  EXPECT_NEAR(a[1] + b[1], 2 * pi, 1e-9);
  for (const auto& l : r.locations) EXPECT_LE(oracle::graphene_residual(0.6, l.point), 1e-10);
}

TEST(Scan, CanonicalConeOnGridVertex) {
  auto c = builtin_config("canonical-cone");
  c.region = {{-1.0, 1.0}, {-1.0, 1.0}};
  const auto r = run_scan(c);
  EXPECT_EQ(r.exit_code, 0);
  ASSERT_EQ(r.locations.size(), 1u);
  EXPECT_LE(r.locations[0].point.coords().norm(), 1e-12);
}

TEST(Scan, NeedsTwoParameters) {
  EXPECT_THROW(run_scan(builtin_config("magnetic-graph-10x10")), UsageError);
}

TEST(Compare, GrapheneSideBySide) {
  auto c = builtin_config("graphene", {{"p", 0.6}});
  c.starts.kind = StartSpec::Kind::Points;
  c.starts.points = {{0.8 * pi, 0.8 * pi}, {0.8 * pi, 1.2 * pi}};
  const auto r = run_compare(c);
  ASSERT_EQ(r.runs.size(), 4u);
  EXPECT_EQ(r.runs[0].method, "newton");
  EXPECT_EQ(r.runs[1].method, "baseline");
  EXPECT_EQ(r.runs[0].run_id, r.runs[1].run_id);
  for (const auto& run : r.runs) EXPECT_EQ(run.report.outcome, Outcome::Converged) << run.method;
  EXPECT_EQ(r.exit_code, 0);
}

TEST(Certify, ReportsCertificate) {
  const auto r = run_certify(builtin_config("rank-one-4x4"), {pi / 3, pi / 3});
  ASSERT_TRUE(r.certificate.has_value());
  EXPECT_TRUE(r.certificate->nondegenerate);
  EXPECT_THROW(run_certify(builtin_config("rank-one-4x4"), {1.0, 1.0}), NotADegeneracy);
  EXPECT_THROW(run_certify(builtin_config("rank-one-4x4"), {1.0}), UsageError);
}

TEST(Trace, NumbersRoundTrip) {
  for (double v : {0.1, 1.0 / 3.0, 1e-300, -2.5e17, 5e-324, pi}) EXPECT_EQ(parse_number(format_number(v)), v);
  EXPECT_EQ(format_number(0.1), "0.1");
  EXPECT_TRUE(std::isnan(parse_number(format_number(nan()))));
}

TEST(Trace, CsvAndJsonCarryIdenticalNumbers) {
  auto c = builtin_config("graphene", {{"p", 0.5}});
  c.starts.kind = StartSpec::Kind::Points;
  c.starts.points = {{0.8 * pi, 0.8 * pi}, {0.8 * pi, 1.2 * pi}};
  const auto r = run_compare(c);
  std::istringstream js(render(r, TraceFormat::JsonLines)), cs(render(r, TraceFormat::Csv));
  const auto a = read_json_rows(js);
  const auto b = read_csv_rows(cs);
  ASSERT_EQ(a.size(), b.size());
  ASSERT_FALSE(a.empty());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].run_id, b[i].run_id);
    EXPECT_EQ(a[i].method, b[i].method);
    EXPECT_EQ(a[i].iter, b[i].iter);
    EXPECT_EQ(a[i].point, b[i].point);
    EXPECT_TRUE(same(a[i].gap, b[i].gap));
    EXPECT_TRUE(same(a[i].step_norm, b[i].step_norm));
    EXPECT_TRUE(same(a[i].det_j, b[i].det_j));
    EXPECT_TRUE(same(a[i].cond_j, b[i].cond_j));
    EXPECT_TRUE(same(a[i].error, b[i].error));
    EXPECT_EQ(a[i].pinv_used, b[i].pinv_used);
    EXPECT_EQ(a[i].evaluations, b[i].evaluations);
  }
  // rows match the in-memory trace exactly
  EXPECT_EQ(a[0].point[0], r.runs[0].report.trace[0].point[0]);
}

TEST(Trace, OrderedByRunThenIteration) {
  auto c = builtin_config("rank-one-4x4");
  c.starts.count = 6;
  c.starts.seed = 3;
  c.threads = 3;
  std::istringstream s(render(run_locate(c), TraceFormat::JsonLines));
  const auto rows = read_json_rows(s);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const bool ordered = rows[i - 1].run_id < rows[i].run_id ||
                         (rows[i - 1].run_id == rows[i].run_id && rows[i - 1].iter < rows[i].iter);
    EXPECT_TRUE(ordered) << i;
  }
}

TEST(Determinism, RepeatedRunsAreByteIdentical) {
  auto c = builtin_config("magnetic-graph-10x10");
  c.pair = 6;
  c.starts.count = 6;
  c.starts.seed = 11;
  c.threads = 1;
  const std::string a = render(run_locate(c), TraceFormat::JsonLines);
  c.threads = 4;
  const std::string b = render(run_locate(c), TraceFormat::JsonLines);
  const std::string d = render(run_locate(c), TraceFormat::JsonLines);
  EXPECT_EQ(a, b);
  EXPECT_EQ(b, d);
}
