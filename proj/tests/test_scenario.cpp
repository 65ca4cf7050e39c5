#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "acdyn/io.hpp"
#include "acdyn/scenario.hpp"

using namespace acdyn;
namespace fs = std::filesystem;

namespace {

json prototype_json() {
  std::ifstream in(fs::path(ACDYN_SCENARIO_DIR) / "prototype.json");
  return json::parse(in);
}

bool has_label(const std::vector<Issue>& issues, const std::string& label) {
  for (const auto& i : issues)
    if (i.label == label) return true;
  return false;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST(Functions, CatalogSamples) {
  const Domain d = make_interval(2.0, 4);
  FunctionSpec lin;
  lin.kind = "linear";
  lin.slope = 3.0;
  lin.offset = -1.0;
  EXPECT_EQ(sample_bulk(d, lin), (Vector(5) << -1.0, 0.5, 2.0, 3.5, 5.0).finished());
  FunctionSpec sn;
  sn.kind = "sine";
  sn.amplitude = 2.0;
  sn.frequency = M_PI;
  sn.phase = 0.5 * M_PI;
  EXPECT_NEAR(sample_bulk(d, sn)[2], -2.0, 1e-14);  // 2 sin(pi + pi/2)
  FunctionSpec th;
  th.kind = "tanh";
  th.amplitude = 1.0;
  th.center = 1.0;
  th.width = 0.5;
  EXPECT_NEAR(sample_bulk(d, th)[4], std::tanh(2.0), 1e-15);
  EXPECT_EQ(sample_bnd(d, th)[0], sample_bulk(d, th)[0]);
  FunctionSpec mod = constant_function(2.0);
  mod.time = "sinusoidal";
  mod.time_amplitude = 0.5;
  mod.time_frequency = 3.0;
  EXPECT_NEAR(sample_bulk(d, mod, 0.7)[1], 2.0 * (1 + 0.5 * std::sin(2.1)), 1e-14);
}

TEST(Functions, RectangleAxisSelection) {
  const Domain d = make_rectangle(1, 2, 2, 2);
  FunctionSpec lin;
  lin.kind = "linear";
  lin.slope = 1.0;
  lin.axis = 1;
  const Vector v = sample_bulk(d, lin);
  for (int i = 0; i < d.num_nodes(); ++i) EXPECT_EQ(v[i], d.nodes[i][1]);
}

TEST(Functions, RejectsUnknownKinds) {
  EXPECT_THROW(function_from_json(json{{"kind", "cubic"}}), ValidationError);
  EXPECT_THROW(function_from_json(json{{"kind", "constant"}, {"time", "weekly"}}), ValidationError);
  EXPECT_THROW(function_from_json(json{{"kind", "tanh"}, {"width", 0.0}}), ValidationError);
  EXPECT_THROW(function_from_json(json("text")), ValidationError);
}

TEST(Scenario, PrototypeValidates) {
  const Scenario s = scenario_from_json(prototype_json());
  EXPECT_TRUE(validate(s).empty());
  const Built b = build_validated(s);
  EXPECT_EQ(b.problem.sys.domain.num_nodes(), 65);
  EXPECT_EQ(b.problem.constraint.k_lo, 0.0);
  EXPECT_EQ(b.problem.cfg.num_steps(), 100);
}

TEST(Scenario, ObstacleOutsideDomainCitesP4) {
  json j = prototype_json();
  j["graphs"]["bulk"] = {{"kind", "obstacle"}, {"lo", -1.0}, {"hi", 1.0}};
  j["data"]["u0"] = 2.0;
  j["constraint"]["k_lo"] = nullptr;
  j["constraint"]["k_hi"] = nullptr;
  const auto issues = validate(scenario_from_json(j));
  ASSERT_EQ(issues.size(), 1u);
  EXPECT_EQ(issues[0].label, "(p4)");
}

TEST(Scenario, ZeroWeightsCiteP2) {
  json j = prototype_json();
  j["constraint"]["w"] = 0.0;
  j["constraint"]["w_gamma"] = 0.0;
  const auto issues = validate(scenario_from_json(j));
  EXPECT_TRUE(has_label(issues, "(p2)"));
  EXPECT_THROW(build_validated(scenario_from_json(j)), ValidationError);
}

TEST(Scenario, UnderstatedLipschitzCitesPilip) {
  json j = prototype_json();
  j["perturbation"]["lip_bnd"] = 0.5;
  EXPECT_TRUE(has_label(validate(scenario_from_json(j)), "(pilip)"));
  j["perturbation"]["lip_bnd"] = -1.0;
  EXPECT_TRUE(has_label(validate(scenario_from_json(j)), "(pilip)"));
}

TEST(Scenario, InfeasibleInitialMassQuotesBound) {
  json j = prototype_json();
  j["data"]["u0"] = 0.25;
  const auto issues = validate(scenario_from_json(j));
  ASSERT_EQ(issues.size(), 1u);
  EXPECT_EQ(issues[0].label, "(p3)");
  EXPECT_NE(issues[0].message.find("above k_hi = 0"), std::string::npos) << issues[0].message;
  j["constraint"]["k_hi"] = 0.5;
  EXPECT_TRUE(validate(scenario_from_json(j)).empty());
}

TEST(Scenario, InconsistentBoundaryDatumCitesInidata) {
  json j = prototype_json();
  j["data"]["u0_gamma"] = 0.0;
  EXPECT_TRUE(has_label(validate(scenario_from_json(j)), "(inidata)"));
}

TEST(Scenario, BadSolverSettingsAreConfigIssues) {
  json j = prototype_json();
  j["solver"]["tau"] = -0.1;
  EXPECT_TRUE(has_label(validate(scenario_from_json(j)), "config"));
  j = prototype_json();
  j["solver"]["mode"] = "explicit";
  EXPECT_THROW(scenario_from_json(j), ValidationError);
  j = prototype_json();
  j["graphs"]["bulk"] = {{"kind", "power_odd"}, {"a", 1.0}, {"p", 2}};
  EXPECT_THROW(scenario_from_json(j), ValidationError);
  j = prototype_json();
  j["domain"] = 3;
  EXPECT_THROW(scenario_from_json(j), ValidationError);
  j = prototype_json();
  j["domain"]["nx"] = 1.5;
  EXPECT_THROW(scenario_from_json(j), ValidationError);
}

TEST(Scenario, MalformedFileIsConfigError) {
  const fs::path p = fs::temp_directory_path() / "acdyn_bad_scenario.json";
  std::ofstream(p) << "{ not json";
  try {
    load_scenario(p.string());
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_EQ(e.label(), "config");
  }
  fs::remove(p);
  EXPECT_THROW(load_scenario("/nonexistent/scenario.json"), ValidationError);
}

TEST(Scenario, RoundTripIsExact) {
  json j = prototype_json();
  j["graphs"]["boundary"] = {{"kind", "piecewise_linear"},
                             {"knots", {{{"x", 0.0}, {"lo", -0.7}, {"hi", 1.3}}, {{"x", 1.0}, {"y", 2.0}}}},
                             {"slope_left", 0.5},
                             {"slope_right", 3.0}};
  j["data"]["f"] = {{"kind", "sine"}, {"amplitude", 0.1}, {"frequency", 1.0 / 3.0}, {"time", {{"kind", "sinusoidal"}, {"amplitude", 0.2}}}};
  j["constraint"]["k_lo"] = -0.1;
  j["constraint"]["k_hi"] = nullptr;
  j["solver"]["eps"] = 0.1 / 3.0;
  const Scenario s = scenario_from_json(j);
  const json once = to_json(s);
  const Scenario back = scenario_from_json(json::parse(once.dump()));
  EXPECT_EQ(to_json(back), once);
  EXPECT_EQ(back.solver.eps, s.solver.eps);
  EXPECT_EQ(validate(back).size(), validate(s).size());
  EXPECT_TRUE(std::isinf(back.k_hi));
}

TEST(Scenario, SameExceptData) {
  const Scenario a = scenario_from_json(prototype_json());
  json j = prototype_json();
  j["data"]["f"] = 0.31;
  j["output"]["dir"] = "elsewhere";
  EXPECT_TRUE(same_except_data(a, scenario_from_json(j)));
  j["solver"]["tau"] = 0.02;
  EXPECT_FALSE(same_except_data(a, scenario_from_json(j)));
}

TEST(Output, SeriesIsDeterministic) {
  json j = prototype_json();
  j["domain"]["nx"] = 16;
  j["solver"]["final_time"] = 0.2;
  const fs::path dir = fs::temp_directory_path() / "acdyn_det";
  fs::create_directories(dir);
  for (const char* name : {"a.csv", "b.csv"}) {
    const Built b = build_validated(scenario_from_json(j));
    io::write_series(dir / name, run(b.problem, b.u0, b.f));
  }
  const std::string a = slurp(dir / "a.csv");
  EXPECT_EQ(a, slurp(dir / "b.csv"));
  EXPECT_EQ(a.substr(0, a.find('\n')), "t,energy,mass,lambda,res_bulk,res_bnd");
  fs::remove_all(dir);
}

TEST(Output, SnapshotHeadersAndArcLength) {
  const fs::path dir = fs::temp_directory_path() / "acdyn_snap";
  fs::create_directories(dir);
  const Domain d = make_rectangle(1, 1, 2, 2);
  io::write_snapshot(dir / "b.csv", dir / "g.csv", d, constant_field(d, 0.1));
  const std::string bulk = slurp(dir / "b.csv"), bnd = slurp(dir / "g.csv");
  EXPECT_EQ(bulk.substr(0, bulk.find('\n')), "x,y,u");
  EXPECT_EQ(bnd.substr(0, bnd.find('\n')), "s,u_gamma");
  EXPECT_NE(bulk.find("0.10000000000000001"), std::string::npos);  // 17 significant digits
  EXPECT_EQ(io::snapshot_name(25), "snap_000025");
  fs::remove_all(dir);
}
