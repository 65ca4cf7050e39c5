#include <gtest/gtest.h>

#include <random>

#include "acdyn/diagnostics.hpp"
#include "fixtures.hpp"

using namespace acdyn;

TEST(Energy, ZeroFieldIsZero) {
  const DiscreteSystem s = assemble(make_rectangle(1, 1, 4, 4));
  const auto e = energy(s, {graphs::PowerOdd{1, 3}, graphs::Obstacle{-1, 1}}, {0.1, 2.0, 1.0}, constant_field(s.domain, 0.0));
  EXPECT_EQ(e.total, 0.0);
  EXPECT_TRUE(e.finite);
}

TEST(Energy, UnitConstantWithLinearGraph) {
  const DiscreteSystem s = assemble(make_interval(1.0, 10));
  const auto e = energy(s, {graphs::Linear{1}, graphs::Linear{1}}, {1.0, 1.0, 1.0}, constant_field(s.domain, 1.0));
  EXPECT_EQ(e.grad_bulk, 0.0);
  EXPECT_EQ(e.grad_bnd, 0.0);
  EXPECT_NEAR(e.envelope_bulk, 0.25, 1e-15);
  EXPECT_NEAR(e.quad_bulk_eps, 0.5, 1e-15);
  EXPECT_NEAR(e.envelope_bnd, 0.5, 1e-15);
  EXPECT_NEAR(e.quad_bnd_eps, 1.0, 1e-15);
  EXPECT_NEAR(e.total, 2.25, 1e-14);
}

TEST(Energy, MatchesDirectSummation) {
  const Domain d = make_rectangle(1, 0.5, 6, 3);
  const DiscreteSystem s = assemble(d);
  std::mt19937 rng(31);
  std::normal_distribution<double> g;
  Vector v(d.num_nodes());
  for (auto& x : v) x = g(rng);
  const CoupledField u = from_bulk(d, v);
  const double eps = 0.2, rho = 1.5, kappa = 0.7;
  const auto e = energy(s, {graphs::PowerOdd{1, 3}, graphs::Linear{2}}, {eps, rho, kappa}, u);

  // envelopes: cubic via its resolvent, linear in closed form a r^2 / (2 (1 + eps a))
  const oracle::CubicYosida cubic{1.0, eps};
  const double eg = eps * rho;
  double expected = 0.0;
  for (int i = 0; i < d.num_nodes(); ++i) {
    const double r = v[i], j = cubic.resolvent(r), b = cubic.value(r);
    expected += s.m_bulk[i] * (0.5 * eps * b * b + 0.25 * j * j * j * j + 0.5 * eps * r * r);
  }
  for (int k = 0; k < d.num_boundary(); ++k) {
    const double r = u.bnd[k];
    expected += s.m_bnd[k] * (2.0 * r * r / (2.0 * (1.0 + eg * 2.0)) + 0.5 * eps * r * r);
  }
  // exact gradient integrals of the bilinear interpolant, cell by cell:
  // int_0^1 (p (1 - t) + q t)^2 dt = (p^2 + p q + q^2) / 3
  const double hx = 1.0 / 6, hy = 0.5 / 3;
  auto at = [&](int ix, int iy) { return v[iy * 7 + ix]; };
  auto mix = [](double p, double q) { return (p * p + p * q + q * q) / 3.0; };
  for (int iy = 0; iy < 3; ++iy)
    for (int ix = 0; ix < 6; ++ix) {
      const double px = at(ix + 1, iy) - at(ix, iy), qx = at(ix + 1, iy + 1) - at(ix, iy + 1);
      const double py = at(ix, iy + 1) - at(ix, iy), qy = at(ix + 1, iy + 1) - at(ix + 1, iy);
      expected += 0.5 * (hy / hx * mix(px, qx) + hx / hy * mix(py, qy));
    }
  for (int k = 0; k < d.num_boundary(); ++k) {
    const auto& p = d.nodes[d.boundary[k]];
    const auto& q = d.nodes[d.boundary[(k + 1) % d.num_boundary()]];
    const double len = std::hypot(q[0] - p[0], q[1] - p[1]);
    expected += 0.5 * kappa * std::pow(u.bnd[(k + 1) % d.num_boundary()] - u.bnd[k], 2) / len;
  }
  EXPECT_NEAR(e.total, expected, 1e-12 * expected);
}

TEST(Energy, EnvelopeGrowsAsEpsDecreases) {
  const Domain d = make_interval(1.0, 16);
  const DiscreteSystem s = assemble(d);
  std::mt19937 rng(7);
  std::normal_distribution<double> g;
  Vector v(d.num_nodes());
  for (auto& x : v) x = 2 * g(rng);
  const CoupledField u = from_bulk(d, v);
  const graphs::GraphPair gp{graphs::catalog_piecewise(), graphs::Obstacle{-1, 1}};
  double prev_bulk = 0.0, prev_bnd = 0.0;
  for (double eps : {1.0, 0.5, 0.1, 0.01}) {
    const auto e = energy(s, gp, {eps, 1.0, 1.0}, u);
    EXPECT_GE(e.envelope_bulk, prev_bulk);
    EXPECT_GE(e.envelope_bnd, prev_bnd);
    prev_bulk = e.envelope_bulk;
    prev_bnd = e.envelope_bnd;
  }
}

TEST(BoundMonitor, ZeroDataGivesZeroMonitors) {
  auto s = fixtures::prototype(false, 16);
  s.problem.pert = PerturbationSpec{};
  s.problem.cfg.final_time = 0.2;
  const CoupledField zero = constant_field(s.problem.sys.domain, 0.0);
  const auto sweep = eps_sweep(s.problem, zero, [zero](double) { return zero; }, {0.2, 0.1, 0.05});
  for (const auto& m : sweep.monitors)
    for (double c : m.columns()) EXPECT_EQ(c, 0.0);
  for (double dj : sweep.d) EXPECT_EQ(dj, 0.0);
}

TEST(BoundMonitor, UnconstrainedLambdaColumnIsZero) {
  auto s = fixtures::prototype(false, 32);
  s.problem.cfg.final_time = 0.3;
  const auto m = measure_bounds(s.problem, run(s.problem, s.u0, s.f));
  EXPECT_EQ(m.lambda_l2, 0.0);
  EXPECT_TRUE(m.finite());
  EXPECT_GT(m.ut_bulk, 0.0);
  EXPECT_EQ(BoundMonitor::column_names().size(), m.columns().size());
}

TEST(BoundMonitor, CheckBoundedUsesMedianFactor) {
  std::vector<BoundMonitor> rows(4);
  for (int j = 0; j < 4; ++j) rows[j].ut_bulk = 1.0 + j;  // median 2.5, max 4
  rows[3].flux = 10.0;                                     // median 0, max 10
  const auto v = check_bounded(rows);
  for (const auto& c : v) {
    EXPECT_EQ(c.pass, c.column != "flux") << c.column;
  }
}

TEST(ContinuousDependence, IdenticalDataGivesZero) {
  auto s = fixtures::prototype(false, 32);
  s.problem.cfg.final_time = 0.2;
  const auto rep = continuous_dependence(s.problem, s.u0, s.f, s.u0, s.f);
  ASSERT_EQ(rep.steps.size(), 21u);
  for (const auto& st : rep.steps) EXPECT_EQ(st.lhs, 0.0);
  EXPECT_DOUBLE_EQ(rep.constant, std::exp((2.0 + 2.0) * 0.2));
}

TEST(ContinuousDependence, InitialPerturbationsStayUnderBound) {
  auto s = fixtures::prototype(false, 32);
  const auto& d = s.problem.sys.domain;
  for (double delta : {1e-1, 1e-2, 1e-3}) {
    Vector bump(d.num_nodes());
    for (int i = 0; i < d.num_nodes(); ++i) bump[i] = delta * std::cos(M_PI * d.nodes[i][0]);
    const CoupledField u02 = from_bulk(d, s.u0.bulk + bump);
    const auto rep = continuous_dependence(s.problem, s.u0, s.f, u02, s.f);
    EXPECT_LE(rep.max_ratio, 1.0) << delta;
    EXPECT_LE(rep.max_ratio_discrete, 1.0) << delta;
    EXPECT_GT(rep.steps.back().lhs, 0.0);
  }
}

TEST(ContinuousDependence, ForcingPerturbationStaysUnderBound) {
  auto s = fixtures::prototype(false, 32);
  const Forcing f2 = [base = s.f](double t) {
    CoupledField g = base(t);
    g.bulk.array() += 0.05 * std::sin(4 * t);
    g.bnd.array() -= 0.02;
    return g;
  };
  const auto rep = continuous_dependence(s.problem, s.u0, s.f, s.u0, f2);
  EXPECT_LE(rep.max_ratio, 1.0);
  EXPECT_LE(rep.max_ratio_discrete, 1.0);
  EXPECT_EQ(rep.steps.front().lhs, 0.0);
}

TEST(EpsSweep, SingleEpsGivesEmptyTable) {
  auto s = fixtures::prototype(true, 16);
  s.problem.cfg.final_time = 0.05;
  const auto sweep = eps_sweep(s.problem, s.u0, s.f, {0.1});
  EXPECT_TRUE(sweep.d.empty());
  EXPECT_EQ(sweep.monitors.size(), 1u);
}

TEST(EpsSweep, RejectsNonDecreasingList) {
  auto s = fixtures::prototype(true, 16);
  EXPECT_THROW(eps_sweep(s.problem, s.u0, s.f, {0.1, 0.2}), ValidationError);
  EXPECT_THROW(eps_sweep(s.problem, s.u0, s.f, {0.1, 0.1}), ValidationError);
}

TEST(EpsSweep, ZeroGraphDifferencesScaleWithEps) {
  const Domain d = make_interval(1.0, 2);
  DiscreteSystem sys = assemble(d);
  ConstraintSpec c = make_constraint(sys, constant_field(d, 1.0), -fixtures::kInf, fixtures::kInf);
  SolverConfig cfg;
  cfg.final_time = 0.5;
  Problem p{std::move(sys), {graphs::Linear{0}, graphs::Linear{0}}, std::move(c), PerturbationSpec{}, cfg};
  const CoupledField u0 = from_bulk(d, Eigen::Vector3d(1.0, 0.2, -0.5));
  const CoupledField f{Eigen::Vector3d(0.3, -0.1, 0.4), Eigen::Vector2d(0.2, -0.3), false};
  const auto sweep = eps_sweep(p, u0, [f](double) { return f; }, {0.008, 0.004, 0.002, 0.001});
  ASSERT_EQ(sweep.d.size(), 3u);
  EXPECT_TRUE(sweep.strictly_decreasing());
  for (std::size_t j = 1; j < sweep.d.size(); ++j) EXPECT_NEAR(sweep.d[j - 1] / sweep.d[j], 2.0, 0.02);
}

TEST(EpsSweep, PrototypeDifferencesDecrease) {
  auto s = fixtures::prototype(true, 32);
  s.problem.cfg.final_time = 0.5;
  const auto sweep = eps_sweep(s.problem, s.u0, s.f, {0.2, 0.1, 0.05, 0.025});
  EXPECT_TRUE(sweep.strictly_decreasing());
  for (const auto& m : sweep.monitors) EXPECT_TRUE(m.finite());
}
