#pragma once

// Shared scenarios for the unit and acceptance suites.

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "acdyn/constraint.hpp"
#include "acdyn/mesh.hpp"
#include "acdyn/stepper.hpp"
#include "oracles.hpp"

namespace fixtures {

using namespace acdyn;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct Setup {
  Problem problem;
  CoupledField u0;
  Forcing f;
};

/// Double-well prototype on (0, 1), nx = 64: beta = r^3 on both sides,
/// pi = -r, f = 0.3 in the bulk, u0 = 0.8 tanh((x - 1/2)/0.1), volume
/// constraint pinned at 0, tau = 1e-2, T = 1, eps = 0.05.
inline Setup prototype(bool constrained = true, int nx = 64) {
  const Domain d = make_interval(1.0, nx);
  DiscreteSystem sys = assemble(d);
  ConstraintSpec c = constrained
                         ? make_constraint(sys, make_field(d, Vector::Ones(d.num_nodes()), Vector::Zero(d.num_boundary())), 0.0, 0.0)
                         : make_constraint(sys, make_field(d, Vector::Ones(d.num_nodes()), Vector::Zero(d.num_boundary())), -kInf, kInf);
  PerturbationSpec pert{perturbation::Negate{}, perturbation::Negate{}, 1.0, 1.0};
  SolverConfig cfg;
  cfg.tau = 1e-2;
  cfg.final_time = 1.0;
  cfg.eps = 0.05;
  Problem p{std::move(sys), {graphs::PowerOdd{1.0, 3}, graphs::PowerOdd{1.0, 3}}, std::move(c), pert, cfg};
  Vector u0(d.num_nodes());
  for (int i = 0; i < d.num_nodes(); ++i) u0[i] = 0.8 * std::tanh((d.nodes[i][0] - 0.5) / 0.1);
  const CoupledField f0{Vector::Constant(d.num_nodes(), 0.3), Vector::Zero(d.num_boundary()), false};
  return {std::move(p), from_bulk(d, u0), [f0](double) { return f0; }};
}

/// Same mesh and constraint, pi = 0, f = 0, fully variational steps.
inline Setup dissipative() {
  Setup s = prototype(true);
  s.problem.pert = PerturbationSpec{};
  s.problem.cfg.mode = StepMode::fully_variational;
  const CoupledField zero = constant_field(s.problem.sys.domain, 0.0);
  s.f = [zero](double) { return zero; };
  return s;
}

// ---------------------------------------------------------------------------
// Randomized three-node micro-scenarios

struct Micro {
  Problem problem;
  CoupledField prev;
  CoupledField f;
  oracle::MicroProblem ref;
};

inline void pick_graph(std::mt19937& rng, graphs::MonotoneGraph& g, oracle::Graph& og) {
  std::uniform_real_distribution<double> coef(0.2, 2.0);
  switch (std::uniform_int_distribution<int>(0, 2)(rng)) {
    case 0: {
      const double a = coef(rng);
      g = graphs::Linear{a};
      og = {oracle::Kind::linear, a};
      break;
    }
    case 1: {
      const double a = coef(rng);
      g = graphs::PowerOdd{a, 3};
      og = {oracle::Kind::power, a, 3};
      break;
    }
    default: {
      const double lo = -std::uniform_real_distribution<double>(0.2, 1.0)(rng);
      const double hi = std::uniform_real_distribution<double>(0.2, 1.0)(rng);
      g = graphs::Obstacle{lo, hi};
      og = {oracle::Kind::obstacle, 0.0, 3, lo, hi};
    }
  }
}

/// Scenario `index` cycles through equality, upper-active, lower-active and
/// slack constraints; everything else is drawn from `rng`.
inline Micro micro(std::mt19937& rng, int index) {
  std::uniform_real_distribution<double> unit(-1.0, 1.0), pos(0.0, 1.0);
  const Domain d = make_interval(1.0, 2);
  DiscreteSystem sys = assemble(d);
  oracle::MicroProblem ref;
  graphs::GraphPair gp{graphs::Linear{0.0}, graphs::Linear{0.0}};
  pick_graph(rng, gp.bulk, ref.bulk);
  pick_graph(rng, gp.bnd, ref.bnd);
  ref.eps = std::uniform_real_distribution<double>(0.05, 1.0)(rng);
  ref.rho = std::uniform_real_distribution<double>(0.5, 2.0)(rng);
  ref.tau = std::uniform_real_distribution<double>(0.05, 0.5)(rng);
  const double c_bulk = 0.5 * unit(rng), c_bnd = 0.5 * unit(rng);

  Vector prev(3), f(3), w(3), fg(2), wg(2);
  for (int i = 0; i < 3; ++i) {
    prev[i] = 0.8 * unit(rng);
    f[i] = 2.0 * unit(rng);
    w[i] = pos(rng);
    ref.prev[i] = prev[i];
    ref.f[i] = f[i];
    ref.w[i] = w[i];
    ref.pi_prev[i] = c_bulk * prev[i];
  }
  for (int s = 0; s < 2; ++s) {
    fg[s] = 2.0 * unit(rng);
    wg[s] = pos(rng);
    ref.fg[s] = fg[s];
    ref.wg[s] = wg[s];
    ref.pig_prev[s] = c_bnd * prev[d.boundary[s]];
  }
  const double k0 = ref.mass(ref.prev);
  double lo = -kInf, hi = kInf;
  switch (index % 4) {
    case 0: lo = hi = k0; break;
    case 1: hi = k0 + 0.05 * pos(rng); break;
    case 2: lo = k0 - 0.05 * pos(rng); break;
    default: lo = k0 - 0.5 - pos(rng); hi = k0 + 0.5 + pos(rng);
  }
  ref.k_lo = lo;
  ref.k_hi = hi;

  ConstraintSpec c = make_constraint(sys, make_field(d, w, wg), lo, hi);
  SolverConfig cfg;
  cfg.tau = ref.tau;
  cfg.eps = ref.eps;
  cfg.rho = ref.rho;
  cfg.final_time = ref.tau;
  PerturbationSpec pert{perturbation::Linear{c_bulk}, perturbation::Linear{c_bnd}, std::abs(c_bulk), std::abs(c_bnd)};
  Problem p{std::move(sys), gp, std::move(c), pert, cfg};
  const CoupledField prev_f = from_bulk(d, prev);
  return {std::move(p), prev_f, CoupledField{f, fg, false}, ref};
}

/// Random trace-consistent field whose weighted mass equals k.
inline CoupledField field_with_mass(const DiscreteSystem& sys, const ConstraintSpec& c, double k, std::mt19937& rng) {
  std::normal_distribution<double> g;
  Vector v(sys.domain.num_nodes());
  for (auto& x : v) x = g(rng);
  CoupledField u = from_bulk(sys.domain, v);
  const double shift = (k - mass(sys, c, u)) / c.sigma0;
  u.bulk.array() += shift;
  u.bnd.array() += shift;
  return u;
}

}  // namespace fixtures
