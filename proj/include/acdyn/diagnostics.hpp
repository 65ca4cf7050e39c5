#pragma once

/// Trajectory-level harnesses: bound monitors across eps, the
/// continuous-dependence check and the eps -> 0 Cauchy study.

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "acdyn/energy.hpp"
#include "acdyn/parallel.hpp"
#include "acdyn/stepper.hpp"

namespace acdyn {

// ---------------------------------------------------------------------------
// Bound monitors

/// Measured quantities for one run. L2-in-time norms use the rectangle rule
/// over t_1..t_N, matching implicit Euler.
struct BoundMonitor {
  double eps = 0.0;
  double ut_bulk = 0.0;       // |u'|_{L2(0,T;H)}
  double ut_bnd = 0.0;        // |u_G'|_{L2(0,T;H_G)}
  double sup_v_bulk = 0.0;    // sup_t |u|_V
  double sup_v_bnd = 0.0;     // sup_t |u_G|_{V_G}
  double sup_env_bulk = 0.0;  // sup_t int beta^_eps(u)
  double sup_env_bnd = 0.0;   // sup_t int beta^_G,eps(u_G)
  double lambda_l2 = 0.0;     // |lambda|_{L2(0,T)}
  double xi_bulk = 0.0;       // |beta_eps(u)|_{L2(0,T;H)}
  double xi_bnd = 0.0;        // |beta_G,eps(u_G)|_{L2(0,T;H_G)}
  double lap_bulk = 0.0;      // |Delta_h u|_{L2(0,T;H)} over interior nodes
  double flux = 0.0;          // |d_nu u|_{L2(0,T;H_G)}
  double lap_bnd = 0.0;       // |Delta_G u_G|_{L2(0,T;H_G)}

  static std::vector<std::string> column_names() {
    return {"ut_bulk", "ut_bnd",    "sup_v_bulk", "sup_v_bnd", "sup_env_bulk", "sup_env_bnd",
            "lambda_l2", "xi_bulk", "xi_bnd",     "lap_bulk",  "flux",         "lap_bnd"};
  }
  std::vector<double> columns() const {
    return {ut_bulk,   ut_bnd,  sup_v_bulk, sup_v_bnd, sup_env_bulk, sup_env_bnd,
            lambda_l2, xi_bulk, xi_bnd,     lap_bulk,  flux,         lap_bnd};
  }
  bool finite() const {
    const auto c = columns();
    return std::all_of(c.begin(), c.end(), [](double v) { return std::isfinite(v); });
  }
};

inline BoundMonitor measure_bounds(const Problem& p, const Trajectory& traj) {
  const auto& sys = p.sys;
  const double tau = p.cfg.tau;
  const double eg = p.cfg.eps * p.cfg.rho;
  BoundMonitor m;
  m.eps = p.cfg.eps;
  auto wsq_bulk = [&](const Vector& v) { return (sys.m_bulk.array() * v.array().square()).sum(); };
  auto wsq_bnd = [&](const Vector& v) { return (sys.m_bnd.array() * v.array().square()).sum(); };
  for (std::size_t n = 0; n < traj.size(); ++n) {
    const auto& r = traj[n];
    const auto e = energy(sys, p.graphs, p.cfg.energy_params(), r.u);
    m.sup_v_bulk = std::max(m.sup_v_bulk, std::sqrt(wsq_bulk(r.u.bulk) + 2.0 * e.grad_bulk));
    m.sup_v_bnd = std::max(m.sup_v_bnd, std::sqrt(wsq_bnd(r.u.bnd) + 2.0 * e.grad_bnd));
    m.sup_env_bulk = std::max(m.sup_env_bulk, e.envelope_bulk);
    m.sup_env_bnd = std::max(m.sup_env_bnd, e.envelope_bnd);
    if (n == 0) continue;
    const auto& prev = traj[n - 1];
    m.ut_bulk += wsq_bulk(r.u.bulk - prev.u.bulk) / tau;
    m.ut_bnd += wsq_bnd(r.u.bnd - prev.u.bnd) / tau;
    m.lambda_l2 += tau * r.lambda * r.lambda;
    m.xi_bulk += tau * wsq_bulk(r.xi.bulk);
    Vector xg = r.u.bnd.unaryExpr([&](double s) { return graphs::yosida_eff(p.graphs.bnd, eg, s); });
    m.xi_bnd += tau * wsq_bnd(xg);
    m.lap_bulk += tau * wsq_bulk(interior_laplacian(sys, r.u.bulk));
    m.flux += tau * wsq_bnd(normal_flux(sys, r.u));
    m.lap_bnd += tau * wsq_bnd(boundary_laplacian(sys, r.u.bnd));
  }
  for (double* v : {&m.ut_bulk, &m.ut_bnd, &m.lambda_l2, &m.xi_bulk, &m.xi_bnd, &m.lap_bulk, &m.flux, &m.lap_bnd})
    *v = std::sqrt(*v);
  return m;
}

/// Per-column verdict: the largest value over the eps list is at most
/// `factor` times the median.
struct BoundVerdict {
  std::string column;
  double max = 0.0;
  double median = 0.0;
  bool pass = true;
};

inline std::vector<BoundVerdict> check_bounded(const std::vector<BoundMonitor>& rows, double factor = 2.0) {
  std::vector<BoundVerdict> out;
  const auto names = BoundMonitor::column_names();
  for (std::size_t c = 0; c < names.size(); ++c) {
    std::vector<double> col;
    for (const auto& r : rows) col.push_back(r.columns()[c]);
    BoundVerdict v{names[c]};
    if (!col.empty()) {
      v.max = *std::max_element(col.begin(), col.end());
      std::sort(col.begin(), col.end());
      const std::size_t k = col.size();
      v.median = k % 2 ? col[k / 2] : 0.5 * (col[k / 2 - 1] + col[k / 2]);
      v.pass = std::isfinite(v.max) && v.max <= factor * v.median;
    }
    out.push_back(v);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Continuous dependence

struct DependenceStep {
  double t = 0.0;
  double lhs = 0.0;  // |du(t)|_H^2 + 2 sum tau (|grad du|^2 + kappa |grad_G du_G|^2)
  double rhs = 0.0;  // |du0|_H^2 + sum tau |df|_H^2, before the constant
  double ratio = 0.0;           // lhs / (C rhs) with the continuous constant
  double ratio_discrete = 0.0;  // lhs / (q^n rhs) with the implicit-Euler constant
};

struct DependenceReport {
  double constant = 0.0;  // exp((2 + L^2 + L_G^2) T)
  double q = 0.0;         // (1 + tau (L^2 + L_G^2)) / (1 - 2 tau), per step
  std::vector<DependenceStep> steps;
  double max_ratio = 0.0;
  double max_ratio_discrete = 0.0;
};

/// Runs the shared problem from two data sets and compares them step by step.
/// Non-data fields are shared by construction.
inline DependenceReport continuous_dependence(const Problem& p, const CoupledField& u01, const Forcing& f1,
                                              const CoupledField& u02, const Forcing& f2) {
  const double l2 = p.pert.lip_bulk * p.pert.lip_bulk + p.pert.lip_bnd * p.pert.lip_bnd;
  const double tau = p.cfg.tau;
  DependenceReport rep;
  rep.constant = std::exp((2.0 + l2) * p.cfg.final_time);
  rep.q = tau < 0.5 ? (1.0 + tau * l2) / (1.0 - 2.0 * tau) : std::numeric_limits<double>::infinity();

  std::vector<Trajectory> runs(2);
  parallel_for(2, [&](std::size_t i) { runs[i] = i == 0 ? run(p, u01, f1) : run(p, u02, f2); });

  const auto& sys = p.sys;
  auto diff = [](const CoupledField& a, const CoupledField& b) {
    return CoupledField{a.bulk - b.bulk, a.bnd - b.bnd, a.trace_consistent && b.trace_consistent};
  };
  double acc_grad = 0.0;
  double rhs = inner_H(sys, diff(u01, u02), diff(u01, u02));
  double qn = 1.0;
  for (std::size_t n = 0; n < runs[0].size(); ++n) {
    const double t = runs[0][n].t;
    const CoupledField du = diff(runs[0][n].u, runs[1][n].u);
    if (n > 0) {
      acc_grad += tau * (du.bulk.dot(sys.a_bulk * du.bulk) + p.cfg.kappa * du.bnd.dot(sys.a_bnd * du.bnd));
      const CoupledField df = diff(f1(t), f2(t));
      rhs += tau * inner_H(sys, df, df);
      qn *= rep.q;
    }
    DependenceStep s;
    s.t = t;
    s.lhs = inner_H(sys, du, du) + 2.0 * acc_grad;
    s.rhs = rhs;
    s.ratio = s.lhs == 0.0 ? 0.0 : s.lhs / (rep.constant * rhs);
    s.ratio_discrete = s.lhs == 0.0 ? 0.0 : s.lhs / (qn * rhs);
    rep.max_ratio = std::max(rep.max_ratio, s.ratio);
    rep.max_ratio_discrete = std::max(rep.max_ratio_discrete, s.ratio_discrete);
    rep.steps.push_back(s);
  }
  return rep;
}

// ---------------------------------------------------------------------------
// eps sweep

struct EpsSweep {
  std::vector<double> eps;
  std::vector<double> d;  // d_j = max_t |u_{eps_j} - u_{eps_{j+1}}|_H, size eps.size() - 1
  std::vector<BoundMonitor> monitors;

  bool strictly_decreasing() const {
    for (std::size_t j = 1; j < d.size(); ++j)
      if (!(d[j] < d[j - 1])) return false;
    return true;
  }
};

/// Runs the problem for each eps (concurrently) and tabulates successive
/// differences and bound monitors.
inline EpsSweep eps_sweep(const Problem& base, const CoupledField& u0, const Forcing& f,
                          const std::vector<double>& eps_list) {
  for (std::size_t j = 1; j < eps_list.size(); ++j)
    if (!(eps_list[j] < eps_list[j - 1])) throw ValidationError("config", "eps list must be strictly decreasing");
  EpsSweep out;
  out.eps = eps_list;
  const std::size_t m = eps_list.size();
  std::vector<Problem> problems(m, base);
  for (std::size_t j = 0; j < m; ++j) problems[j].cfg.eps = eps_list[j];
  std::vector<Trajectory> runs(m);
  parallel_for(m, [&](std::size_t j) { runs[j] = run(problems[j], u0, f); });

  for (std::size_t j = 0; j < m; ++j) out.monitors.push_back(measure_bounds(problems[j], runs[j]));
  for (std::size_t j = 0; j + 1 < m; ++j) {
    double dj = 0.0;
    for (std::size_t n = 0; n < runs[j].size(); ++n) {
      const CoupledField du{runs[j][n].u.bulk - runs[j + 1][n].u.bulk, runs[j][n].u.bnd - runs[j + 1][n].u.bnd, true};
      dj = std::max(dj, norm_H(base.sys, du));
    }
    out.d.push_back(dj);
  }
  return out;
}

}  // namespace acdyn
