#pragma once

/// Proximal implicit Euler for the Yosida-regularized constrained gradient
/// flow with dynamic boundary conditions.
///
/// One step solves, in the discrete weak form on trace-identified unknowns,
///
///   (u - u_prev)/tau + A u + beta_eps(u) + eps u + pi(u_prev) + lambda w = f
///
/// jointly for bulk and boundary values. The scalar multiplier lambda is found
/// by an active-set rule: try lambda = 0; if the weighted mass leaves
/// [k_lo, k_hi], pin the violated barrier and solve mass(u(lambda)) = k for
/// lambda. mass(u(lambda)) is strictly decreasing in lambda, so the root is
/// unique and a safeguarded Newton / bisection iteration finds it.

#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "acdyn/constraint.hpp"
#include "acdyn/energy.hpp"
#include "acdyn/errors.hpp"
#include "acdyn/graphs.hpp"
#include "acdyn/mesh.hpp"

namespace acdyn {

// ---------------------------------------------------------------------------
// Lipschitz perturbations

namespace perturbation {
struct Zero {};
/// pi(r) = c r
struct Linear {
  double c = 0.0;
};
/// pi(r) = -r, the nonconvex part of the quartic double well.
struct Negate {};
/// pi(r) = amplitude sin(frequency r)
struct Sine {
  double amplitude = 0.0;
  double frequency = 1.0;
};
}  // namespace perturbation

using Perturbation = std::variant<perturbation::Zero, perturbation::Linear, perturbation::Negate, perturbation::Sine>;

inline double evaluate(const Perturbation& pi, double r) {
  return std::visit(graphs::detail::overloaded{
                        [](const perturbation::Zero&) { return 0.0; },
                        [r](const perturbation::Linear& l) { return l.c * r; },
                        [r](const perturbation::Negate&) { return -r; },
                        [r](const perturbation::Sine& s) { return s.amplitude * std::sin(s.frequency * r); },
                    },
                    pi);
}

inline std::string kind_name(const Perturbation& pi) {
  return std::visit(graphs::detail::overloaded{
                        [](const perturbation::Zero&) { return std::string("zero"); },
                        [](const perturbation::Linear&) { return std::string("linear"); },
                        [](const perturbation::Negate&) { return std::string("negate"); },
                        [](const perturbation::Sine&) { return std::string("sine"); },
                    },
                    pi);
}

struct PerturbationSpec {
  Perturbation bulk = perturbation::Zero{};
  Perturbation bnd = perturbation::Zero{};
  double lip_bulk = 0.0;  // declared L
  double lip_bnd = 0.0;   // declared L_G
};

/// Largest difference quotient of pi over consecutive points of an
/// equispaced grid (1001 points on [-5, 5] by default).
inline double sampled_lipschitz(const Perturbation& pi, int n = 1001, double a = -5.0, double b = 5.0) {
  double worst = 0.0;
  double prev = evaluate(pi, a);
  for (int i = 1; i < n; ++i) {
    const double r0 = a + (b - a) * (i - 1) / (n - 1);
    const double r1 = a + (b - a) * i / (n - 1);
    const double cur = evaluate(pi, r1);
    worst = std::max(worst, std::abs(cur - prev) / (r1 - r0));
    prev = cur;
  }
  return worst;
}

inline bool lipschitz_declarations_ok(const PerturbationSpec& p) {
  return sampled_lipschitz(p.bulk) <= p.lip_bulk * (1.0 + 1e-12) + 1e-15 &&
         sampled_lipschitz(p.bnd) <= p.lip_bnd * (1.0 + 1e-12) + 1e-15;
}

// ---------------------------------------------------------------------------
// Problem description

enum class StepMode {
  semi_implicit,       // damped Newton on the residual norm
  fully_variational,   // damped Newton on the proximal objective (Armijo)
};

struct SolverConfig {
  double tau = 1e-2;
  double final_time = 1.0;
  double eps = 0.05;
  double rho = 1.0;
  double kappa = 1.0;  // multiplies the boundary stiffness
  double newton_tol = 1e-10;
  int newton_max_iter = 60;
  double lambda_tol = 1e-14;
  int lambda_max_iter = 200;
  StepMode mode = StepMode::semi_implicit;

  int num_steps() const { return static_cast<int>(std::lround(final_time / tau)); }
  EnergyParams energy_params() const { return {eps, rho, kappa}; }
};

inline void validate(const SolverConfig& c) {
  if (!(c.tau > 0.0)) throw ValidationError("config", "tau must be positive");
  if (!(c.final_time > 0.0)) throw ValidationError("config", "final time must be positive");
  if (!(c.eps > 0.0 && c.eps <= 1.0)) throw ValidationError("config", "eps must lie in (0, 1]");
  if (!(c.rho > 0.0)) throw ValidationError("config", "rho must be positive");
  if (!(c.kappa > 0.0)) throw ValidationError("config", "kappa must be positive");
  if (!(c.newton_tol > 0.0 && c.lambda_tol > 0.0)) throw ValidationError("config", "tolerances must be positive");
  if (c.newton_max_iter < 1 || c.lambda_max_iter < 1) throw ValidationError("config", "iteration caps must be >= 1");
}

struct Problem {
  DiscreteSystem sys;
  graphs::GraphPair graphs;
  ConstraintSpec constraint;
  PerturbationSpec pert;
  SolverConfig cfg;
};

/// Source term evaluated at a given time.
using Forcing = std::function<CoupledField(double)>;

inline Forcing zero_forcing(const DiscreteSystem& sys) {
  const CoupledField zero = constant_field(sys.domain, 0.0);
  return [zero](double) { return zero; };
}

struct StepRecord {
  double t = 0.0;
  CoupledField u;
  double lambda = 0.0;
  CoupledField xi;  // (beta_eps(u), beta_G,eps(u_G))
  double k = 0.0;
  double energy = 0.0;
  double residual_bulk = 0.0;
  double residual_bnd = 0.0;
  int newton_iterations = 0;
  std::vector<std::pair<double, double>> lambda_trace;  // (lambda, mass) at each outer evaluation
};

using Trajectory = std::vector<StepRecord>;

// ---------------------------------------------------------------------------

class StepSolver {
 public:
  explicit StepSolver(const Problem& p) : p_(p) {
    validate(p.cfg);
    const auto& sys = p.sys;
    const auto& d = sys.domain;
    const int n = d.num_nodes();
    e_bulk_ = p.cfg.eps;
    e_bnd_ = p.cfg.eps * p.cfg.rho;
    const double shift = 1.0 / p.cfg.tau + p.cfg.eps;

    std::vector<Triplet> trip;
    for (int k = 0; k < sys.a_bulk.outerSize(); ++k)
      for (SparseMatrix::InnerIterator it(sys.a_bulk, k); it; ++it) trip.emplace_back(it.row(), it.col(), it.value());
    for (int k = 0; k < sys.a_bnd.outerSize(); ++k)
      for (SparseMatrix::InnerIterator it(sys.a_bnd, k); it; ++it)
        trip.emplace_back(d.boundary[it.row()], d.boundary[it.col()], p.cfg.kappa * it.value());
    lumped_ = sys.m_bulk;
    b_ = (sys.m_bulk.array() * p.constraint.w.bulk.array()).matrix();
    scale_.resize(n);
    for (int i = 0; i < n; ++i) scale_[i] = 1.0 / sys.m_bulk[i];
    for (int s = 0; s < d.num_boundary(); ++s) {
      const int i = d.boundary[s];
      lumped_[i] += sys.m_bnd[s];
      b_[i] += sys.m_bnd[s] * p.constraint.w.bnd[s];
      scale_[i] = 1.0 / sys.m_bnd[s];
    }
    for (int i = 0; i < n; ++i) trip.emplace_back(i, i, shift * lumped_[i]);
    k_.resize(n, n);
    k_.setFromTriplets(trip.begin(), trip.end());
    k_.makeCompressed();
    jac_ = k_;
    ldlt_.analyzePattern(jac_);
  }

  const Problem& problem() const { return p_; }

  /// Advances from u_prev (trace-consistent, feasible) with source f_now
  /// evaluated at the new time t_new.
  StepRecord step(const CoupledField& u_prev, const CoupledField& f_now, double t_new, double lambda_guess = 0.0) {
    const auto& c = p_.constraint;
    if (!is_trace_consistent(p_.sys.domain, u_prev))
      throw std::invalid_argument("previous state must be trace-consistent");
    detail::check_conforms(p_.sys, f_now);
    prepare(u_prev, f_now);
    const double tol_k = activity_tolerance(c);

    StepRecord rec;
    rec.t = t_new;
    Vector u = u_prev.bulk;
    double lambda = 0.0;

    double target = c.k_lo;
    bool need_multiplier = true;
    if (!c.equality()) {
      newton(u, 0.0, rec.newton_iterations);
      const double m = b_.dot(u);
      rec.lambda_trace.emplace_back(0.0, m);
      if (feasible(c, m, tol_k)) {
        need_multiplier = false;
      } else {
        target = m > c.k_hi ? c.k_hi : c.k_lo;
      }
    } else {
      lambda = std::isfinite(lambda_guess) ? lambda_guess : 0.0;
    }
    if (need_multiplier) lambda = solve_multiplier(u, target, lambda, !c.equality(), tol_k, rec);

    finalize(u, lambda, rec);
    return rec;
  }

  /// Residual of the discrete step equation at (u, lambda) for the data of
  /// the last prepared step. Exposed for diagnostics.
  Vector residual(const Vector& u, double lambda) const {
    Vector r = k_ * u + c0_ + lambda * b_;
    const auto& d = p_.sys.domain;
    for (int i = 0; i < u.size(); ++i) r[i] += p_.sys.m_bulk[i] * graphs::yosida_eff(p_.graphs.bulk, e_bulk_, u[i]);
    for (int s = 0; s < d.num_boundary(); ++s) {
      const int i = d.boundary[s];
      r[i] += p_.sys.m_bnd[s] * graphs::yosida_eff(p_.graphs.bnd, e_bnd_, u[i]);
    }
    return r;
  }

  /// Proximal objective whose gradient is `residual`.
  double objective(const Vector& u, double lambda) const {
    double phi = 0.5 * u.dot(k_ * u) + (c0_ + lambda * b_).dot(u);
    const auto& d = p_.sys.domain;
    for (int i = 0; i < u.size(); ++i) phi += p_.sys.m_bulk[i] * graphs::moreau_eff(p_.graphs.bulk, e_bulk_, u[i]);
    for (int s = 0; s < d.num_boundary(); ++s)
      phi += p_.sys.m_bnd[s] * graphs::moreau_eff(p_.graphs.bnd, e_bnd_, u[d.boundary[s]]);
    return phi;
  }

 private:
  void prepare(const CoupledField& u_prev, const CoupledField& f) {
    const auto& sys = p_.sys;
    const auto& d = sys.domain;
    const double inv_tau = 1.0 / p_.cfg.tau;
    c0_.resize(d.num_nodes());
    for (int i = 0; i < d.num_nodes(); ++i)
      c0_[i] = sys.m_bulk[i] * (-inv_tau * u_prev.bulk[i] + evaluate(p_.pert.bulk, u_prev.bulk[i]) - f.bulk[i]);
    for (int s = 0; s < d.num_boundary(); ++s) {
      const int i = d.boundary[s];
      c0_[i] += sys.m_bnd[s] * (-inv_tau * u_prev.bnd[s] + evaluate(p_.pert.bnd, u_prev.bnd[s]) - f.bnd[s]);
    }
    // initial bracket scale for the multiplier
    double fmax = std::max(f.bulk.lpNorm<Eigen::Infinity>(), f.bnd.lpNorm<Eigen::Infinity>());
    double bmax = 0.0, pmax = 0.0;
    for (int i = 0; i < d.num_nodes(); ++i) {
      bmax = std::max(bmax, std::abs(graphs::yosida_eff(p_.graphs.bulk, e_bulk_, u_prev.bulk[i])));
      pmax = std::max(pmax, std::abs(evaluate(p_.pert.bulk, u_prev.bulk[i])));
    }
    for (int s = 0; s < d.num_boundary(); ++s) {
      bmax = std::max(bmax, std::abs(graphs::yosida_eff(p_.graphs.bnd, e_bnd_, u_prev.bnd[s])));
      pmax = std::max(pmax, std::abs(evaluate(p_.pert.bnd, u_prev.bnd[s])));
    }
    double bmin = std::numeric_limits<double>::infinity();
    for (int i = 0; i < b_.size(); ++i)
      if (b_[i] > 0.0) bmin = std::min(bmin, b_[i]);
    bracket_ = (fmax + bmax + pmax + u_prev.bulk.lpNorm<Eigen::Infinity>() * inv_tau + 1.0) * p_.constraint.sigma0 / bmin;
  }

  double scaled_max(const Vector& r) const { return (r.cwiseProduct(scale_)).lpNorm<Eigen::Infinity>(); }

  void factorize(const Vector& u) {
    jac_ = k_;
    const auto& d = p_.sys.domain;
    for (int i = 0; i < u.size(); ++i)
      jac_.coeffRef(i, i) += p_.sys.m_bulk[i] * graphs::yosida_slope_eff(p_.graphs.bulk, e_bulk_, u[i]);
    for (int s = 0; s < d.num_boundary(); ++s) {
      const int i = d.boundary[s];
      jac_.coeffRef(i, i) += p_.sys.m_bnd[s] * graphs::yosida_slope_eff(p_.graphs.bnd, e_bnd_, u[i]);
    }
    ldlt_.factorize(jac_);
    if (ldlt_.info() != Eigen::Success) throw SolverError("Jacobian factorization failed");
  }

  // Semismooth Newton at fixed lambda; u is the initial guess and the result.
  void newton(Vector& u, double lambda, int& iterations) {
    const bool variational = p_.cfg.mode == StepMode::fully_variational;
    Vector r = residual(u, lambda);
    for (int it = 0; it < p_.cfg.newton_max_iter; ++it) {
      const double rnorm = scaled_max(r);
      if (rnorm <= p_.cfg.newton_tol) return;
      factorize(u);
      const Vector du = -ldlt_.solve(r);
      const double merit0 = variational ? objective(u, lambda) : r.cwiseProduct(scale_).norm();
      const double slope = r.dot(du);
      double t = 1.0;
      bool accepted = false;
      Vector ut, rt;
      for (int ls = 0; ls < 60 && !accepted; ++ls, t *= 0.5) {
        ut = u + t * du;
        rt = residual(ut, lambda);
        const double rt_norm = rt.cwiseProduct(scale_).norm();
        if (t == 1.0 && scaled_max(rt) < rnorm && !variational) accepted = true;
        else if (variational) {
          const double merit = objective(ut, lambda);
          const double floor = 1e-13 * (1.0 + std::abs(merit0));
          accepted = merit <= merit0 + 1e-4 * t * slope || (merit <= merit0 + floor && scaled_max(rt) < rnorm);
        } else {
          accepted = rt_norm < merit0;
        }
        if (accepted) break;
      }
      if (!accepted) throw SolverError("Newton line search failed (residual " + std::to_string(rnorm) + ")");
      u = std::move(ut);
      r = std::move(rt);
      ++iterations;
    }
    if (scaled_max(r) <= p_.cfg.newton_tol) return;
    throw SolverError("Newton did not converge in " + std::to_string(p_.cfg.newton_max_iter) +
                      " iterations (residual " + std::to_string(scaled_max(r)) + ")");
  }

  // Safeguarded Newton / bisection on g(lambda) = mass(u(lambda)) - target.
  double solve_multiplier(Vector& u, double target, double lambda, bool have_zero, double tol_k, StepRecord& rec) {
    const double tol_mass = 0.01 * tol_k;
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    double reach = bracket_;
    bool evaluated = have_zero;  // u already solves the lambda = 0 problem
    for (int it = 0; it < p_.cfg.lambda_max_iter; ++it) {
      if (!evaluated) {
        newton(u, lambda, rec.newton_iterations);
        rec.lambda_trace.emplace_back(lambda, b_.dot(u));
      }
      evaluated = false;
      const double g = b_.dot(u) - target;
      if (std::abs(g) <= tol_mass) return lambda;
      if (g > 0.0) lo = lambda; else hi = lambda;
      if (std::isfinite(lo) && std::isfinite(hi) && hi - lo <= p_.cfg.lambda_tol * std::max(1.0, std::abs(lambda))) {
        if (std::abs(g) <= tol_k) return lambda;
        throw SolverError("multiplier bracket collapsed without meeting the mass constraint");
      }
      factorize(u);
      const double dm = -b_.dot(ldlt_.solve(b_));  // d mass / d lambda < 0
      double next = dm < 0.0 ? lambda - g / dm : std::numeric_limits<double>::quiet_NaN();
      if (std::isfinite(lo) && std::isfinite(hi)) {
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
      } else if (!std::isfinite(hi)) {
        if (!(next > lo) || !(next <= lambda + reach)) next = lambda + reach;
        if (next == lambda + reach) reach *= 2.0;
      } else {
        if (!(next < hi) || !(next >= lambda - reach)) next = lambda - reach;
        if (next == lambda - reach) reach *= 2.0;
      }
      if (!std::isfinite(next)) throw SolverError("multiplier iteration diverged (sigma0 ~ 0 or infeasible data)");
      lambda = next;
    }
    throw SolverError("multiplier iteration did not converge");
  }

  void finalize(const Vector& u, double lambda, StepRecord& rec) const {
    const auto& sys = p_.sys;
    const auto& d = sys.domain;
    rec.u = from_bulk(d, u);
    rec.lambda = lambda;
    rec.k = b_.dot(u);
    rec.xi.bulk.resize(u.size());
    for (int i = 0; i < u.size(); ++i) rec.xi.bulk[i] = graphs::yosida_eff(p_.graphs.bulk, e_bulk_, u[i]);
    rec.xi.bnd.resize(d.num_boundary());
    for (int s = 0; s < d.num_boundary(); ++s)
      rec.xi.bnd[s] = graphs::yosida_eff(p_.graphs.bnd, e_bnd_, rec.u.bnd[s]);
    rec.xi.trace_consistent = false;
    rec.energy = energy(sys, p_.graphs, p_.cfg.energy_params(), rec.u).total;
    const Vector r = residual(u, lambda).cwiseProduct(scale_);
    rec.residual_bulk = 0.0;
    rec.residual_bnd = 0.0;
    for (int i = 0; i < u.size(); ++i) {
      if (d.on_boundary(i)) rec.residual_bnd = std::max(rec.residual_bnd, std::abs(r[i]));
      else rec.residual_bulk = std::max(rec.residual_bulk, std::abs(r[i]));
    }
  }

  const Problem& p_;
  double e_bulk_ = 0.0, e_bnd_ = 0.0;
  SparseMatrix k_, jac_;
  Vector lumped_, b_, scale_, c0_;
  double bracket_ = 1.0;
  Eigen::SimplicialLDLT<SparseMatrix> ldlt_;
};

/// One constrained proximal step; see StepSolver::step.
inline StepRecord proximal_step(const Problem& p, const CoupledField& u_prev, const CoupledField& f_now,
                                double t_new = 0.0, double lambda_guess = 0.0) {
  StepSolver solver(p);
  return solver.step(u_prev, f_now, t_new, lambda_guess);
}

/// Multiplier recovered by pairing the step equation with the constant field
/// z_c = (1/sigma0, 1/sigma0); stiffness terms pair to zero with constants.
inline double lambda_formula(const Problem& p, const StepRecord& rec, const CoupledField& u_prev,
                             const CoupledField& f_now) {
  const auto& sys = p.sys;
  const double inv_tau = 1.0 / p.cfg.tau;
  const double eb = p.cfg.eps, eg = p.cfg.eps * p.cfg.rho;
  double sum = 0.0;
  for (int i = 0; i < rec.u.bulk.size(); ++i) {
    const double u = rec.u.bulk[i];
    const double g = f_now.bulk[i] - (u - u_prev.bulk[i]) * inv_tau - evaluate(p.pert.bulk, u_prev.bulk[i]) -
                     graphs::yosida_eff(p.graphs.bulk, eb, u) - p.cfg.eps * u;
    sum += sys.m_bulk[i] * g;
  }
  for (int s = 0; s < rec.u.bnd.size(); ++s) {
    const double u = rec.u.bnd[s];
    const double g = f_now.bnd[s] - (u - u_prev.bnd[s]) * inv_tau - evaluate(p.pert.bnd, u_prev.bnd[s]) -
                     graphs::yosida_eff(p.graphs.bnd, eg, u) - p.cfg.eps * u;
    sum += sys.m_bnd[s] * g;
  }
  return sum / p.constraint.sigma0;
}

/// Checks the initial datum: trace consistency, mass compatibility and
/// finiteness of the primitives.
inline void check_initial_data(const Problem& p, const CoupledField& u0) {
  const auto& d = p.sys.domain;
  if (!is_trace_consistent(d, u0))
    throw ValidationError("(inidata)", "initial boundary values must equal the trace of the bulk initial datum");
  const double k0 = mass(p.sys, p.constraint, u0);
  const double tol = activity_tolerance(p.constraint);
  if (!feasible(p.constraint, k0, tol))
    throw ValidationError("(p3)", "initial mass " + std::to_string(k0) + " outside [" +
                                      std::to_string(p.constraint.k_lo) + ", " + std::to_string(p.constraint.k_hi) + "]");
  for (int i = 0; i < u0.bulk.size(); ++i)
    if (!std::isfinite(graphs::primitive(p.graphs.bulk, u0.bulk[i])))
      throw ValidationError("(p4)", "bulk primitive is infinite at the initial datum (node " + std::to_string(i) + ")");
  for (int s = 0; s < u0.bnd.size(); ++s)
    if (!std::isfinite(graphs::primitive(p.graphs.bnd, u0.bnd[s])))
      throw ValidationError("(p4)", "boundary primitive is infinite at the initial datum (slot " + std::to_string(s) + ")");
}

inline StepRecord initial_record(const Problem& p, const CoupledField& u0) {
  StepRecord rec;
  rec.t = 0.0;
  rec.u = u0;
  rec.k = mass(p.sys, p.constraint, u0);
  rec.xi.bulk = u0.bulk.unaryExpr([&](double r) { return graphs::yosida_eff(p.graphs.bulk, p.cfg.eps, r); });
  rec.xi.bnd =
      u0.bnd.unaryExpr([&](double r) { return graphs::yosida_eff(p.graphs.bnd, p.cfg.eps * p.cfg.rho, r); });
  rec.energy = energy(p.sys, p.graphs, p.cfg.energy_params(), u0).total;
  return rec;
}

/// Records at t = 0, tau, ..., T.
inline Trajectory run(const Problem& p, const CoupledField& u0, const Forcing& f) {
  check_initial_data(p, u0);
  StepSolver solver(p);
  Trajectory traj;
  traj.reserve(p.cfg.num_steps() + 1);
  traj.push_back(initial_record(p, u0));
  for (int n = 0; n < p.cfg.num_steps(); ++n) {
    const double t = (n + 1) * p.cfg.tau;
    traj.push_back(solver.step(traj.back().u, f(t), t, traj.back().lambda));
  }
  return traj;
}

}  // namespace acdyn
