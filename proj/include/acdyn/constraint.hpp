#pragma once

/// Weighted mass functional k(u) = (w, u)_H, the constraint set
/// K = { k_lo <= k(u) <= k_hi } and the normal cone of [k_lo, k_hi].

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>

#include "acdyn/errors.hpp"
#include "acdyn/mesh.hpp"

namespace acdyn {

struct ConstraintSpec {
  CoupledField w;
  double k_lo = -std::numeric_limits<double>::infinity();
  double k_hi = std::numeric_limits<double>::infinity();
  double sigma0 = 0.0;  // (w, 1)_H

  bool unconstrained() const { return std::isinf(k_lo) && std::isinf(k_hi); }
  bool equality() const { return k_lo == k_hi; }
};

/// Validates nonnegativity of the weights, k_lo <= k_hi and sigma0 > 0.
inline ConstraintSpec make_constraint(const DiscreteSystem& sys, CoupledField w, double k_lo, double k_hi) {
  detail::check_conforms(sys, w);
  if ((w.bulk.array() < 0.0).any() || (w.bnd.array() < 0.0).any())
    throw ValidationError("(p2)", "constraint weights must be nonnegative");
  if (std::isnan(k_lo) || std::isnan(k_hi) || !(k_lo <= k_hi))
    throw ValidationError("config", "constraint barriers must satisfy k_lo <= k_hi");
  if (k_lo == std::numeric_limits<double>::infinity() || k_hi == -std::numeric_limits<double>::infinity())
    throw ValidationError("config", "constraint barriers point the wrong way");
  ConstraintSpec c{std::move(w), k_lo, k_hi, 0.0};
  c.sigma0 = inner_H(sys, c.w, constant_field(sys.domain, 1.0));
  if (!(c.sigma0 > 0.0)) throw ValidationError("(p2)", "total weight sigma0 must be positive");
  return c;
}

/// A constraint with infinite barriers and unit bulk weight.
inline ConstraintSpec no_constraint(const DiscreteSystem& sys) {
  return make_constraint(sys, constant_field(sys.domain, 1.0), -std::numeric_limits<double>::infinity(),
                         std::numeric_limits<double>::infinity());
}

/// Absolute band used to decide barrier activity: 1e-10 max(1, |k_lo|, |k_hi|),
/// infinite barriers ignored.
inline double activity_tolerance(const ConstraintSpec& c) {
  double scale = 1.0;
  if (std::isfinite(c.k_lo)) scale = std::max(scale, std::abs(c.k_lo));
  if (std::isfinite(c.k_hi)) scale = std::max(scale, std::abs(c.k_hi));
  return 1e-10 * scale;
}

inline double mass(const DiscreteSystem& sys, const ConstraintSpec& c, const CoupledField& u) {
  return inner_H(sys, c.w, u);
}

inline bool feasible(const ConstraintSpec& c, double k, double tol) { return k >= c.k_lo - tol && k <= c.k_hi + tol; }

/// z_c = (1/sigma0, 1/sigma0); (w, z_c)_H = 1.
inline CoupledField unit_mass_field(const DiscreteSystem& sys, const ConstraintSpec& c) {
  return constant_field(sys.domain, 1.0 / c.sigma0);
}

/// lambda in the normal cone of [k_lo, k_hi] at k, up to `tol`.
inline bool multiplier_sign_ok(const ConstraintSpec& c, double k, double lambda, double tol) {
  if (!feasible(c, k, tol)) throw ValidationError("feasibility", "mass outside the constraint band");
  if (c.equality()) return true;
  const bool at_hi = k >= c.k_hi - tol;
  const bool at_lo = k <= c.k_lo + tol;
  if (at_hi && at_lo) return true;
  if (at_hi) return lambda >= -tol;
  if (at_lo) return lambda <= tol;
  return std::abs(lambda) <= tol;
}

/// lambda (w, u - z)_H >= -tol for every probe z; probes are expected to lie in K.
inline bool variational_complementarity(const DiscreteSystem& sys, const ConstraintSpec& c, const CoupledField& u,
                                        double lambda, std::span<const CoupledField> probes, double tol) {
  const double ku = mass(sys, c, u);
  return std::all_of(probes.begin(), probes.end(),
                     [&](const CoupledField& z) { return lambda * (ku - mass(sys, c, z)) >= -tol; });
}

struct MassSplit {
  double alpha;          // (w, z)_H
  CoupledField normal;   // z - alpha z_c, with (w, normal)_H = 0
};

inline MassSplit split_mass(const DiscreteSystem& sys, const ConstraintSpec& c, const CoupledField& z) {
  const double alpha = mass(sys, c, z);
  const double s = alpha / c.sigma0;
  CoupledField n{z.bulk.array() - s, z.bnd.array() - s, z.trace_consistent};
  return {alpha, std::move(n)};
}

}  // namespace acdyn
