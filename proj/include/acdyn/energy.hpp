#pragma once

// Discrete free energy of the coupled system and its six summands.

#include <cmath>

#include "acdyn/graphs.hpp"
#include "acdyn/mesh.hpp"

namespace acdyn {

struct EnergyBreakdown {
  double grad_bulk = 0.0;
  double envelope_bulk = 0.0;
  double quad_bulk_eps = 0.0;
  double grad_bnd = 0.0;
  double envelope_bnd = 0.0;
  double quad_bnd_eps = 0.0;
  double total = 0.0;
  bool finite = true;
};

struct EnergyParams {
  double eps = 0.0;  // 0 selects the unregularized energy (primitives, no eps terms)
  double rho = 1.0;
  double kappa = 1.0;
};

inline EnergyBreakdown energy(const DiscreteSystem& sys, const graphs::GraphPair& g, const EnergyParams& p,
                              const CoupledField& u) {
  detail::check_conforms(sys, u);
  EnergyBreakdown e;
  e.grad_bulk = 0.5 * u.bulk.dot(sys.a_bulk * u.bulk);
  e.grad_bnd = 0.5 * p.kappa * u.bnd.dot(sys.a_bnd * u.bnd);
  const double eb = p.eps, eg = p.eps * p.rho;
  for (int i = 0; i < u.bulk.size(); ++i) {
    const double r = u.bulk[i];
    e.envelope_bulk += sys.m_bulk[i] * (p.eps > 0.0 ? graphs::moreau_eff(g.bulk, eb, r) : graphs::primitive(g.bulk, r));
  }
  for (int s = 0; s < u.bnd.size(); ++s) {
    const double r = u.bnd[s];
    e.envelope_bnd += sys.m_bnd[s] * (p.eps > 0.0 ? graphs::moreau_eff(g.bnd, eg, r) : graphs::primitive(g.bnd, r));
  }
  e.quad_bulk_eps = 0.5 * p.eps * (sys.m_bulk.array() * u.bulk.array().square()).sum();
  e.quad_bnd_eps = 0.5 * p.eps * (sys.m_bnd.array() * u.bnd.array().square()).sum();
  e.total = e.grad_bulk + e.envelope_bulk + e.quad_bulk_eps + e.grad_bnd + e.envelope_bnd + e.quad_bnd_eps;
  e.finite = std::isfinite(e.total);
  return e;
}

}  // namespace acdyn
