#pragma once

/// Elliptic Robin approximation of a pair (u, u_G) by trace-consistent
/// fields: v - (1/n) Lap v = u in the bulk, (1/n) d_nu v + v = u_G on the
/// boundary.

#include <Eigen/SparseCholesky>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "acdyn/errors.hpp"
#include "acdyn/mesh.hpp"
#include "acdyn/parallel.hpp"

namespace acdyn {

inline CoupledField robin_approx(const DiscreteSystem& sys, const CoupledField& u, int n) {
  if (n < 1) throw std::invalid_argument("n must be >= 1");
  detail::check_conforms(sys, u);
  const auto& d = sys.domain;
  SparseMatrix k = sys.a_bulk / static_cast<double>(n);
  Vector rhs = (sys.m_bulk.array() * u.bulk.array()).matrix();
  for (int i = 0; i < d.num_nodes(); ++i) k.coeffRef(i, i) += sys.m_bulk[i];
  for (int s = 0; s < d.num_boundary(); ++s) {
    const int i = d.boundary[s];
    k.coeffRef(i, i) += sys.m_bnd[s];
    rhs[i] += sys.m_bnd[s] * u.bnd[s];
  }
  Eigen::SimplicialLDLT<SparseMatrix> ldlt(k);
  if (ldlt.info() != Eigen::Success) throw SolverError("Robin system factorization failed");
  return from_bulk(d, ldlt.solve(rhs));
}

struct DensityEntry {
  int n = 0;
  CoupledField v;
  double err_bulk = 0.0;    // |v - u|_H
  double err_bnd = 0.0;     // |v_G - u_G|_{H_G}
  double energy_lhs = 0.0;  // |v|^2/2 + |grad v|^2/n + |v_G|^2/2
  double energy_bound = 0.0;  // |u|^2/2 + |u_G|^2/2
  double norm_sq = 0.0;     // |v|^2 + |v_G|^2
  double norm_sq_data = 0.0;  // |u|^2 + |u_G|^2
};

struct DensityRun {
  std::vector<int> n_list;
  std::vector<DensityEntry> entries;

  bool errors_strictly_decreasing() const {
    for (std::size_t j = 1; j < entries.size(); ++j)
      if (!(entries[j].err_bulk < entries[j - 1].err_bulk) || !(entries[j].err_bnd < entries[j - 1].err_bnd))
        return false;
    return true;
  }
  bool energy_bound_holds() const {
    for (const auto& e : entries)
      if (!(e.energy_lhs <= e.energy_bound)) return false;
    return true;
  }
  bool norm_bound_holds(double slack = 1e-10) const {
    for (const auto& e : entries)
      if (!(e.norm_sq <= e.norm_sq_data + slack)) return false;
    return true;
  }
};

inline DensityRun density_study(const DiscreteSystem& sys, const CoupledField& u, const std::vector<int>& n_list) {
  for (std::size_t j = 1; j < n_list.size(); ++j)
    if (!(n_list[j] > n_list[j - 1])) throw std::invalid_argument("n list must be increasing");
  DensityRun run;
  run.n_list = n_list;
  run.entries.resize(n_list.size());
  auto wsq_bulk = [&](const Vector& v) { return (sys.m_bulk.array() * v.array().square()).sum(); };
  auto wsq_bnd = [&](const Vector& v) { return (sys.m_bnd.array() * v.array().square()).sum(); };
  parallel_for(n_list.size(), [&](std::size_t j) {
    DensityEntry& e = run.entries[j];
    e.n = n_list[j];
    e.v = robin_approx(sys, u, e.n);
    e.err_bulk = std::sqrt(wsq_bulk(e.v.bulk - u.bulk));
    e.err_bnd = std::sqrt(wsq_bnd(e.v.bnd - u.bnd));
    const double vb = wsq_bulk(e.v.bulk), vg = wsq_bnd(e.v.bnd);
    const double ub = wsq_bulk(u.bulk), ug = wsq_bnd(u.bnd);
    e.energy_lhs = 0.5 * vb + e.v.bulk.dot(sys.a_bulk * e.v.bulk) / e.n + 0.5 * vg;
    e.energy_bound = 0.5 * ub + 0.5 * ug;
    e.norm_sq = vb + vg;
    e.norm_sq_data = ub + ug;
  });
  return run;
}

}  // namespace acdyn
