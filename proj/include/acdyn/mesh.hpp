#pragma once

/// Structured discretization of the bulk domain and its boundary curve, and
/// assembly of the operators of the coupled bulk/boundary weak form:
/// bulk stiffness and lumped mass, boundary (Laplace-Beltrami) stiffness and
/// lumped mass. Boundary unknowns are identified with bulk nodes (trace by
/// identification), so a trace-consistent field is fully described by its
/// bulk vector.

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace acdyn {

using Vector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

enum class DomainKind { interval, rectangle };

struct Domain {
  DomainKind kind = DomainKind::interval;
  double lx = 1.0, ly = 0.0;
  int nx = 0, ny = 0;
  std::vector<std::array<double, 2>> nodes;
  std::vector<int> boundary;     // ordered traversal of the boundary
  std::vector<double> arc;       // arc-length coordinate of each boundary node
  std::vector<int> boundary_slot;  // bulk node -> position in `boundary`, or -1

  int num_nodes() const { return static_cast<int>(nodes.size()); }
  int num_boundary() const { return static_cast<int>(boundary.size()); }
  bool on_boundary(int node) const { return boundary_slot[node] >= 0; }
  int dim() const { return kind == DomainKind::interval ? 1 : 2; }
};

namespace detail {
inline void index_boundary(Domain& d) {
  d.boundary_slot.assign(d.nodes.size(), -1);
  for (int s = 0; s < d.num_boundary(); ++s) {
    if (d.boundary_slot[d.boundary[s]] != -1) throw std::logic_error("duplicate boundary node");
    d.boundary_slot[d.boundary[s]] = s;
  }
}
}  // namespace detail

inline Domain make_interval(double lx, int nx) {
  if (nx < 2) throw std::invalid_argument("interval needs nx >= 2 cells, got " + std::to_string(nx));
  if (!(lx > 0.0)) throw std::invalid_argument("interval length must be positive");
  Domain d;
  d.kind = DomainKind::interval;
  d.lx = lx;
  d.nx = nx;
  for (int i = 0; i <= nx; ++i) d.nodes.push_back({lx * i / nx, 0.0});
  d.boundary = {0, nx};
  d.arc = {0.0, lx};
  detail::index_boundary(d);
  return d;
}

/// Nodes are numbered row by row, node(i, j) = j (nx + 1) + i. The boundary
/// loop runs counterclockwise from the origin.
inline Domain make_rectangle(double lx, double ly, int nx, int ny) {
  if (nx < 2 || ny < 2)
    throw std::invalid_argument("rectangle needs nx, ny >= 2 cells, got " + std::to_string(nx) + "x" +
                                std::to_string(ny));
  if (!(lx > 0.0 && ly > 0.0)) throw std::invalid_argument("rectangle sides must be positive");
  Domain d;
  d.kind = DomainKind::rectangle;
  d.lx = lx;
  d.ly = ly;
  d.nx = nx;
  d.ny = ny;
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i) d.nodes.push_back({lx * i / nx, ly * j / ny});
  auto id = [nx](int i, int j) { return j * (nx + 1) + i; };
  for (int i = 0; i < nx; ++i) d.boundary.push_back(id(i, 0));
  for (int j = 0; j < ny; ++j) d.boundary.push_back(id(nx, j));
  for (int i = nx; i > 0; --i) d.boundary.push_back(id(i, ny));
  for (int j = ny; j > 0; --j) d.boundary.push_back(id(0, j));
  double s = 0.0;
  for (std::size_t k = 0; k < d.boundary.size(); ++k) {
    d.arc.push_back(s);
    const auto& p = d.nodes[d.boundary[k]];
    const auto& q = d.nodes[d.boundary[(k + 1) % d.boundary.size()]];
    s += std::hypot(q[0] - p[0], q[1] - p[1]);
  }
  detail::index_boundary(d);
  return d;
}

/// A pair (bulk values, boundary values). `trace_consistent` marks members of
/// the discrete trace space: bnd[s] == bulk[boundary[s]] exactly.
struct CoupledField {
  Vector bulk;
  Vector bnd;
  bool trace_consistent = false;
};

inline CoupledField from_bulk(const Domain& d, const Vector& bulk) {
  if (bulk.size() != d.num_nodes()) throw std::invalid_argument("bulk vector size mismatch");
  CoupledField f{bulk, Vector(d.num_boundary()), true};
  for (int s = 0; s < d.num_boundary(); ++s) f.bnd[s] = bulk[d.boundary[s]];
  return f;
}

inline CoupledField constant_field(const Domain& d, double c) {
  return from_bulk(d, Vector::Constant(d.num_nodes(), c));
}

inline CoupledField make_field(const Domain& d, const Vector& bulk, const Vector& bnd) {
  if (bulk.size() != d.num_nodes() || bnd.size() != d.num_boundary())
    throw std::invalid_argument("coupled field size mismatch");
  CoupledField f{bulk, bnd, false};
  bool same = true;
  for (int s = 0; s < d.num_boundary() && same; ++s) same = bnd[s] == bulk[d.boundary[s]];
  f.trace_consistent = same;
  return f;
}

/// Exact check of bnd == trace(bulk).
inline bool is_trace_consistent(const Domain& d, const CoupledField& f) {
  if (f.bulk.size() != d.num_nodes() || f.bnd.size() != d.num_boundary()) return false;
  for (int s = 0; s < d.num_boundary(); ++s)
    if (f.bnd[s] != f.bulk[d.boundary[s]]) return false;
  return true;
}

struct DiscreteSystem {
  Domain domain;
  SparseMatrix a_bulk;  // bulk stiffness
  SparseMatrix a_bnd;   // boundary stiffness, indexed by boundary slot
  Vector m_bulk;        // lumped bulk mass
  Vector m_bnd;         // lumped boundary mass

  double measure_bulk() const { return m_bulk.sum(); }
  double measure_bnd() const { return m_bnd.sum(); }
};

namespace detail {
/// Rounds off-diagonal entries to multiples of 2^-48 times a power of two
/// bounding them (relative change below 4e-15) and sets each diagonal entry
/// to minus its off-diagonal row sum. Every partial row sum is then exactly
/// representable, so A 1 = 0 holds in floating point for any summation order.
inline void exact_zero_rows(SparseMatrix& a) {
  double big = 0.0;
  for (int k = 0; k < a.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(a, k); it; ++it)
      if (it.row() != it.col()) big = std::max(big, std::abs(it.value()));
  if (big == 0.0) return;
  const double quantum = std::ldexp(1.0, std::ilogb(big) + 1 - 48);
  for (int k = 0; k < a.outerSize(); ++k) {
    double off = 0.0;
    for (SparseMatrix::InnerIterator it(a, k); it; ++it) {
      if (it.row() == it.col()) continue;
      it.valueRef() = std::round(it.value() / quantum) * quantum;
      off += it.value();
    }
    a.coeffRef(k, k) = -off;
  }
}
}  // namespace detail

/// P1 elements on the interval, bilinear Q1 cells on the rectangle, periodic
/// P1 chain along the boundary polyline, lumped (row-sum) masses. In 1D the
/// boundary measure is counting measure on the two endpoints and the boundary
/// stiffness vanishes.
inline DiscreteSystem assemble(const Domain& d) {
  DiscreteSystem sys;
  sys.domain = d;
  const int n = d.num_nodes();
  const int nb = d.num_boundary();
  std::vector<Triplet> trip;
  sys.m_bulk = Vector::Zero(n);
  sys.m_bnd = Vector::Zero(nb);
  sys.a_bnd.resize(nb, nb);

  if (d.kind == DomainKind::interval) {
    const double h = d.lx / d.nx;
    for (int e = 0; e < d.nx; ++e) {
      trip.emplace_back(e, e, 1.0 / h);
      trip.emplace_back(e + 1, e + 1, 1.0 / h);
      trip.emplace_back(e, e + 1, -1.0 / h);
      trip.emplace_back(e + 1, e, -1.0 / h);
      sys.m_bulk[e] += 0.5 * h;
      sys.m_bulk[e + 1] += 0.5 * h;
    }
    sys.m_bnd.setOnes();
  } else {
    const double hx = d.lx / d.nx, hy = d.ly / d.ny;
    const double ax = hy / (6.0 * hx), ay = hx / (6.0 * hy);
    // local ordering (0,0), (1,0), (1,1), (0,1)
    static constexpr double kx[4][4] = {{2, -2, -1, 1}, {-2, 2, 1, -1}, {-1, 1, 2, -2}, {1, -1, -2, 2}};
    static constexpr double ky[4][4] = {{2, 1, -1, -2}, {1, 2, -2, -1}, {-1, -2, 2, 1}, {-2, -1, 1, 2}};
    auto id = [&](int i, int j) { return j * (d.nx + 1) + i; };
    for (int j = 0; j < d.ny; ++j) {
      for (int i = 0; i < d.nx; ++i) {
        const int loc[4] = {id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)};
        for (int a = 0; a < 4; ++a) {
          sys.m_bulk[loc[a]] += 0.25 * hx * hy;
          for (int b = 0; b < 4; ++b) trip.emplace_back(loc[a], loc[b], ax * kx[a][b] + ay * ky[a][b]);
        }
      }
    }
    std::vector<Triplet> btrip;
    for (int s = 0; s < nb; ++s) {
      const int t = (s + 1) % nb;
      const auto& p = d.nodes[d.boundary[s]];
      const auto& q = d.nodes[d.boundary[t]];
      const double len = std::hypot(q[0] - p[0], q[1] - p[1]);
      btrip.emplace_back(s, s, 1.0 / len);
      btrip.emplace_back(t, t, 1.0 / len);
      btrip.emplace_back(s, t, -1.0 / len);
      btrip.emplace_back(t, s, -1.0 / len);
      sys.m_bnd[s] += 0.5 * len;
      sys.m_bnd[t] += 0.5 * len;
    }
    sys.a_bnd.setFromTriplets(btrip.begin(), btrip.end());
  }
  sys.a_bulk.resize(n, n);
  sys.a_bulk.setFromTriplets(trip.begin(), trip.end());
  if (d.kind == DomainKind::rectangle) {
    detail::exact_zero_rows(sys.a_bulk);
    detail::exact_zero_rows(sys.a_bnd);
  }
  return sys;
}

namespace detail {
inline void check_conforms(const DiscreteSystem& sys, const CoupledField& f) {
  if (f.bulk.size() != sys.domain.num_nodes() || f.bnd.size() != sys.domain.num_boundary())
    throw std::invalid_argument("field does not conform to the discrete system");
}
}  // namespace detail

/// (a, b)_H = a^T M b + a_G^T M_G b_G.
inline double inner_H(const DiscreteSystem& sys, const CoupledField& a, const CoupledField& b) {
  detail::check_conforms(sys, a);
  detail::check_conforms(sys, b);
  return (sys.m_bulk.array() * a.bulk.array() * b.bulk.array()).sum() +
         (sys.m_bnd.array() * a.bnd.array() * b.bnd.array()).sum();
}

inline double norm_H(const DiscreteSystem& sys, const CoupledField& a) { return std::sqrt(inner_H(sys, a, a)); }

/// Discrete normal derivative recovered from the variational residual: at a
/// boundary node, (A u)_i / m_bnd. Interior rows of A u are -M Delta_h u, so
/// <A u, v> = -<Delta_h u, v>_interior + <flux, v_G>_G for trace fields.
inline Vector normal_flux(const DiscreteSystem& sys, const CoupledField& u) {
  detail::check_conforms(sys, u);
  if (!is_trace_consistent(sys.domain, u)) throw std::invalid_argument("normal_flux needs a trace-consistent field");
  const Vector au = sys.a_bulk * u.bulk;
  Vector flux(sys.domain.num_boundary());
  for (int s = 0; s < sys.domain.num_boundary(); ++s) flux[s] = au[sys.domain.boundary[s]] / sys.m_bnd[s];
  return flux;
}

/// Discrete Laplacian at interior nodes, -(A u)_i / m_i; zero on boundary nodes.
inline Vector interior_laplacian(const DiscreteSystem& sys, const Vector& u) {
  Vector lap = -(sys.a_bulk * u);
  for (int i = 0; i < lap.size(); ++i) lap[i] = sys.domain.on_boundary(i) ? 0.0 : lap[i] / sys.m_bulk[i];
  return lap;
}

/// Discrete Laplace-Beltrami of boundary values, -(A_G u_G)_s / m_G,s.
inline Vector boundary_laplacian(const DiscreteSystem& sys, const Vector& ug) {
  return -(sys.a_bnd * ug).cwiseQuotient(sys.m_bnd);
}

}  // namespace acdyn
