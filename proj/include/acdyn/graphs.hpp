#pragma once

/// Maximal monotone graphs on the real line, their resolvents and their
/// Yosida / Moreau regularizations.
///
/// A graph is stored through a closed-form description (kind + parameters).
/// Multivalued points (vertical segments) are never materialized except in
/// `value_range` and `minimal_section`; every other operation goes through
/// the resolvent, which is single valued.

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "acdyn/errors.hpp"

namespace acdyn::graphs {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// beta(r) = a r, a >= 0.
struct Linear {
  double a = 0.0;
};

/// beta(r) = a r^p, a >= 0, p odd and >= 1.
struct PowerOdd {
  double a = 1.0;
  int p = 3;
};

/// Subdifferential of the indicator of [lo, hi], lo <= 0 <= hi.
struct Obstacle {
  double lo = -1.0;
  double hi = 1.0;
};

/// A node of a piecewise linear graph: beta(x) = [lo, hi].
struct Knot {
  double x = 0.0;
  double lo = 0.0;
  double hi = 0.0;
};

/// Piecewise linear monotone graph. Between consecutive knots the graph is
/// the segment joining (x_i, hi_i) to (x_{i+1}, lo_{i+1}); a knot with
/// lo < hi is a vertical segment. Outside the knot range the graph continues
/// with the given nonnegative slopes.
struct PiecewiseLinear {
  std::vector<Knot> knots;
  double slope_left = 0.0;
  double slope_right = 0.0;
};

using MonotoneGraph = std::variant<Linear, PowerOdd, Obstacle, PiecewiseLinear>;

/// The bulk graph beta and the boundary graph beta_G.
struct GraphPair {
  MonotoneGraph bulk;
  MonotoneGraph bnd;
};

enum class Role { bulk, boundary };

/// Regularization parameters. The boundary graph is regularized with eps*rho,
/// the bulk graph with eps.
struct YosidaParams {
  double eps = 1.0;
  double rho = 1.0;
  Role role = Role::bulk;

  double effective() const { return role == Role::bulk ? eps : eps * rho; }
};

struct GrowthConstants {
  double c0 = 1.0;
  double rho = 1.0;
};

namespace detail {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

inline double ipow(double r, int p) {
  double out = 1.0;
  for (int i = 0; i < p; ++i) out *= r;
  return out;
}

// Single-valued branch of a piecewise linear graph, approached from the
// left (right = false) or from the right (right = true).
inline double pwl_limit(const PiecewiseLinear& g, double r, bool right) {
  const auto& k = g.knots;
  if (r < k.front().x) return k.front().lo + g.slope_left * (r - k.front().x);
  if (r > k.back().x) return k.back().hi + g.slope_right * (r - k.back().x);
  for (std::size_t i = 0; i < k.size(); ++i) {
    if (r == k[i].x) return right ? k[i].hi : k[i].lo;
    if (i + 1 < k.size() && r < k[i + 1].x) {
      const double t = (r - k[i].x) / (k[i + 1].x - k[i].x);
      return k[i].hi + t * (k[i + 1].lo - k[i].hi);
    }
  }
  return k.back().hi;
}

// Exact integral of the a.e. single-valued branch over [a, b], a <= b.
inline double pwl_integral(const PiecewiseLinear& g, double a, double b) {
  std::vector<double> pts{a};
  for (const auto& kn : g.knots)
    if (kn.x > a && kn.x < b) pts.push_back(kn.x);
  pts.push_back(b);
  double sum = 0.0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const double p = pts[i], q = pts[i + 1];
    sum += 0.5 * (q - p) * (pwl_limit(g, p, true) + pwl_limit(g, q, false));
  }
  return sum;
}

struct ResolventValue {
  double value;
  double slope;  // left-limit derivative of the resolvent
};

inline ResolventValue pwl_resolvent(const PiecewiseLinear& g, double e, double r) {
  const auto& k = g.knots;
  const double y_lo0 = k.front().x + e * k.front().lo;
  if (r < y_lo0) {
    const double s = 1.0 / (1.0 + e * g.slope_left);
    return {k.front().x + (r - y_lo0) * s, s};
  }
  for (std::size_t i = 0; i < k.size(); ++i) {
    const double y_lo = k[i].x + e * k[i].lo;
    const double y_hi = k[i].x + e * k[i].hi;
    if (r <= y_hi) {
      // r in [y_lo, y_hi]: flat part. At r == y_lo the left limit comes from
      // the sloped piece below.
      double slope = 0.0;
      if (r == y_lo) {
        if (i == 0) {
          slope = 1.0 / (1.0 + e * g.slope_left);
        } else {
          const double y_hi_prev = k[i - 1].x + e * k[i - 1].hi;
          slope = (k[i].x - k[i - 1].x) / (y_lo - y_hi_prev);
        }
      }
      return {k[i].x, slope};
    }
    if (i + 1 < k.size()) {
      const double y_lo_next = k[i + 1].x + e * k[i + 1].lo;
      if (r < y_lo_next) {
        const double s = (k[i + 1].x - k[i].x) / (y_lo_next - y_hi);
        return {k[i].x + (r - y_hi) * s, s};
      }
    }
  }
  const double y_hi_last = k.back().x + e * k.back().hi;
  const double s = 1.0 / (1.0 + e * g.slope_right);
  return {k.back().x + (r - y_hi_last) * s, s};
}

inline ResolventValue power_resolvent(const PowerOdd& g, double e, double r) {
  if (g.a == 0.0 || r == 0.0) return {r, 1.0};
  const double ea = e * g.a;
  // J + ea J^p = r is strictly increasing in J; the root lies between 0 and r.
  double lo = std::min(0.0, r), hi = std::max(0.0, r);
  double j = r / (1.0 + ea * std::pow(std::abs(r), g.p - 1));
  constexpr int kMaxIter = 200;
  for (int it = 0; it < kMaxIter; ++it) {
    const double f = j + ea * ipow(j, g.p) - r;
    const double df = 1.0 + ea * g.p * ipow(j, g.p - 1);
    if (f == 0.0) return {j, 1.0 / df};
    if (f > 0.0) hi = j; else lo = j;
    double next = j - f / df;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    const double step = std::abs(next - j);
    j = next;
    if (step <= 1e-14 * std::max(std::abs(j), 1e-300) || hi - lo <= 1e-16 * std::abs(j)) {
      return {j, 1.0 / (1.0 + ea * g.p * ipow(j, g.p - 1))};
    }
  }
  throw SolverError("power-law resolvent did not converge for r = " + std::to_string(r));
}

}  // namespace detail

/// Throws std::invalid_argument when the parameters do not describe a
/// maximal monotone graph with 0 in beta(0).
inline void validate(const MonotoneGraph& g) {
  std::visit(
      detail::overloaded{
          [](const Linear& l) {
            if (!(l.a >= 0.0)) throw std::invalid_argument("linear graph: slope must be >= 0");
          },
          [](const PowerOdd& p) {
            if (!(p.a >= 0.0)) throw std::invalid_argument("power graph: coefficient must be >= 0");
            if (p.p < 1 || p.p % 2 == 0) throw std::invalid_argument("power graph: exponent must be odd and >= 1");
          },
          [](const Obstacle& o) {
            if (!(o.lo <= 0.0 && 0.0 <= o.hi))
              throw std::invalid_argument("obstacle graph: interval must contain 0");
          },
          [](const PiecewiseLinear& g) {
            if (g.knots.empty()) throw std::invalid_argument("piecewise graph: no knots");
            if (!(g.slope_left >= 0.0 && g.slope_right >= 0.0))
              throw std::invalid_argument("piecewise graph: outer slopes must be >= 0");
            for (std::size_t i = 0; i < g.knots.size(); ++i) {
              const auto& k = g.knots[i];
              if (!(k.lo <= k.hi)) throw std::invalid_argument("piecewise graph: knot with lo > hi");
              if (i + 1 < g.knots.size()) {
                if (!(k.x < g.knots[i + 1].x))
                  throw std::invalid_argument("piecewise graph: knots must be strictly increasing");
                if (!(k.hi <= g.knots[i + 1].lo))
                  throw std::invalid_argument("piecewise graph: graph is not monotone");
              }
            }
            const double l = detail::pwl_limit(g, 0.0, false), h = detail::pwl_limit(g, 0.0, true);
            if (!(l <= 0.0 && 0.0 <= h)) throw std::invalid_argument("piecewise graph: 0 must belong to beta(0)");
          },
      },
      g);
}

inline std::string kind_name(const MonotoneGraph& g) {
  return std::visit(detail::overloaded{
                        [](const Linear&) { return std::string("linear"); },
                        [](const PowerOdd&) { return std::string("power_odd"); },
                        [](const Obstacle&) { return std::string("obstacle"); },
                        [](const PiecewiseLinear&) { return std::string("piecewise_linear"); },
                    },
                    g);
}

/// The set beta(r) as a closed interval. Empty domain points raise DomainError.
inline std::pair<double, double> value_range(const MonotoneGraph& g, double r) {
  return std::visit(
      detail::overloaded{
          [r](const Linear& l) { return std::pair{l.a * r, l.a * r}; },
          [r](const PowerOdd& p) {
            const double v = p.a * detail::ipow(r, p.p);
            return std::pair{v, v};
          },
          [r](const Obstacle& o) {
            if (r < o.lo || r > o.hi) throw DomainError("point outside the obstacle interval");
            const double lo = (r == o.lo) ? -kInf : 0.0;
            const double hi = (r == o.hi) ? kInf : 0.0;
            return std::pair{lo, hi};
          },
          [r](const PiecewiseLinear& g) {
            return std::pair{detail::pwl_limit(g, r, false), detail::pwl_limit(g, r, true)};
          },
      },
      g);
}

/// Convex primitive with primitive(0) = 0; +inf outside the obstacle interval.
inline double primitive(const MonotoneGraph& g, double r) {
  return std::visit(
      detail::overloaded{
          [r](const Linear& l) { return 0.5 * l.a * r * r; },
          [r](const PowerOdd& p) { return p.a * std::abs(detail::ipow(r, p.p + 1)) / (p.p + 1); },
          [r](const Obstacle& o) { return (r >= o.lo && r <= o.hi) ? 0.0 : kInf; },
          [r](const PiecewiseLinear& g) {
            return r >= 0.0 ? detail::pwl_integral(g, 0.0, r) : -detail::pwl_integral(g, r, 0.0);
          },
      },
      g);
}

/// Element of beta(r) of least absolute value.
inline double minimal_section(const MonotoneGraph& g, double r) {
  const auto [lo, hi] = value_range(g, r);
  if (lo <= 0.0 && 0.0 <= hi) return 0.0;
  return lo > 0.0 ? lo : hi;
}

/// Resolvent (I + e beta)^{-1}(r) with an explicit effective parameter e > 0.
inline double resolvent_eff(const MonotoneGraph& g, double e, double r) {
  return std::visit(
      detail::overloaded{
          [e, r](const Linear& l) { return r / (1.0 + e * l.a); },
          [e, r](const PowerOdd& p) { return detail::power_resolvent(p, e, r).value; },
          [r](const Obstacle& o) { return std::clamp(r, o.lo, o.hi); },
          [e, r](const PiecewiseLinear& g) { return detail::pwl_resolvent(g, e, r).value; },
      },
      g);
}

/// Left-limit derivative of the resolvent; this is the generalized
/// derivative used by semismooth Newton.
inline double resolvent_slope_eff(const MonotoneGraph& g, double e, double r) {
  return std::visit(
      detail::overloaded{
          [e](const Linear& l) { return 1.0 / (1.0 + e * l.a); },
          [e, r](const PowerOdd& p) { return detail::power_resolvent(p, e, r).slope; },
          [r](const Obstacle& o) { return (r > o.lo && r <= o.hi) ? 1.0 : 0.0; },
          [e, r](const PiecewiseLinear& g) { return detail::pwl_resolvent(g, e, r).slope; },
      },
      g);
}

inline double yosida_eff(const MonotoneGraph& g, double e, double r) {
  return (r - resolvent_eff(g, e, r)) / e;
}

inline double yosida_slope_eff(const MonotoneGraph& g, double e, double r) {
  return (1.0 - resolvent_slope_eff(g, e, r)) / e;
}

inline double moreau_eff(const MonotoneGraph& g, double e, double r) {
  const double j = resolvent_eff(g, e, r);
  const double d = r - j;
  // Obstacle: j always lies in the interval, so the primitive term is 0.
  return d * d / (2.0 * e) + primitive(g, j);
}

inline void check_params(const YosidaParams& p) {
  if (!(p.eps > 0.0 && p.eps <= 1.0)) throw std::invalid_argument("eps must lie in (0, 1]");
  if (!(p.rho > 0.0)) throw std::invalid_argument("rho must be positive");
}

inline double resolvent(const MonotoneGraph& g, const YosidaParams& p, double r) {
  check_params(p);
  return resolvent_eff(g, p.effective(), r);
}

inline double yosida(const MonotoneGraph& g, const YosidaParams& p, double r) {
  check_params(p);
  return yosida_eff(g, p.effective(), r);
}

inline double yosida_slope(const MonotoneGraph& g, const YosidaParams& p, double r) {
  check_params(p);
  return yosida_slope_eff(g, p.effective(), r);
}

inline double moreau(const MonotoneGraph& g, const YosidaParams& p, double r) {
  check_params(p);
  return moreau_eff(g, p.effective(), r);
}

/// 201 equispaced points on [-3, 3].
inline std::vector<double> default_grid(int n = 201, double a = -3.0, double b = 3.0) {
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) out[i] = a + (b - a) * i / (n - 1);
  return out;
}

struct ConditionResult {
  std::string name;
  bool pass = true;
  double worst_ratio = 0.0;  // max of lhs / rhs over the grid
  int domain_violations = 0;
};

struct GrowthReport {
  std::vector<ConditionResult> conditions;

  bool all_pass() const {
    return std::all_of(conditions.begin(), conditions.end(), [](const auto& c) { return c.pass; });
  }
  const ConditionResult* find(const std::string& name) const {
    for (const auto& c : conditions)
      if (c.name == name) return &c;
    return nullptr;
  }
};

/// Samples the growth and compatibility conditions
///   |beta°| <= c0 (1 + beta^), |beta_G°| <= c0 (1 + beta_G^), |beta°| <= rho |beta_G°| + c0
/// and their Yosida analogs for each eps in `eps_list`. Report only.
inline GrowthReport check_growth(const MonotoneGraph& bulk, const MonotoneGraph& bnd, const GrowthConstants& c,
                                 std::span<const double> grid, std::span<const double> eps_list = {}) {
  GrowthReport report;
  auto accumulate = [](ConditionResult& res, double lhs, double rhs) {
    const double ratio = rhs > 0.0 ? lhs / rhs : (lhs > 0.0 ? kInf : 0.0);
    res.worst_ratio = std::max(res.worst_ratio, ratio);
    if (lhs > rhs * (1.0 + 1e-12)) res.pass = false;
  };

  ConditionResult c5{"growth_bulk"}, c6{"growth_boundary"}, c7{"compatibility"};
  for (double r : grid) {
    double sb = 0.0, sg = 0.0;
    bool ok_b = true, ok_g = true;
    try { sb = std::abs(minimal_section(bulk, r)); } catch (const DomainError&) { ok_b = false; }
    try { sg = std::abs(minimal_section(bnd, r)); } catch (const DomainError&) { ok_g = false; }
    if (ok_b) accumulate(c5, sb, c.c0 * (1.0 + primitive(bulk, r)));
    else { c5.pass = false; ++c5.domain_violations; }
    if (ok_g) accumulate(c6, sg, c.c0 * (1.0 + primitive(bnd, r)));
    else { c6.pass = false; ++c6.domain_violations; }
    if (ok_b && ok_g) accumulate(c7, sb, c.rho * sg + c.c0);
    else { c7.pass = false; ++c7.domain_violations; }
  }
  report.conditions = {c5, c6, c7};

  for (double eps : eps_list) {
    const std::string tag = "(eps=" + std::to_string(eps) + ")";
    ConditionResult y5{"yosida_growth_bulk" + tag}, y6{"yosida_growth_boundary" + tag},
        y7{"yosida_compatibility" + tag};
    const double eb = eps, eg = eps * c.rho;
    for (double r : grid) {
      const double yb = std::abs(yosida_eff(bulk, eb, r));
      const double yg = std::abs(yosida_eff(bnd, eg, r));
      accumulate(y5, yb, c.c0 * (1.0 + moreau_eff(bulk, eb, r)));
      accumulate(y6, yg, c.c0 * (1.0 + moreau_eff(bnd, eg, r)));
      accumulate(y7, yb, c.rho * yg + c.c0);
    }
    report.conditions.push_back(y5);
    report.conditions.push_back(y6);
    report.conditions.push_back(y7);
  }
  return report;
}

/// Graph used by the test suites as the piecewise linear representative:
/// a vertical segment beta(0) = [-0.7, 1.3], a kink at x = 8/7 and outer
/// slopes 0.5 and 3.
inline PiecewiseLinear catalog_piecewise() {
  return PiecewiseLinear{{{0.0, -0.7, 1.3}, {8.0 / 7.0, 2.0, 2.0}}, 0.5, 3.0};
}

}  // namespace acdyn::graphs
