#pragma once

/// JSON scenario files: parsing, validation and conversion to a Problem.

#include <cmath>
#include <fstream>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "acdyn/constraint.hpp"
#include "acdyn/errors.hpp"
#include "acdyn/graphs.hpp"
#include "acdyn/mesh.hpp"
#include "acdyn/stepper.hpp"

namespace acdyn {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Function catalog

/// Space-time function g(x, t) = s(x) m(t). Spatial kinds:
///   constant:  value
///   linear:    slope * x + offset
///   sine:      amplitude * sin(frequency * x + phase) + offset
///   tanh:      amplitude * tanh((x - center) / width) + offset
/// x is the coordinate selected by `axis` (0 or 1). Time modulation m(t) is
/// 1 (constant) or 1 + time_amplitude * sin(time_frequency * t) (sinusoidal).
struct FunctionSpec {
  std::string kind = "constant";
  double value = 0.0;
  double slope = 0.0;
  double amplitude = 0.0;
  double frequency = 1.0;
  double phase = 0.0;
  double center = 0.0;
  double width = 1.0;
  double offset = 0.0;
  int axis = 0;
  std::string time = "constant";
  double time_amplitude = 0.0;
  double time_frequency = 1.0;

  double space(const std::array<double, 2>& p) const {
    const double x = p[axis];
    if (kind == "constant") return value;
    if (kind == "linear") return slope * x + offset;
    if (kind == "sine") return amplitude * std::sin(frequency * x + phase) + offset;
    if (kind == "tanh") return amplitude * std::tanh((x - center) / width) + offset;
    throw ValidationError("config", "unknown function kind '" + kind + "'");
  }
  double modulation(double t) const {
    return time == "sinusoidal" ? 1.0 + time_amplitude * std::sin(time_frequency * t) : 1.0;
  }
};

inline FunctionSpec constant_function(double c) {
  FunctionSpec f;
  f.value = c;
  return f;
}

inline void check(const FunctionSpec& f) {
  if (f.kind != "constant" && f.kind != "linear" && f.kind != "sine" && f.kind != "tanh")
    throw ValidationError("config", "unknown function kind '" + f.kind + "'");
  if (f.time != "constant" && f.time != "sinusoidal")
    throw ValidationError("config", "unknown time modulation '" + f.time + "'");
  if (f.axis != 0 && f.axis != 1) throw ValidationError("config", "function axis must be 0 or 1");
  if (f.kind == "tanh" && !(f.width > 0.0)) throw ValidationError("config", "tanh width must be positive");
}

inline Vector sample_bulk(const Domain& d, const FunctionSpec& f, double t = 0.0) {
  Vector v(d.num_nodes());
  const double m = f.modulation(t);
  for (int i = 0; i < d.num_nodes(); ++i) v[i] = f.space(d.nodes[i]) * m;
  return v;
}

inline Vector sample_bnd(const Domain& d, const FunctionSpec& f, double t = 0.0) {
  Vector v(d.num_boundary());
  const double m = f.modulation(t);
  for (int s = 0; s < d.num_boundary(); ++s) v[s] = f.space(d.nodes[d.boundary[s]]) * m;
  return v;
}

// ---------------------------------------------------------------------------
// Scenario

struct DomainSpec {
  std::string kind = "interval";
  double lx = 1.0, ly = 1.0;
  int nx = 64, ny = 64;
};

struct OutputSpec {
  std::string dir = "out";
  int snapshot_every = 10;
};

struct Scenario {
  DomainSpec domain;
  graphs::GraphPair graphs{graphs::Linear{0.0}, graphs::Linear{0.0}};
  PerturbationSpec pert;
  FunctionSpec f, f_gamma, u0;
  std::optional<FunctionSpec> u0_gamma;  // absent: the trace of u0
  FunctionSpec w = constant_function(1.0), w_gamma = constant_function(0.0);
  double k_lo = -graphs::kInf, k_hi = graphs::kInf;
  SolverConfig solver;
  OutputSpec output;
};

// ---------------------------------------------------------------------------
// JSON <-> structs

namespace detail {

inline double get_num(const json& j, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number()) throw ValidationError("config", std::string("field '") + key + "' must be a number");
  return j.at(key).get<double>();
}

inline int get_int(const json& j, const char* key, int fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number_integer()) throw ValidationError("config", std::string("field '") + key + "' must be an integer");
  return j.at(key).get<int>();
}

inline std::string get_str(const json& j, const char* key, const std::string& fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_string()) throw ValidationError("config", std::string("field '") + key + "' must be a string");
  return j.at(key).get<std::string>();
}

/// null encodes an infinite barrier.
inline double get_barrier(const json& j, const char* key, double inf) {
  if (!j.contains(key) || j.at(key).is_null()) return inf;
  return get_num(j, key, inf);
}

inline const json& block(const json& j, const char* key) {
  static const json empty = json::object();
  if (!j.contains(key)) return empty;
  if (!j.at(key).is_object()) throw ValidationError("config", std::string("block '") + key + "' must be an object");
  return j.at(key);
}

}  // namespace detail

inline FunctionSpec function_from_json(const json& j) {
  if (j.is_number()) return constant_function(j.get<double>());
  if (!j.is_object()) throw ValidationError("config", "function must be a number or an object");
  FunctionSpec f;
  f.kind = detail::get_str(j, "kind", "constant");
  f.value = detail::get_num(j, "value", 0.0);
  f.slope = detail::get_num(j, "slope", 0.0);
  f.amplitude = detail::get_num(j, "amplitude", 0.0);
  f.frequency = detail::get_num(j, "frequency", 1.0);
  f.phase = detail::get_num(j, "phase", 0.0);
  f.center = detail::get_num(j, "center", 0.0);
  f.width = detail::get_num(j, "width", 1.0);
  f.offset = detail::get_num(j, "offset", 0.0);
  f.axis = detail::get_int(j, "axis", 0);
  if (j.contains("time")) {
    const json& t = j.at("time");
    if (t.is_string()) {
      f.time = t.get<std::string>();
    } else {
      f.time = detail::get_str(t, "kind", "constant");
      f.time_amplitude = detail::get_num(t, "amplitude", 0.0);
      f.time_frequency = detail::get_num(t, "frequency", 1.0);
    }
  }
  check(f);
  return f;
}

inline json to_json(const FunctionSpec& f) {
  json j{{"kind", f.kind}, {"axis", f.axis}};
  if (f.kind == "constant") j["value"] = f.value;
  if (f.kind == "linear") j["slope"] = f.slope;
  if (f.kind == "sine") j.update({{"amplitude", f.amplitude}, {"frequency", f.frequency}, {"phase", f.phase}});
  if (f.kind == "tanh") j.update({{"amplitude", f.amplitude}, {"center", f.center}, {"width", f.width}});
  if (f.kind != "constant") j["offset"] = f.offset;
  if (f.time == "sinusoidal")
    j["time"] = {{"kind", "sinusoidal"}, {"amplitude", f.time_amplitude}, {"frequency", f.time_frequency}};
  return j;
}

inline graphs::MonotoneGraph graph_from_json(const json& j) {
  const std::string kind = detail::get_str(j, "kind", "");
  graphs::MonotoneGraph g;
  if (kind == "zero") {
    g = graphs::Linear{0.0};
  } else if (kind == "linear") {
    g = graphs::Linear{detail::get_num(j, "a", 0.0)};
  } else if (kind == "power_odd") {
    g = graphs::PowerOdd{detail::get_num(j, "a", 1.0), detail::get_int(j, "p", 3)};
  } else if (kind == "obstacle") {
    g = graphs::Obstacle{detail::get_num(j, "lo", -1.0), detail::get_num(j, "hi", 1.0)};
  } else if (kind == "piecewise_linear") {
    graphs::PiecewiseLinear p;
    if (!j.contains("knots") || !j.at("knots").is_array())
      throw ValidationError("config", "piecewise_linear graph needs a knots array");
    for (const auto& k : j.at("knots")) {
      const double lo = detail::get_num(k, "lo", detail::get_num(k, "y", 0.0));
      p.knots.push_back({detail::get_num(k, "x", 0.0), lo, detail::get_num(k, "hi", lo)});
    }
    p.slope_left = detail::get_num(j, "slope_left", 0.0);
    p.slope_right = detail::get_num(j, "slope_right", 0.0);
    g = std::move(p);
  } else {
    throw ValidationError("config", "unknown graph kind '" + kind + "'");
  }
  try {
    graphs::validate(g);
  } catch (const std::invalid_argument& e) {
    throw ValidationError("config", e.what());
  }
  return g;
}

inline json to_json(const graphs::MonotoneGraph& g) {
  return std::visit(graphs::detail::overloaded{
                        [](const graphs::Linear& l) { return json{{"kind", "linear"}, {"a", l.a}}; },
                        [](const graphs::PowerOdd& p) { return json{{"kind", "power_odd"}, {"a", p.a}, {"p", p.p}}; },
                        [](const graphs::Obstacle& o) { return json{{"kind", "obstacle"}, {"lo", o.lo}, {"hi", o.hi}}; },
                        [](const graphs::PiecewiseLinear& p) {
                          json knots = json::array();
                          for (const auto& k : p.knots) knots.push_back({{"x", k.x}, {"lo", k.lo}, {"hi", k.hi}});
                          return json{{"kind", "piecewise_linear"},
                                      {"knots", knots},
                                      {"slope_left", p.slope_left},
                                      {"slope_right", p.slope_right}};
                        },
                    },
                    g);
}

inline Perturbation perturbation_from_json(const json& j) {
  const std::string kind = detail::get_str(j, "kind", "zero");
  if (kind == "zero") return perturbation::Zero{};
  if (kind == "linear") return perturbation::Linear{detail::get_num(j, "c", 0.0)};
  if (kind == "negate") return perturbation::Negate{};
  if (kind == "sine") return perturbation::Sine{detail::get_num(j, "amplitude", 0.0), detail::get_num(j, "frequency", 1.0)};
  throw ValidationError("config", "unknown perturbation kind '" + kind + "'");
}

inline json to_json(const Perturbation& p) {
  return std::visit(graphs::detail::overloaded{
                        [](const perturbation::Zero&) { return json{{"kind", "zero"}}; },
                        [](const perturbation::Linear& l) { return json{{"kind", "linear"}, {"c", l.c}}; },
                        [](const perturbation::Negate&) { return json{{"kind", "negate"}}; },
                        [](const perturbation::Sine& s) {
                          return json{{"kind", "sine"}, {"amplitude", s.amplitude}, {"frequency", s.frequency}};
                        },
                    },
                    p);
}

inline std::string mode_name(StepMode m) { return m == StepMode::semi_implicit ? "semi_implicit" : "fully_variational"; }

inline Scenario scenario_from_json(const json& j) {
  if (!j.is_object()) throw ValidationError("config", "scenario must be a JSON object");
  Scenario s;
  const json& dom = detail::block(j, "domain");
  s.domain.kind = detail::get_str(dom, "kind", "interval");
  if (s.domain.kind != "interval" && s.domain.kind != "rectangle")
    throw ValidationError("config", "domain kind must be interval or rectangle");
  s.domain.lx = detail::get_num(dom, "lx", 1.0);
  s.domain.ly = detail::get_num(dom, "ly", 1.0);
  s.domain.nx = detail::get_int(dom, "nx", 64);
  s.domain.ny = detail::get_int(dom, "ny", s.domain.nx);

  const json& gr = detail::block(j, "graphs");
  if (gr.contains("bulk")) s.graphs.bulk = graph_from_json(gr.at("bulk"));
  if (gr.contains("boundary")) s.graphs.bnd = graph_from_json(gr.at("boundary"));

  const json& pe = detail::block(j, "perturbation");
  if (pe.contains("bulk")) s.pert.bulk = perturbation_from_json(pe.at("bulk"));
  if (pe.contains("boundary")) s.pert.bnd = perturbation_from_json(pe.at("boundary"));
  s.pert.lip_bulk = detail::get_num(pe, "lip_bulk", 0.0);
  s.pert.lip_bnd = detail::get_num(pe, "lip_bnd", 0.0);

  const json& da = detail::block(j, "data");
  if (da.contains("f")) s.f = function_from_json(da.at("f"));
  if (da.contains("f_gamma")) s.f_gamma = function_from_json(da.at("f_gamma"));
  if (da.contains("u0")) s.u0 = function_from_json(da.at("u0"));
  if (da.contains("u0_gamma") && !da.at("u0_gamma").is_null()) s.u0_gamma = function_from_json(da.at("u0_gamma"));

  const json& co = detail::block(j, "constraint");
  if (co.contains("w")) s.w = function_from_json(co.at("w"));
  if (co.contains("w_gamma")) s.w_gamma = function_from_json(co.at("w_gamma"));
  s.k_lo = detail::get_barrier(co, "k_lo", -graphs::kInf);
  s.k_hi = detail::get_barrier(co, "k_hi", graphs::kInf);

  const json& so = detail::block(j, "solver");
  s.solver.tau = detail::get_num(so, "tau", s.solver.tau);
  s.solver.final_time = detail::get_num(so, "final_time", s.solver.final_time);
  s.solver.eps = detail::get_num(so, "eps", s.solver.eps);
  s.solver.rho = detail::get_num(gr, "rho", s.solver.rho);
  s.solver.kappa = detail::get_num(so, "kappa", s.solver.kappa);
  s.solver.newton_tol = detail::get_num(so, "newton_tol", s.solver.newton_tol);
  s.solver.newton_max_iter = detail::get_int(so, "newton_max_iter", s.solver.newton_max_iter);
  s.solver.lambda_tol = detail::get_num(so, "lambda_tol", s.solver.lambda_tol);
  s.solver.lambda_max_iter = detail::get_int(so, "lambda_max_iter", s.solver.lambda_max_iter);
  const std::string mode = detail::get_str(so, "mode", "semi_implicit");
  if (mode == "semi_implicit") s.solver.mode = StepMode::semi_implicit;
  else if (mode == "fully_variational") s.solver.mode = StepMode::fully_variational;
  else throw ValidationError("config", "unknown solver mode '" + mode + "'");

  const json& out = detail::block(j, "output");
  s.output.dir = detail::get_str(out, "dir", s.output.dir);
  s.output.snapshot_every = detail::get_int(out, "snapshot_every", s.output.snapshot_every);
  return s;
}

inline json to_json(const Scenario& s) {
  auto barrier = [](double k) { return std::isfinite(k) ? json(k) : json(nullptr); };
  json dom{{"kind", s.domain.kind}, {"lx", s.domain.lx}, {"nx", s.domain.nx}};
  if (s.domain.kind == "rectangle") dom.update({{"ly", s.domain.ly}, {"ny", s.domain.ny}});
  json data{{"f", to_json(s.f)}, {"f_gamma", to_json(s.f_gamma)}, {"u0", to_json(s.u0)}};
  data["u0_gamma"] = s.u0_gamma ? to_json(*s.u0_gamma) : json(nullptr);
  return json{
      {"domain", dom},
      {"graphs", {{"bulk", to_json(s.graphs.bulk)}, {"boundary", to_json(s.graphs.bnd)}, {"rho", s.solver.rho}}},
      {"perturbation",
       {{"bulk", to_json(s.pert.bulk)},
        {"boundary", to_json(s.pert.bnd)},
        {"lip_bulk", s.pert.lip_bulk},
        {"lip_bnd", s.pert.lip_bnd}}},
      {"data", data},
      {"constraint",
       {{"w", to_json(s.w)}, {"w_gamma", to_json(s.w_gamma)}, {"k_lo", barrier(s.k_lo)}, {"k_hi", barrier(s.k_hi)}}},
      {"solver",
       {{"tau", s.solver.tau},
        {"final_time", s.solver.final_time},
        {"eps", s.solver.eps},
        {"kappa", s.solver.kappa},
        {"mode", mode_name(s.solver.mode)},
        {"newton_tol", s.solver.newton_tol},
        {"newton_max_iter", s.solver.newton_max_iter},
        {"lambda_tol", s.solver.lambda_tol},
        {"lambda_max_iter", s.solver.lambda_max_iter}}},
      {"output", {{"dir", s.output.dir}, {"snapshot_every", s.output.snapshot_every}}},
  };
}

inline Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("config", "cannot open scenario file '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError("config", std::string("malformed JSON: ") + e.what());
  }
  return scenario_from_json(j);
}

// ---------------------------------------------------------------------------
// Building and validation

inline Domain build_domain(const DomainSpec& d) {
  try {
    return d.kind == "interval" ? make_interval(d.lx, d.nx) : make_rectangle(d.lx, d.ly, d.nx, d.ny);
  } catch (const std::invalid_argument& e) {
    throw ValidationError("config", e.what());
  }
}

inline CoupledField initial_field(const Scenario& s, const Domain& d) {
  const Vector bulk = sample_bulk(d, s.u0);
  if (!s.u0_gamma) return from_bulk(d, bulk);
  return make_field(d, bulk, sample_bnd(d, *s.u0_gamma));
}

inline Forcing forcing(const Scenario& s, const Domain& d) {
  const FunctionSpec f = s.f, fg = s.f_gamma;
  // spatial parts are sampled once; only the modulation depends on t
  const Vector fb = sample_bulk(d, f), fgb = sample_bnd(d, fg);
  return [f, fg, fb, fgb](double t) { return CoupledField{fb * f.modulation(t), fgb * fg.modulation(t), false}; };
}

struct Built {
  Problem problem;
  CoupledField u0;
  Forcing f;
};

/// Builds the problem without checking the initial datum.
inline Built build(const Scenario& s) {
  const Domain d = build_domain(s.domain);
  DiscreteSystem sys = assemble(d);
  ConstraintSpec c = make_constraint(sys, make_field(d, sample_bulk(d, s.w), sample_bnd(d, s.w_gamma)), s.k_lo, s.k_hi);
  Problem p{std::move(sys), s.graphs, std::move(c), s.pert, s.solver};
  CoupledField u0 = initial_field(s, p.sys.domain);
  Forcing f = forcing(s, p.sys.domain);
  return {std::move(p), std::move(u0), std::move(f)};
}

struct Issue {
  std::string label;
  std::string message;
};

/// All violated assumptions; empty when the scenario is valid.
inline std::vector<Issue> validate(const Scenario& s) {
  std::vector<Issue> issues;
  auto guard = [&](auto&& fn) {
    try {
      fn();
      return true;
    } catch (const ValidationError& e) {
      issues.push_back({e.label(), e.what()});
    } catch (const std::exception& e) {
      issues.push_back({"config", e.what()});
    }
    return false;
  };
  const bool solver_ok = guard([&] { validate(s.solver); });
  guard([&] {
    if (s.output.snapshot_every < 0) throw ValidationError("config", "snapshot_every must be >= 0");
  });
  guard([&] {
    if (!(s.pert.lip_bulk >= 0.0 && s.pert.lip_bnd >= 0.0))
      throw ValidationError("(pilip)", "Lipschitz constants must be nonnegative");
    const double lb = sampled_lipschitz(s.pert.bulk), lg = sampled_lipschitz(s.pert.bnd);
    if (!lipschitz_declarations_ok(s.pert)) {
      std::ostringstream msg;
      msg << "declared Lipschitz constants (" << s.pert.lip_bulk << ", " << s.pert.lip_bnd
          << ") below sampled values (" << lb << ", " << lg << ")";
      throw ValidationError("(pilip)", msg.str());
    }
  });
  std::optional<Built> b;
  if (!guard([&] { b.emplace(build(s)); }) || !solver_ok) return issues;
  const Problem& p = b->problem;
  guard([&] {
    if (!is_trace_consistent(p.sys.domain, b->u0))
      throw ValidationError("(inidata)", "initial boundary values must equal the trace of the bulk initial datum");
  });
  guard([&] {
    for (double t = 0.0; t <= p.cfg.final_time + 0.5 * p.cfg.tau; t += p.cfg.tau) {
      const CoupledField f = b->f(t);
      if (!f.bulk.allFinite() || !f.bnd.allFinite()) throw ValidationError("(inidata)", "source term is not finite");
    }
  });
  guard([&] {
    const double k0 = mass(p.sys, p.constraint, b->u0);
    const double tol = activity_tolerance(p.constraint);
    if (!feasible(p.constraint, k0, tol)) {
      std::ostringstream msg;
      msg.precision(12);
      msg << "initial mass " << k0 << (k0 < p.constraint.k_lo ? " below k_lo = " : " above k_hi = ")
          << (k0 < p.constraint.k_lo ? p.constraint.k_lo : p.constraint.k_hi);
      throw ValidationError("(p3)", msg.str());
    }
  });
  guard([&] {
    for (int i = 0; i < b->u0.bulk.size(); ++i)
      if (!std::isfinite(graphs::primitive(p.graphs.bulk, b->u0.bulk[i])))
        throw ValidationError("(p4)", "bulk primitive is infinite at u0 = " + std::to_string(b->u0.bulk[i]));
    for (int k = 0; k < b->u0.bnd.size(); ++k)
      if (!std::isfinite(graphs::primitive(p.graphs.bnd, b->u0.bnd[k])))
        throw ValidationError("(p4)", "boundary primitive is infinite at u0_gamma = " + std::to_string(b->u0.bnd[k]));
  });
  return issues;
}

/// Throws the first issue as a ValidationError.
inline Built build_validated(const Scenario& s) {
  const auto issues = validate(s);
  if (!issues.empty()) throw ValidationError(issues.front().label, issues.front().message);
  return build(s);
}

/// True when the two scenarios differ at most in f, f_gamma, u0 and u0_gamma.
inline bool same_except_data(const Scenario& a, const Scenario& b) {
  json ja = to_json(a), jb = to_json(b);
  ja.erase("data");
  jb.erase("data");
  ja.erase("output");
  jb.erase("output");
  return ja == jb;
}

}  // namespace acdyn
