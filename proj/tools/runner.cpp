#include "runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "conelab/constants.hpp"
#include "conelab/error.hpp"
#include "conelab/functionals.hpp"
#include "conelab/hopf_lax.hpp"
#include "conelab/hypercontractivity.hpp"
#include "conelab/quadrature.hpp"
#include "conelab/transport1d.hpp"

#ifndef CONELAB_VERSION
#define CONELAB_VERSION "unknown"
#endif

namespace conelab::cli {

namespace {

[[noreturn]] void invalid(const std::string& msg) { fail(ErrorKind::ConfigInvalid, msg); }

std::string quoted(const std::string& path) { return "\"" + path + "\""; }

// Read access to one JSON object with key paths in the error messages.
class Node {
 public:
  Node(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) invalid(quoted(path_.empty() ? "<root>" : path_) + " must be a JSON object");
  }

  [[nodiscard]] const json& j() const { return j_; }

  [[nodiscard]] bool has(const std::string& key) const { return j_.contains(key) && !j_.at(key).is_null(); }

  [[nodiscard]] std::string key_path(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  [[nodiscard]] const json& raw(const std::string& key) const {
    if (!has(key)) invalid("missing required key " + quoted(key_path(key)));
    return j_.at(key);
  }

  [[nodiscard]] Node child(const std::string& key) const { return {raw(key), key_path(key)}; }

  [[nodiscard]] double num(const std::string& key) const {
    const json& v = raw(key);
    if (!v.is_number()) invalid("key " + quoted(key_path(key)) + " must be a number");
    return v.get<double>();
  }
  [[nodiscard]] double num(const std::string& key, double fallback) const { return has(key) ? num(key) : fallback; }

  [[nodiscard]] int integer(const std::string& key, int fallback) const {
    if (!has(key)) return fallback;
    const json& v = raw(key);
    if (!v.is_number_integer()) invalid("key " + quoted(key_path(key)) + " must be an integer");
    return v.get<int>();
  }

  [[nodiscard]] bool boolean(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    const json& v = raw(key);
    if (!v.is_boolean()) invalid("key " + quoted(key_path(key)) + " must be true or false");
    return v.get<bool>();
  }

  [[nodiscard]] std::string str(const std::string& key) const {
    const json& v = raw(key);
    if (!v.is_string()) invalid("key " + quoted(key_path(key)) + " must be a string");
    return v.get<std::string>();
  }
  [[nodiscard]] std::string str(const std::string& key, const std::string& fallback) const {
    return has(key) ? str(key) : fallback;
  }

  [[nodiscard]] std::vector<double> vec(const std::string& key) const {
    const json& v = raw(key);
    if (v.is_number()) return {v.get<double>()};
    if (!v.is_array()) invalid("key " + quoted(key_path(key)) + " must be a number or an array of numbers");
    std::vector<double> out;
    for (const auto& e : v) {
      if (!e.is_number()) invalid("key " + quoted(key_path(key)) + " must hold numbers only");
      out.push_back(e.get<double>());
    }
    return out;
  }
  [[nodiscard]] std::vector<double> vec(const std::string& key, std::vector<double> fallback) const {
    return has(key) ? vec(key) : fallback;
  }

  [[nodiscard]] std::vector<Point> points(const std::string& key) const {
    const json& v = raw(key);
    if (!v.is_array()) invalid("key " + quoted(key_path(key)) + " must be an array of points");
    std::vector<Point> out;
    for (const auto& e : v) {
      if (!e.is_array()) invalid("key " + quoted(key_path(key)) + " must be an array of points");
      Point pt;
      for (const auto& c : e) pt.push_back(c.get<double>());
      out.push_back(pt);
    }
    return out;
  }

 private:
  const json& j_;
  std::string path_;
};

std::vector<double> resized(std::vector<double> v, int n, const std::string& what) {
  if (v.size() == 1 && n > 1) v.assign(static_cast<std::size_t>(n), v[0]);
  if (static_cast<int>(v.size()) != n) invalid(quoted(what) + " must have " + std::to_string(n) + " entries");
  return v;
}

double positive_p(const Node& c) {
  const double p = c.num("p");
  if (!(p > 1.0)) invalid("key " + quoted("p") + " must be > 1");
  return p;
}

struct Checks {
  json list = json::array();
  bool pass = true;

  void add(const std::string& name, double value, double limit, const std::string& relation, bool ok) {
    list.push_back({{"name", name}, {"value", value}, {"limit", limit}, {"relation", relation}, {"pass", ok}});
    pass = pass && ok;
  }
  void at_most(const std::string& name, double value, double limit) { add(name, value, limit, "<=", value <= limit); }
  void at_least(const std::string& name, double value, double limit) { add(name, value, limit, ">=", value >= limit); }
  void flag(const std::string& name, bool ok) { add(name, ok ? 1.0 : 0.0, 1.0, "==", ok); }
};

// Replaces non-finite numbers by null; false when there were any.
bool sanitize(json& j) {
  bool ok = true;
  if (j.is_number_float()) {
    if (!std::isfinite(j.get<double>())) {
      j = nullptr;
      ok = false;
    }
  } else if (j.is_structured()) {
    for (auto& e : j) ok = sanitize(e) && ok;
  }
  return ok;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

Rule parse_rule(const Node& c, const Cone& cone) {
  if (!c.has("rule")) return RadialMethod{};
  const Node r = c.child("rule");
  const std::string kind = r.str("kind", "radial");
  if (kind == "radial") {
    RadialMethod m;
    m.laguerre_order = r.integer("laguerre_order", m.laguerre_order);
    m.compact_order = r.integer("compact_order", m.compact_order);
    return m;
  }
  if (kind == "grid") {
    const int n = cone.dimension();
    return GridRule(cone, resized(r.vec("lo"), n, r.key_path("lo")), resized(r.vec("hi"), n, r.key_path("hi")),
                    r.integer("n_per_axis", 256));
  }
  invalid("key " + quoted(r.key_path("kind")) + " must be \"radial\" or \"grid\"");
}

// Families shared by deficit and transport.
TestFunction parse_function(const Node& f, int n, double p, std::uint64_t seed, const Weight& w, bool& extremal) {
  const std::string family = f.str("family");
  extremal = false;
  if (family == "gaussian_extremal") {
    extremal = true;
    Point x0 = f.has("x0") ? resized(f.vec("x0"), n, f.key_path("x0")) : Point{};
    return GaussianExtremal(w, p, f.num("lambda", 1.0), x0).test_function();
  }
  if (family == "gaussian_mixture") {
    return gaussian_mixture(f.points("centers"), f.vec("rates"), f.vec("coeffs"), f.num("q", 2.0));
  }
  if (family == "bump") {
    const Point center = f.has("center") ? resized(f.vec("center"), n, f.key_path("center")) : Point(n, 0.0);
    return bump(center, f.num("radius"), f.num("c", 1.0), f.integer("k", 3));
  }
  if (family == "tilted_gaussian") {
    const Point theta = f.has("theta") ? resized(f.vec("theta"), n, f.key_path("theta")) : Point(n, 0.0);
    return tilted_gaussian(f.num("b"), theta, f.num("q", 2.0));
  }
  if (family == "random") {
    return random_radial(n, p, seed + static_cast<std::uint64_t>(f.integer("index", 0)));
  }
  invalid("unknown family " + quoted(family) + " at " + quoted(f.key_path("family")));
}

struct Context {
  const Node& c;
  std::uint64_t seed;
  json results = json::object();
  Checks checks;
  std::map<std::string, std::string> csv;
  std::string name;
  std::string metric;
};

void run_constants(Context& x) {
  const double p = positive_p(x.c);
  const Weight w = parse_weight(x.c.j());
  const auto L = sharp_constant(p, w);
  const auto pc = proof_constants(p, w);
  const double m = w.homogeneous_dimension();
  const double se = sphere_weight_mass(w);
  x.results = {{"L_p", L.value}, {"M_B", L.ball_mass}, {"omega_SE", se}, {"C1", pc.C1}, {"C2", pc.C2},
               {"C3", pc.C3},    {"C4", pc.C4},        {"m", m},         {"p_conj", L.p_conj}};
  const double rebuilt = std::exp(p * pc.C2 / m) / std::pow(m, p) * std::pow(pc.C4, p);
  x.checks.at_most("constants_consistency", std::abs(rebuilt - L.value) / L.value, 1e-12);
  if (w.dimension() <= 3) {
    const double direct = sphere_weight_mass_direct(w);
    x.results["omega_SE_direct"] = direct;
    x.checks.at_most("radial_identity", std::abs(direct - se) / se, 1e-8);
  }
  x.metric = "L_p";
}

void run_weightcheck(Context& x) {
  const Weight w = parse_weight(x.c.j());
  const int samples = x.c.integer("samples", 200);
  const auto cert = check_log_concavity(w, samples, x.seed);
  x.results = {{"homogeneity_ok", cert.homogeneity_ok},
               {"euler_ok", cert.euler_ok},
               {"log_concavity_ok", cert.log_concavity_ok},
               {"tau_concavity_ok", cert.tau_concavity_ok},
               {"gradient_pairing_ok", cert.gradient_pairing_ok},
               {"worst_violation", cert.worst_violation},
               {"samples_used", cert.samples_used},
               {"weight", w.describe()}};
  const bool expect_valid = x.c.boolean("expect_valid", true);
  x.checks.flag(expect_valid ? "weight_valid" : "weight_rejected", cert.all_ok() == expect_valid);
  x.metric = "worst_violation";
}

void run_deficit(Context& x) {
  const double p = positive_p(x.c);
  const Weight w = parse_weight(x.c.j());
  const Rule rule = parse_rule(x.c, w.cone());
  bool extremal = false;
  TestFunction u = parse_function(x.c.child("function"), w.dimension(), p, x.seed, w, extremal);
  const Node f = x.c.child("function");
  if (f.boolean("normalize", !extremal)) u = normalized(u, p, w, rule);
  FunctionalOptions opts;
  if (x.c.has("tolerances")) {
    const Node t = x.c.child("tolerances");
    opts.eps_norm = t.num("eps_norm", opts.eps_norm);
    opts.eps_quad = t.num("eps_quad", opts.eps_quad);
  }
  const auto rep = deficit_p(u, p, w, rule, opts);
  x.results = {{"entropy", rep.entropy_lhs},    {"gradient_energy", rep.gradient_energy}, {"rhs", rep.rhs},
               {"deficit", rep.deficit},        {"normalization", rep.normalization},     {"function", u.label},
               {"rule", std::holds_alternative<RadialMethod>(rule) ? "radial" : "grid"}};
  const std::string regime = x.c.str("regime", extremal ? "equality" : "inequality");
  if (regime == "equality") {
    const double tol = x.c.has("tolerances") ? x.c.child("tolerances").num("equality", 1e-4) : 1e-4;
    x.checks.at_most("deficit_equality", std::abs(rep.deficit), tol);
  } else if (regime == "inequality" || regime == "strict") {
    x.checks.at_least("deficit_nonnegative", rep.deficit, -opts.eps_quad);
    if (regime == "strict") x.checks.add("deficit_strict", rep.deficit, opts.eps_quad, ">", rep.deficit > opts.eps_quad);
  } else {
    invalid("key " + quoted("regime") + " must be \"equality\", \"inequality\" or \"strict\"");
  }
  x.checks.flag("normalized", std::abs(rep.normalization - 1.0) <= opts.eps_norm);
  if (x.c.has("scaling_t")) {
    const double m = w.homogeneous_dimension();
    json shifts = json::array();
    for (double t : x.c.vec("scaling_t")) {
      const double shift = entropy(dilated(u, t, m, p), p, w, rule, opts.eps_norm) - rep.entropy_lhs - m * std::log(t);
      shifts.push_back({{"t", t}, {"residual", shift}});
      x.checks.at_most("scaling_identity_t=" + fmt(t), std::abs(shift), 1e-5);
    }
    x.results["scaling"] = shifts;
  }
  x.metric = "deficit";
}

void run_deficit1(Context& x) {
  const Weight w = parse_weight(x.c.j());
  const double lambda = x.c.num("lambda", 1.0);
  const Point x0 = x.c.has("x0") ? resized(x.c.vec("x0"), w.dimension(), "x0") : Point{};
  const std::string route = x.c.str("route", "closed_form");
  DeficitReport rep;
  double tol = 0.0;
  if (route == "closed_form") {
    rep = deficit_1(w, lambda, x0);
    tol = 1e-12 * std::max(1.0, std::abs(rep.entropy_lhs));
  } else if (route == "grid") {
    const Rule r = parse_rule(x.c, w.cone());
    if (!std::holds_alternative<GridRule>(r)) invalid("route \"grid\" needs a rule of kind \"grid\"");
    rep = deficit_1_grid(w, lambda, x0, std::get<GridRule>(r), {1e-3, 1e-3, true});
    tol = 1e-3;
  } else {
    invalid("key " + quoted("route") + " must be \"closed_form\" or \"grid\"");
  }
  const double perimeter = perimeter_ball(w, 1.0);
  const double se = sphere_weight_mass(w);
  x.results = {{"entropy", rep.entropy_lhs}, {"rhs", rep.rhs},           {"deficit", rep.deficit},
               {"route", route},             {"perimeter_unit_ball", perimeter}, {"omega_SE", se}};
  x.checks.at_most("deficit_equality", std::abs(rep.deficit), tol);
  x.checks.at_most("perimeter_identity", std::abs(perimeter - se), 0.0);
  x.metric = "deficit";
}

std::vector<double> parse_times(const Node& c) {
  const json& v = c.raw("t_grid");
  if (v.is_object()) {
    const Node t(v, "t_grid");
    const double start = t.num("start");
    const double step = t.num("step");
    const int count = t.integer("count", 0);
    if (count < 1) invalid("key " + quoted("t_grid.count") + " must be a positive integer");
    std::vector<double> out;
    for (int k = 0; k < count; ++k) out.push_back(start + k * step);
    return out;
  }
  return c.vec("t_grid");
}

HopfLaxMethod parse_method(const Node& c, const std::string& key, double p) {
  if (!c.has(key)) return p == 2.0 ? HopfLaxMethod::FastP2 : HopfLaxMethod::Pruned;
  return hopf_lax_method_from_string(c.str(key));
}

void run_hopflax(Context& x) {
  const double p = positive_p(x.c);
  const Node grid = x.c.child("grid");
  const Cone cone = x.c.has("cone") ? parse_cone(x.c.j()) : Cone::full_space(static_cast<int>(grid.vec("lo").size()));
  const int n = cone.dimension();
  const auto rule = std::make_shared<const GridRule>(cone, resized(grid.vec("lo"), n, "grid.lo"),
                                                     resized(grid.vec("hi"), n, "grid.hi"),
                                                     grid.integer("n_per_axis", 256));
  const Node g = x.c.child("g");
  const std::string family = g.str("family");
  const double q = conjugate(p);
  TestFunction fn;
  Point x0(static_cast<std::size_t>(n), 0.0);
  double b = 0.0;
  int sign = 1;
  if (family == "power") {
    if (g.has("x0")) x0 = resized(g.vec("x0"), n, "g.x0");
    b = g.num("b");
    sign = g.integer("sign", 1);
    if (sign != 1 && sign != -1) invalid("key " + quoted("g.sign") + " must be 1 or -1");
    fn = power_potential(x0, b, q, sign);
  } else if (family == "constant") {
    const double c = g.num("c", 0.0);
    fn.dimension = n;
    fn.value = [c](PointView) { return c; };
  } else if (family == "log_mixture") {
    fn = log_mixture(g.points("centers"), g.vec("rates"), g.vec("coeffs"), g.num("q", 2.0));
  } else {
    invalid("unknown family " + quoted(family) + " at " + quoted("g.family"));
  }
  const HopfLaxMethod method = parse_method(x.c, "method", p);
  const auto initial = sample_field(fn, rule);
  const auto run = run_hopf_lax(initial, p, parse_times(x.c), method);

  const auto mono = check_monotonicity(run);
  x.results["method"] = std::string(to_string(method));
  x.results["monotonicity"] = {{"above_initial", mono.above_initial},
                               {"increasing_in_t", mono.increasing_in_t},
                               {"worst", mono.worst}};
  x.results["boundary_argmin_ratio"] = run.boundary_argmin_ratio;
  const double worst_ratio = *std::max_element(run.boundary_argmin_ratio.begin(), run.boundary_argmin_ratio.end());
  x.results["reliable"] = worst_ratio == 0.0;
  x.checks.flag("monotonicity", mono.ok());

  try {
    const auto hj = hj_residual(run, x.c.num("hj_tol", 1e-2));
    x.results["hj_residual"] = {{"median", hj.median}, {"p90", hj.p90}, {"count", hj.count},
                                {"fraction_above", hj.fraction_above}};
    if (family == "constant") x.checks.at_most("hj_residual_constant", hj.median, 0.0);
    std::ostringstream r;
    r << "t";
    for (int a = 0; a < n; ++a) r << ",x" << a + 1;
    r << ",residual\n";
    for (const auto& s : hj.slices) {
      for (std::size_t k = 0; k < s.slots.size(); ++k) {
        r << fmt(s.t);
        for (double v : rule->node(rule->inside()[s.slots[k]])) r << ',' << fmt(v);
        r << ',' << fmt(s.values[k]) << '\n';
      }
    }
    x.csv[x.name + "_hj_residual.csv"] = r.str();
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::InsufficientSlices) throw;
    x.results["hj_residual"] = "needs at least three uniformly spaced slices";
  }

  std::ostringstream s;
  s << "t";
  for (int a = 0; a < n; ++a) s << ",x" << a + 1;
  s << ",Q\n";
  auto dump = [&](const GridField& f) {
    for (std::size_t k = 0; k < f.values.size(); ++k) {
      s << fmt(f.t);
      for (double v : rule->node(rule->inside()[k])) s << ',' << fmt(v);
      s << ',' << fmt(f.values[k]) << '\n';
    }
  };
  dump(run.initial);
  for (const auto& f : run.slices) dump(f);
  x.csv[x.name + "_slices.csv"] = s.str();

  double metric = mono.worst;
  if (family == "power" && cone.kind() == ConeKind::FullSpace) {
    json errs = json::array();
    const double h = rule->max_spacing();
    metric = 0.0;
    for (std::size_t i = 0; i < run.times.size(); ++i) {
      const double t = run.times[i];
      const double bt = power_family_rate(b, p, t, sign);
      const double kappa = 1.0 / (1.0 + sign * t * std::pow(b, p - 1.0));
      double err = 0.0, lip = 0.0;
      for (std::size_t k = 0; k < rule->size(); ++k) {
        const Point pt = rule->node(rule->inside()[k]);
        bool inside = true;
        Point shifted(pt.size());
        for (int a = 0; a < n; ++a) {
          shifted[a] = pt[a] + x0[a];
          const double y = kappa * shifted[a] - x0[a];
          inside = inside && y >= rule->lo()[a] + h && y <= rule->hi()[a] - h;
        }
        if (!inside) continue;
        const double r = norm(shifted);
        err = std::max(err, std::abs(run.slices[i].values[k] - sign * bt / q * std::pow(r, q)));
        lip = std::max(lip, bt * std::pow(r, q - 1.0));
      }
      errs.push_back({{"t", t}, {"max_error", err}, {"bound", 2.0 * h * lip}});
      x.checks.at_most("closed_form_t=" + fmt(t), err, 2.0 * h * lip);
      metric = std::max(metric, err);
    }
    x.results["closed_form_error"] = errs;
  }
  if (x.c.has("involution")) {
    const Node inv = x.c.child("involution");
    const auto rep = c_transform_involution(fn, inv.num("t"), p, rule, parse_method(inv, "method", 3.0));
    const double limit = inv.num("C", 10.0) * rule->max_spacing();
    x.results["involution"] = {{"max_abs_deviation", rep.max_abs_deviation}, {"min_gap", rep.min_gap},
                               {"max_gap", rep.max_gap},                     {"nodes_used", rep.nodes_used}};
    x.checks.at_most("involution_deviation", rep.max_abs_deviation, limit);
  }
  x.results["max_error"] = metric;
  x.metric = "max_error";
}

TestFunction parse_hyper_g(const Node& g, double p, double alpha, double beta, double t, int n) {
  const std::string family = g.str("family");
  if (family == "extremal") {
    const Point x0 = g.has("x0") ? resized(g.vec("x0"), n, "g.x0") : Point(n, 0.0);
    return hyper_extremal_g(p, beta, alpha, t, x0, g.num("C", 0.0));
  }
  if (family == "log_mixture") {
    return log_mixture(g.points("centers"), g.vec("rates"), g.vec("coeffs"), g.num("q", 2.0));
  }
  invalid("unknown family " + quoted(family) + " at " + quoted("g.family"));
}

void run_hyper(Context& x) {
  HyperConfig cfg;
  cfg.p = positive_p(x.c);
  cfg.alpha = x.c.num("alpha");
  cfg.beta = x.c.num("beta");
  cfg.t_tilde = x.c.num("t");
  cfg.weight = parse_weight(x.c.j());
  cfg.g = parse_hyper_g(x.c.child("g"), cfg.p, cfg.alpha, cfg.beta, cfg.t_tilde, cfg.weight.dimension());
  if (x.c.has("options")) {
    const Node o = x.c.child("options");
    cfg.options.nodes_per_axis = o.integer("nodes_per_axis", 0);
    cfg.options.box_half_width = o.num("box_half_width", 0.0);
    cfg.options.trace_points = o.integer("trace_points", cfg.options.trace_points);
    cfg.options.eps = o.num("eps", cfg.options.eps);
    if (o.has("method")) cfg.options.method = hopf_lax_method_from_string(o.str("method"));
  }
  const auto rep = hyper_check(cfg);
  json trace = json::array();
  std::ostringstream s;
  s << "t,q,F\n";
  for (const auto& tp : rep.F_trace) {
    trace.push_back({{"t", tp.t}, {"q", tp.q}, {"F", tp.F}});
    s << fmt(tp.t) << ',' << fmt(tp.q) << ',' << fmt(tp.F) << '\n';
  }
  x.csv[x.name + "_F_trace.csv"] = s.str();
  x.results = {{"lhs", rep.lhs},
               {"rhs", rep.rhs},
               {"ratio", rep.ratio},
               {"norm_alpha", rep.norm_alpha},
               {"F_trace", trace},
               {"membership", std::string(to_string(rep.membership))},
               {"edge_mass_fraction", rep.edge_mass_fraction},
               {"box_half_width", rep.box_half_width},
               {"nodes_per_axis", rep.nodes_per_axis},
               {"log_factor", log_hyper_factor(cfg.p, cfg.alpha, cfg.beta, cfg.t_tilde, cfg.weight)},
               {"integrated_log_bound", integrated_log_bound(cfg.p, cfg.alpha, cfg.beta, cfg.t_tilde, cfg.weight)}};
  x.checks.at_most("ratio", rep.ratio, 1.0 + rep.eps);
  if (x.c.has("expect_ratio")) {
    const auto band = x.c.vec("expect_ratio");
    if (band.size() != 2) invalid("key " + quoted("expect_ratio") + " must be [lo, hi]");
    x.checks.add("ratio_band", rep.ratio, band[0], "in", rep.ratio >= band[0] && rep.ratio <= band[1]);
  }
  if (x.c.has("log_derivative")) {
    const Node d = x.c.child("log_derivative");
    const auto ld = log_derivative_bound(cfg, d.num("t"), d.num("dt"));
    x.results["log_derivative"] = {{"t", ld.t}, {"lhs", ld.lhs}, {"rhs", ld.rhs}, {"noise", ld.noise}};
    x.checks.flag("log_derivative_bound", ld.ok);
  }
  x.metric = "ratio";
}

void run_transport(Context& x) {
  const double p = positive_p(x.c);
  const Weight w = parse_weight(x.c.j());
  if (w.dimension() != 1) invalid("transport needs a one-dimensional cone (" + quoted("cone.n") + " = 1)");
  const bool half = w.cone().axis_positive(0);
  const int N = x.c.integer("N", 4096);
  Grid1D grid{half ? 0.0 : -8.0, 8.0, N};
  if (x.c.has("grid")) {
    const Node g = x.c.child("grid");
    grid.lo = g.num("lo", grid.lo);
    grid.hi = g.num("hi", grid.hi);
  }
  bool extremal = false;
  const Node f = x.c.child("src");
  TestFunction u = parse_function(f, 1, p, x.seed, w, extremal);
  if (f.boolean("normalize", !extremal)) {
    const auto d = Density1D::make([&](double s) { return std::pow(std::abs(u(PointView(&s, 1))), p); }, w, grid,
                                   INFINITY);
    u = scaled_by(u, std::pow(d.raw_mass, -1.0 / p));
  }
  double t = 1.0;
  if (x.c.boolean("apply_scaling", true)) {
    t = scaling_parameter(u, p, w, grid);
    if (t != 1.0) u = dilated(u, t, w.homogeneous_dimension(), p);
  }
  const double eps = x.c.num("eps", 1e-3);
  const auto r = entropy_chain(u, p, w, grid, eps);
  x.results = {{"scaling_t", t},
               {"I", r.I},
               {"II", r.II},
               {"III", r.III},
               {"J", r.J},
               {"J_target", r.J_target},
               {"G", r.G},
               {"C1", r.C1},
               {"C2", r.C2},
               {"C3", r.C3},
               {"C4", r.C4},
               {"m", r.m},
               {"gaps",
                {{"am_gm", r.am_gm_gap},
                 {"jensen", r.jensen_gap},
                 {"byparts", r.byparts_gap},
                 {"holder", r.holder_gap},
                 {"log_concavity", r.log_concavity_gap}}},
               {"ma_identity", r.ma_identity},
               {"ma_residual", r.ma_residual},
               {"final_bound", r.final_bound},
               {"rhs", r.rhs},
               {"final_bound_minus_I", r.final_bound - r.I},
               {"clamped", r.clamped}};
  x.checks.flag("chain", r.pass);
  x.checks.flag("ii_bound", r.ii_bound);
  x.checks.flag("iii_bound", r.iii_bound);
  if (x.c.boolean("expect_tight", extremal)) {
    for (auto [name, v] : {std::pair{"am_gm", r.am_gm_gap}, std::pair{"jensen", r.jensen_gap},
                           std::pair{"byparts", r.byparts_gap}, std::pair{"holder", r.holder_gap},
                           std::pair{"log_concavity", r.log_concavity_gap},
                           std::pair{"final_minus_I", r.final_bound - r.I}}) {
      x.checks.at_most(std::string("tight_") + name, std::abs(v), eps);
    }
  }
  // Second route to the right-hand side through deficit_p.
  const Rule rule = u.radial ? Rule{RadialMethod{}} : Rule{GridRule(w.cone(), {grid.lo}, {grid.hi}, N)};
  const double rhs_direct = deficit_p(u, p, w, rule).rhs;
  x.results["rhs_deficit_p"] = rhs_direct;
  x.checks.at_most("two_routes", std::abs(r.final_bound - rhs_direct), 2.0 * eps);

  if (x.c.boolean("refinement", true)) {
    json ma = json::array();
    std::vector<double> seq;
    const auto dst_for = [&](int n) { return model_density(p, w, 4 * n); };
    for (int n : {N / 8, N / 4, N / 2, N}) {
      Grid1D gn = grid;
      gn.n = n;
      const auto src = Density1D::make([&](double s) { return std::pow(std::abs(u(PointView(&s, 1))), p); }, w, gn);
      seq.push_back(monge_ampere_residual(brenier_map_1d(src, dst_for(n)), p, r.C1));
      ma.push_back({{"N", n}, {"residual", seq.back()}});
    }
    x.results["ma_refinement"] = ma;
    bool decreasing = true;
    for (std::size_t k = 1; k < seq.size(); ++k) decreasing = decreasing && seq[k] < seq[k - 1];
    x.checks.flag("ma_residual_decreasing", decreasing);
  }
  x.metric = "final_bound_minus_I";
}

}  // namespace

std::string version() { return CONELAB_VERSION; }

Cone parse_cone(const json& config) {
  const Node c(config, "");
  if (!c.has("cone")) return Cone::full_space(c.integer("n", 1));
  const Node k = c.child("cone");
  const std::string kind = k.str("kind");
  if (kind == "full_space") return Cone::full_space(k.integer("n", c.integer("n", 1)));
  if (kind == "half_space") return Cone::half_space(k.vec("normal"));
  if (kind == "orthant") {
    const int n = k.integer("n", c.integer("n", 1));
    if (!k.has("axes")) return Cone::orthant(n);
    std::vector<bool> axes;
    for (const auto& a : k.raw("axes")) axes.push_back(a.get<bool>());
    return Cone::orthant(n, axes);
  }
  if (kind == "polyhedral") return Cone::polyhedral(k.integer("n", c.integer("n", 1)), k.points("normals"));
  invalid("unknown cone kind " + quoted(kind) + " at " + quoted("cone.kind"));
}

Weight parse_weight(const json& config) {
  const Node c(config, "");
  const Cone cone = parse_cone(config);
  if (!c.has("weight")) return Weight::constant(cone);
  const Node w = c.child("weight");
  const std::string kind = w.str("kind");
  if (kind == "constant") return Weight::constant(cone, w.num("c", 1.0));
  if (kind == "monomial") return Weight::monomial(cone, w.vec("exponents"));
  invalid("unknown weight kind " + quoted(kind) + " at " + quoted("weight.kind"));
}

json load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) invalid("cannot read config " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    invalid(path.string() + ": " + e.what());
  }
  if (!j.is_object()) invalid(path.string() + ": config must be a JSON object");
  if (!j.contains("name")) j["name"] = path.stem().string();
  return j;
}

RunResult run_experiment(const json& config, const RunOptions& opts) {
  const auto start = std::chrono::steady_clock::now();
  const Node c(config, "");
  const std::string kind = c.str("experiment");
  json echo = config;
  std::uint64_t seed = 0;
  if (opts.seed) {
    seed = *opts.seed;
    echo["seed"] = seed;
  } else {
    const json& s = c.raw("seed");
    if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<long long>() >= 0)) {
      invalid("key " + quoted("seed") + " must be a non-negative integer");
    }
    seed = s.get<std::uint64_t>();
  }
  Context x{c, seed};
  x.name = c.str("name", kind);
  if (kind == "constants") {
    run_constants(x);
  } else if (kind == "weightcheck") {
    run_weightcheck(x);
  } else if (kind == "deficit") {
    run_deficit(x);
  } else if (kind == "deficit1") {
    run_deficit1(x);
  } else if (kind == "hopflax") {
    run_hopflax(x);
  } else if (kind == "hyper") {
    run_hyper(x);
  } else if (kind == "transport") {
    run_transport(x);
  } else {
    invalid("unknown experiment " + quoted(kind) + " at " + quoted("experiment"));
  }
  if (c.has("expect")) {
    const Node e = c.child("expect");
    for (const auto& [key, want] : config.at("expect").items()) {
      const Node s(want, e.key_path(key));
      if (!x.results.contains(key) || !x.results[key].is_number()) {
        invalid("expect." + key + " names no numeric result");
      }
      const double v = x.results[key].get<double>();
      x.checks.add("expect_" + key, v, s.num("value"), "~", std::abs(v - s.num("value")) <= s.num("tol"));
    }
  }
  x.checks.flag("finite_outputs", sanitize(x.results));

  RunResult r;
  r.pass = x.checks.pass;
  r.csv = std::move(x.csv);
  r.report = {{"config", echo},
              {"experiment", kind},
              {"name", x.name},
              {"version", version()},
              {"results", x.results},
              {"checks", x.checks.list},
              {"metric", x.metric},
              {"pass", r.pass}};
  r.report["wall_time_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (!opts.out_dir.empty()) write_outputs(r, opts.out_dir);
  return r;
}

void write_outputs(const RunResult& r, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  const std::string name = r.report.at("name").get<std::string>();
  std::ofstream(out_dir / (name + ".json")) << r.report.dump(2) << '\n';
  for (const auto& [file, text] : r.csv) std::ofstream(out_dir / file) << text;
}

SuiteResult run_suite(const std::filesystem::path& dir, const RunOptions& opts) {
  SuiteResult s;
  std::vector<std::filesystem::path> files;
  if (std::filesystem::is_directory(dir)) {
    for (const auto& e : std::filesystem::directory_iterator(dir)) {
      if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
    }
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) {
    s.exit_code = 1;
    s.message = "no configs found in " + dir.string();
    return s;
  }
  bool failed = false, errored = false;
  json summary = json::array();
  for (const auto& f : files) {
    SuiteRow row;
    row.name = f.stem().string();
    try {
      const json cfg = load_config(f);
      row.name = cfg.value("name", row.name);
      row.experiment = cfg.value("experiment", "");
      const auto r = run_experiment(cfg, opts);
      row.metric = r.report.at("metric").get<std::string>();
      const auto& v = r.report.at("results").at(row.metric);
      row.value = v.is_number() ? v.get<double>() : NAN;
      row.status = r.pass ? "PASS" : "FAIL";
      failed = failed || !r.pass;
    } catch (const Error& e) {
      row.status = "ERROR";
      row.message = e.what();
      errored = true;
    } catch (const std::exception& e) {
      row.status = "ERROR";
      row.message = e.what();
      errored = true;
    }
    summary.push_back({{"name", row.name},
                       {"experiment", row.experiment},
                       {"metric", row.metric},
                       {"value", std::isfinite(row.value) ? json(row.value) : json(nullptr)},
                       {"status", row.status},
                       {"message", row.message}});
    s.rows.push_back(row);
  }
  s.exit_code = errored ? 1 : failed ? 2 : 0;
  if (!opts.out_dir.empty()) {
    std::filesystem::create_directories(opts.out_dir);
    std::ofstream(opts.out_dir / "summary.json") << summary.dump(2) << '\n';
  }
  return s;
}

std::string format_summary(const SuiteResult& s) {
  if (s.rows.empty()) return s.message + "\n";
  std::size_t wn = 4, we = 10, wm = 6;
  for (const auto& r : s.rows) {
    wn = std::max(wn, r.name.size());
    we = std::max(we, r.experiment.size());
    wm = std::max(wm, r.metric.size());
  }
  std::ostringstream o;
  char buf[64];
  auto line = [&](const std::string& a, const std::string& b, const std::string& c, const std::string& d,
                  const std::string& e) {
    o << a << std::string(wn - a.size() + 2, ' ') << b << std::string(we - b.size() + 2, ' ') << c
      << std::string(wm - c.size() + 2, ' ') << d << std::string(d.size() < 14 ? 14 - d.size() : 1, ' ') << e
      << '\n';
  };
  line("name", "experiment", "metric", "value", "status");
  for (const auto& r : s.rows) {
    std::snprintf(buf, sizeof buf, "%.6g", r.value);
    line(r.name, r.experiment, r.metric, r.status == "ERROR" ? "-" : buf,
         r.status + (r.message.empty() ? "" : "  " + r.message));
  }
  return o.str();
}

}  // namespace conelab::cli
