#include "conelab/functionals.hpp"

#include <cmath>

#include "conelab/constants.hpp"
#include "conelab/error.hpp"

namespace conelab {

namespace {

double xlogx(double v) { return v > 0.0 ? v * std::log(v) : 0.0; }

const RadialForm& require_radial(const TestFunction& u) {
  if (!u.radial) fail(ErrorKind::DomainError, "radial rule needs a radially symmetric test function (" + u.label + ")");
  if (!u.tail) fail(ErrorKind::TailUnbounded, "test function " + u.label + " has no tail certificate");
  return *u.radial;
}

// Applies the radial route or sums per-node contributions on the grid.
template <class Radial, class Node>
double integrate(const TestFunction& u, double p, const Weight& w, const Rule& rule, Radial&& radial, Node&& node) {
  if (const auto* method = std::get_if<RadialMethod>(&rule)) {
    const RadialForm& form = require_radial(u);
    RadialProfile prof{[&](double r) { return radial(form, r); }, u.tail->pow(p)};
    return integrate_radial(w, prof, *method);
  }
  const auto& grid = std::get<GridRule>(rule);
  std::vector<double> vals(grid.size());
  Point x(static_cast<std::size_t>(grid.dimension()));
  for (std::size_t k = 0; k < grid.size(); ++k) {
    grid.node(grid.inside()[k], x);
    vals[k] = node(x);
  }
  return integrate_weighted(w, vals, grid);
}

}  // namespace

double lp_mass(const TestFunction& u, double p, const Weight& w, const Rule& rule) {
  if (!(p >= 1.0)) fail(ErrorKind::DomainError, "L^p needs p >= 1");
  return integrate(
      u, p, w, rule, [p](const RadialForm& f, double r) { return std::pow(std::abs(f.value(r)), p); },
      [&](PointView x) { return std::pow(std::abs(u(x)), p); });
}

double lp_norm(const TestFunction& u, double p, const Weight& w, const Rule& rule) {
  return std::pow(lp_mass(u, p, w, rule), 1.0 / p);
}

double entropy(const TestFunction& u, double p, const Weight& w, const Rule& rule, double eps_norm) {
  const double mass = lp_mass(u, p, w, rule);
  if (!(std::abs(mass - 1.0) <= eps_norm)) {
    fail(ErrorKind::NotNormalized, "int |u|^p w = " + std::to_string(mass) + " is not 1");
  }
  return integrate(
      u, p, w, rule, [p](const RadialForm& f, double r) { return xlogx(std::pow(std::abs(f.value(r)), p)); },
      [&](PointView x) { return xlogx(std::pow(std::abs(u(x)), p)); });
}

double gradient_energy(const TestFunction& u, double p, const Weight& w, const Rule& rule, bool allow_fd) {
  if (!u.gradient && !allow_fd) fail(ErrorKind::GradientUnavailable, "no gradient callback and FD disabled");
  std::vector<double> g(static_cast<std::size_t>(w.dimension()));
  return integrate(
      u, p, w, rule, [p](const RadialForm& f, double r) { return std::pow(std::abs(f.derivative(r)), p); },
      [&](PointView x) {
        if (u.gradient) {
          u.gradient(x, g);
        } else {
          fd_gradient(u, w.cone(), x, g);
        }
        return std::pow(norm(g), p);
      });
}

TestFunction normalized(const TestFunction& u, double p, const Weight& w, const Rule& rule) {
  const double nrm = lp_norm(u, p, w, rule);
  if (!(nrm > 0.0) || !std::isfinite(nrm)) fail(ErrorKind::NotNormalized, "cannot normalize a null function");
  return scaled_by(u, 1.0 / nrm);
}

double perimeter_ball(const Weight& w, double lambda, PointView x0) {
  if (!(lambda > 0.0)) fail(ErrorKind::DomainError, "perimeter_ball needs lambda > 0");
  if (!x0.empty() && norm(x0) > 0.0 && !translation_invariant(w, x0)) {
    fail(ErrorKind::TranslationNotInvariant, "weight is not invariant under the requested shift");
  }
  return std::pow(lambda, w.homogeneous_dimension() - 1.0) * sphere_weight_mass(w);
}

DeficitReport deficit_p(const TestFunction& u, double p, const Weight& w, const Rule& rule,
                        const FunctionalOptions& opts) {
  DeficitReport rep;
  rep.p = p;
  rep.eps_norm = opts.eps_norm;
  rep.eps_quad = opts.eps_quad;
  rep.normalization = lp_mass(u, p, w, rule);
  rep.entropy_lhs = entropy(u, p, w, rule, opts.eps_norm);
  rep.gradient_energy = gradient_energy(u, p, w, rule, opts.allow_fd);
  const double m = w.homogeneous_dimension();
  rep.rhs = (m / p) * std::log(sharp_constant(p, w).value * rep.gradient_energy);
  rep.deficit = rep.rhs - rep.entropy_lhs;
  rep.pass = rep.deficit >= -opts.eps_quad && std::abs(rep.normalization - 1.0) <= opts.eps_norm;
  return rep;
}

namespace {

DeficitReport assemble_deficit_1(const Weight& w, double lambda, PointView x0, double height, double entropy_lhs,
                                 double normalization, const FunctionalOptions& opts) {
  const double m = w.homogeneous_dimension();
  const double mb = cone_mass(w).ball_mass;
  DeficitReport rep;
  rep.p = 1.0;
  rep.eps_norm = opts.eps_norm;
  rep.eps_quad = opts.eps_quad;
  rep.entropy_lhs = entropy_lhs;
  rep.normalization = normalization;
  rep.gradient_energy = height * perimeter_ball(w, lambda, x0);
  rep.rhs = m * std::log(std::pow(mb, -1.0 / m) / m * rep.gradient_energy);
  rep.deficit = rep.rhs - rep.entropy_lhs;
  rep.pass = rep.deficit >= -opts.eps_quad && std::abs(rep.normalization - 1.0) <= opts.eps_norm;
  return rep;
}

}  // namespace

DeficitReport deficit_1(const Weight& w, double lambda, PointView x0, std::optional<double> mass_radius,
                        const FunctionalOptions& opts) {
  const Point shift(x0.begin(), x0.end());
  const auto ind = IndicatorExtremal::make(w, mass_radius.value_or(lambda), shift);
  const double m = w.homogeneous_dimension();
  const double mb = cone_mass(w).ball_mass;
  // The indicator is constant on its support: entropy = mass * log(height).
  const double mass = ind.height * std::pow(lambda, m) * mb;
  return assemble_deficit_1(w, lambda, x0, ind.height, mass * std::log(ind.height), mass, opts);
}

DeficitReport deficit_1_grid(const Weight& w, double lambda, PointView x0, const GridRule& rule,
                             const FunctionalOptions& opts) {
  const Point shift(x0.begin(), x0.end());
  const auto ind = IndicatorExtremal::make(w, lambda, shift);
  const TestFunction u = ind.test_function();
  const double mass = lp_mass(u, 1.0, w, rule);
  const double ent = integrate_weighted(w, [&](PointView x) { return xlogx(u(x)); }, rule);
  return assemble_deficit_1(w, lambda, x0, ind.height, ent, mass, opts);
}

}  // namespace conelab
