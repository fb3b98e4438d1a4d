#pragma once

#include <optional>
#include <variant>

#include "conelab/quadrature.hpp"
#include "conelab/test_function.hpp"
#include "conelab/weight.hpp"

namespace conelab {

/// Radial integration (u must carry a radial form about the origin and a
/// tail certificate) or a tensor grid.
using Rule = std::variant<RadialMethod, GridRule>;

struct FunctionalOptions {
  double eps_norm = 1e-6;
  double eps_quad = 1e-3;
  bool allow_fd = true;
};

/// int_E |u|^p w.
double lp_mass(const TestFunction& u, double p, const Weight& w, const Rule& rule);
/// (int_E |u|^p w)^{1/p}.
double lp_norm(const TestFunction& u, double p, const Weight& w, const Rule& rule);

/// int_E |u|^p log |u|^p w with 0 log 0 = 0. NotNormalized unless
/// |int |u|^p w - 1| <= eps_norm on the same rule.
double entropy(const TestFunction& u, double p, const Weight& w, const Rule& rule, double eps_norm = 1e-6);

/// int_E |grad u|^p w; uses the callback, else central differences when
/// allowed, else GradientUnavailable.
double gradient_energy(const TestFunction& u, double p, const Weight& w, const Rule& rule, bool allow_fd = true);

/// u / ||u||_{L^p(w)} on the given rule.
TestFunction normalized(const TestFunction& u, double p, const Weight& w, const Rule& rule);

/// Weighted perimeter of B(-x0, lambda) cap E relative to E:
/// lambda^{m-1} omega_SE. TranslationNotInvariant for a shift the weight
/// does not tolerate.
double perimeter_ball(const Weight& w, double lambda, PointView x0 = {});

struct DeficitReport {
  double p = 0.0;
  double entropy_lhs = 0.0;
  /// int |grad u|^p w for p > 1, ||D|u|||_w for p = 1.
  double gradient_energy = 0.0;
  double rhs = 0.0;
  double deficit = 0.0;
  double normalization = 0.0;
  double eps_norm = 0.0;
  double eps_quad = 0.0;
  bool pass = false;
};

/// rhs = (m/p) log(L gradient_energy), deficit = rhs - entropy.
DeficitReport deficit_p(const TestFunction& u, double p, const Weight& w, const Rule& rule,
                        const FunctionalOptions& opts = {});

/// p = 1 equality for the indicator family, fully in closed form:
/// rhs = m log(M_B^{-1/m} / m * ||D|u|||_w) with ||D|u||| = height * P_w.
/// mass_radius, when given, builds the height from a different radius than
/// the perimeter (a deliberately inconsistent pair).
DeficitReport deficit_1(const Weight& w, double lambda, PointView x0 = {}, std::optional<double> mass_radius = {},
                        const FunctionalOptions& opts = {});

/// Same with the entropy and normalization integrated on a grid.
DeficitReport deficit_1_grid(const Weight& w, double lambda, PointView x0, const GridRule& rule,
                             const FunctionalOptions& opts = {});

}  // namespace conelab
