#include <doctest.h>

#include <cmath>
#include <numbers>

#include "conelab/error.hpp"
#include "conelab/quadrature.hpp"
#include "oracles.hpp"

using namespace conelab;

namespace {

constexpr double kPi = std::numbers::pi;

Weight xy_quadrant() { return Weight::monomial(Cone::orthant(2), {1.0, 1.0}); }

Weight custom_xy() {
  return Weight::custom(
      Cone::orthant(2), [](PointView x) { return x[0] * x[1]; },
      [](PointView x, std::span<double> g) {
        g[0] = x[1];
        g[1] = x[0];
      },
      2.0);
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

}  // namespace

TEST_CASE("radial rules have positive weights and increasing nodes") {
  for (int order : {32, 64, 201}) {
    for (const auto& rule : {RadialRule::compact(2.5, 3.0, order), RadialRule::laguerre(2.5, 1.0, 2.0, std::min(order, 150))}) {
      REQUIRE(!rule.nodes.empty());
      for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
        CHECK(rule.weights[k] > 0.0);
        CHECK(rule.nodes[k] > 0.0);
        if (k > 0) CHECK(rule.nodes[k] > rule.nodes[k - 1]);
      }
    }
  }
}

TEST_CASE("radial rule integrates e^{-r} to 1e-12 from order 32") {
  for (int order : {32, 64, 128, 150}) {
    RadialProfile prof{[](double r) { return std::exp(-r); }, TailCertificate::gaussian(1.0, 1.0)};
    CHECK(std::abs(integrate_radial_factor(1.0, prof, {order, 201}) - 1.0) < 1e-12);
  }
}

TEST_CASE("Gamma-integral identity for e^{-r^q}") {
  for (double m : {1.0, 2.0, 2.5, 4.0, 7.5}) {
    for (double q : {1.5, 2.0, 3.0, 5.0}) {
      RadialProfile prof{[q](double r) { return std::exp(-std::pow(r, q)); }, TailCertificate::gaussian(1.0, q)};
      const double expect = std::tgamma(m / q) / q;
      CHECK(rel(integrate_radial_factor(m, prof), expect) < 1e-11);
      // Independent graded Gauss-Legendre oracle.
      const double ref = oracle::radial(prof.f, m, 12.0);
      CHECK(rel(ref, expect) < 1e-10);
    }
  }
}

TEST_CASE("closed-form masses") {
  const auto one2 = Weight::constant(Cone::full_space(2));
  CHECK(ball_weight_mass(one2) == doctest::Approx(kPi).epsilon(1e-14));
  CHECK(sphere_weight_mass(one2) == doctest::Approx(2.0 * kPi).epsilon(1e-14));
  CHECK(ball_weight_mass(xy_quadrant()) == doctest::Approx(0.125).epsilon(1e-14));
  CHECK(sphere_weight_mass(xy_quadrant()) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(sphere_weight_mass(Weight::constant(Cone::half_space({0.3, 1.0}))) == doctest::Approx(kPi).epsilon(1e-14));
  CHECK(ball_weight_mass(Weight::constant(Cone::full_space(3))) == doctest::Approx(4.0 * kPi / 3.0).epsilon(1e-14));
  // Polar oracle for xy: int_0^1 r^3 dr * int_0^{pi/2} cos sin = 1/4 * 1/2.
  const double polar = oracle::gauss_legendre([](double r) { return r * r * r; }, 0.0, 1.0, 4) *
                       oracle::gauss_legendre([](double t) { return std::cos(t) * std::sin(t); }, 0.0, kPi / 2, 8);
  CHECK(polar == doctest::Approx(0.125).epsilon(1e-13));

  CHECK_THROWS_AS((void)ball_weight_mass(custom_xy()), Error);
}

TEST_CASE("grid ball mass agrees with the closed form") {
  const double exact = ball_weight_mass(xy_quadrant());
  const double grid = ball_weight_mass(xy_quadrant(), BallMassMethod::grid(256));
  CHECK(std::abs(grid - exact) < 1e-4);
  CHECK(std::abs(ball_weight_mass(Weight::constant(Cone::full_space(2)), BallMassMethod::grid(256)) - kPi) < 1e-4);
  CHECK(std::abs(ball_weight_mass(custom_xy(), BallMassMethod::grid(256)) - 0.125) < 1e-4);
}

TEST_CASE("radial identity: sphere mass equals (n + tau) ball mass by independent routes") {
  std::vector<Weight> weights;
  for (int n : {1, 2, 3}) {
    weights.push_back(Weight::constant(Cone::full_space(n), 1.7));
    std::vector<double> normal(n, 0.0);
    normal[n - 1] = 1.0;
    weights.push_back(Weight::constant(Cone::half_space(normal)));
    std::vector<double> tilted(n, 0.4);
    tilted[0] = -1.0;
    weights.push_back(Weight::constant(Cone::half_space(tilted)));
    weights.push_back(Weight::constant(Cone::orthant(n)));
    std::vector<double> a(n);
    for (int i = 0; i < n; ++i) a[i] = 0.5 + i;
    weights.push_back(Weight::monomial(Cone::orthant(n), a));
    std::vector<double> b(n, 0.0);
    b[n - 1] = 2.0;
    weights.push_back(Weight::monomial(Cone::half_space(normal), b));
  }
  for (const auto& w : weights) {
    const double direct = sphere_weight_mass_direct(w);
    const double via_ball = w.homogeneous_dimension() * ball_weight_mass(w);
    INFO(w.describe());
    CHECK(rel(direct, via_ball) < 1e-8);
  }
}

TEST_CASE("angular quadrature handles general polyhedral cones") {
  // Wedge of opening angle theta in the plane has length theta on the circle.
  const double theta = 1.1;
  const auto wedge = Cone::polyhedral(2, {{0.0, 1.0}, {std::sin(theta), -std::cos(theta)}});
  CHECK(sphere_weight_mass_direct(Weight::constant(wedge)) == doctest::Approx(theta).epsilon(1e-12));
  // Octant cut by an extra face x3 > x1: area is half of the octant's pi/2 by symmetry x1 <-> x3.
  const auto cut = Cone::polyhedral(3, {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {-1, 0, 1}});
  CHECK(sphere_weight_mass_direct(Weight::constant(cut)) == doctest::Approx(kPi / 4.0).epsilon(1e-9));
}

TEST_CASE("log-mass closed form agrees with angular quadrature") {
  const double closed = sphere_weight_log_mass(xy_quadrant());
  const double angular = sphere_weight_log_mass(custom_xy());
  // Symmetric about pi/4; t = (pi/4) s^3 removes the t log t endpoint.
  const double ref = 2.0 * oracle::gauss_legendre(
                               [](double s) {
                                 const double t = 0.25 * kPi * s * s * s;
                                 const double v = std::cos(t) * std::sin(t);
                                 return v * std::log(v) * 0.75 * kPi * s * s;
                               },
                               0.0, 1.0, 200);
  CHECK(rel(closed, ref) < 1e-10);
  CHECK(rel(angular, ref) < 1e-9);
  const auto x3 = Weight::monomial(Cone::orthant(3), {1.0, 0.0, 2.0});
  const auto x3c = Weight::custom(
      Cone::orthant(3), [](PointView x) { return x[0] * x[2] * x[2]; },
      [](PointView x, std::span<double> g) {
        g[0] = x[2] * x[2];
        g[1] = 0.0;
        g[2] = 2.0 * x[0] * x[2];
      },
      3.0);
  CHECK(rel(sphere_weight_log_mass(x3), sphere_weight_log_mass(x3c)) < 1e-8);
  CHECK(sphere_weight_log_mass(Weight::constant(Cone::full_space(2), 3.0)) ==
        doctest::Approx(3.0 * 2.0 * kPi * std::log(3.0)));
}

TEST_CASE("integrate_radial examples") {
  for (double pp : {1.5, 2.0, 3.0}) {
    const double q = pp / (pp - 1.0);
    const auto w = xy_quadrant();
    RadialProfile prof{[q](double r) { return std::exp(-std::pow(r, q)); }, TailCertificate::gaussian(1.0, q)};
    CHECK(rel(integrate_radial(w, prof), 0.5 * std::tgamma(4.0 / q) / q) < 1e-11);
  }
  for (double lambda : {0.5, 1.0, 3.0}) {
    RadialProfile ind{[lambda](double r) { return r <= lambda ? 1.0 : 0.0; }, TailCertificate::compact(lambda)};
    CHECK(rel(integrate_radial(xy_quadrant(), ind), std::pow(lambda, 4.0) * 0.125) < 1e-12);
  }
  RadialProfile zero{[](double) { return 0.0; }, TailCertificate::gaussian(1.0, 2.0)};
  CHECK(integrate_radial(xy_quadrant(), zero) == 0.0);
  RadialProfile none{[](double) { return 1.0; }, std::nullopt};
  try {
    (void)integrate_radial(xy_quadrant(), none);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::TailUnbounded);
  }
}

TEST_CASE("grid rule structure") {
  GridRule rule(Cone::orthant(2, {true, false}), {-1.0, -1.0}, {1.0, 1.0}, 10);
  CHECK(rule.tensor_size() == 100);
  CHECK(rule.size() == 50);
  CHECK(rule.total_weight() <= 4.0);
  for (std::size_t flat : rule.inside()) {
    CHECK(rule.cone().contains(rule.node(flat)));
    CHECK(rule.flat_index(rule.multi_index(flat)) == flat);
  }
  CHECK(rule.slot(0) == GridRule::npos);
  CHECK_THROWS_AS(GridRule(Cone::full_space(4), {0, 0, 0, 0}, {1, 1, 1, 1}, 2), Error);
  CHECK_THROWS_AS(GridRule(Cone::orthant(1), {-2.0}, {-1.0}, 8), Error);
}

TEST_CASE("integrate_weighted examples") {
  const auto one1 = Weight::constant(Cone::full_space(1));
  GridRule box(Cone::full_space(1), {-1.0}, {2.5}, 37);
  CHECK(std::abs(integrate_weighted(one1, [](PointView) { return 1.0; }, box) - 3.5) <= box.cell_volume());

  GridRule g(Cone::full_space(1), {-8.0}, {8.0}, 512);
  const double gauss = integrate_weighted(one1, [](PointView x) { return std::exp(-x[0] * x[0]); }, g);
  CHECK(std::abs(gauss - std::sqrt(kPi)) < 1e-6);

  const auto w = xy_quadrant();
  GridRule q(Cone::orthant(2), {0.0, 0.0}, {6.0, 6.0}, 256);
  const double grid = integrate_weighted(w, [](PointView x) { return std::exp(-(x[0] * x[0] + x[1] * x[1])); }, q);
  RadialProfile prof{[](double r) { return std::exp(-r * r); }, TailCertificate::gaussian(1.0, 2.0)};
  CHECK(std::abs(grid - integrate_radial(w, prof)) < 1e-3);

  const auto bad = [](PointView x) { return x[0] > 3.0 ? std::nan("") : 1.0; };
  try {
    (void)integrate_weighted(w, bad, q);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NonFiniteSample);
  }
}

TEST_CASE("integrate_weighted is linear, monotone and reproducible") {
  const auto w = xy_quadrant();
  GridRule q(Cone::orthant(2), {0.0, 0.0}, {3.0, 3.0}, 64);
  auto f = [](PointView x) { return std::exp(-x[0]) * std::cos(x[1]); };
  auto g = [](PointView x) { return x[0] * x[1] / (1.0 + x[0]); };
  const double If = integrate_weighted(w, f, q);
  const double Ig = integrate_weighted(w, g, q);
  const double Ilin = integrate_weighted(w, [&](PointView x) { return 2.0 * f(x) - 3.0 * g(x); }, q);
  CHECK(Ilin == doctest::Approx(2.0 * If - 3.0 * Ig).epsilon(1e-12));
  const double Imax = integrate_weighted(w, [&](PointView x) { return std::max(f(x), g(x)); }, q);
  CHECK(Imax >= If);
  CHECK(Imax >= Ig);
  CHECK(integrate_weighted(w, f, q) == If);

  std::vector<double> vals(q.size());
  for (std::size_t k = 0; k < q.size(); ++k) vals[k] = f(q.node(q.inside()[k]));
  CHECK(integrate_weighted(w, vals, q) == If);
}

TEST_CASE("grid error against the radial value shrinks under refinement") {
  const auto w = xy_quadrant();
  RadialProfile prof{[](double r) { return std::exp(-r * r); }, TailCertificate::gaussian(1.0, 2.0)};
  const double exact = integrate_radial(w, prof);
  double prev = 0.0;
  for (int n : {32, 64, 128}) {
    GridRule q(Cone::orthant(2), {0.0, 0.0}, {6.0, 6.0}, n);
    const double err =
        std::abs(integrate_weighted(w, [](PointView x) { return std::exp(-(x[0] * x[0] + x[1] * x[1])); }, q) - exact);
    if (prev > 0.0) CHECK(err <= 0.5 * prev);
    prev = err;
  }
}

TEST_CASE("tail certificates") {
  const auto t = TailCertificate::gaussian(0.5, 2.0, 3.0);
  const auto t2 = t.pow(2.0);
  CHECK(t2.rate == 1.0);
  CHECK(t2.constant == 9.0);
  const double R = t.truncation_radius(1e-12);
  CHECK(3.0 * std::exp(-0.5 * (R - 2.0) * (R - 2.0)) == doctest::Approx(1e-12).epsilon(1e-9));
  CHECK(TailCertificate::compact(4.0).truncation_radius() == 4.0);
}
