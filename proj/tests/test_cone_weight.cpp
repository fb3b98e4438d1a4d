#include <doctest.h>

#include <cmath>
#include <random>

#include "conelab/cone.hpp"
#include "conelab/error.hpp"
#include "conelab/weight.hpp"

using namespace conelab;

namespace {

Weight sum_of_squares_quadrant() {
  return Weight::custom(
      Cone::orthant(2), [](PointView x) { return x[0] * x[0] + x[1] * x[1]; },
      [](PointView x, std::span<double> g) {
        g[0] = 2.0 * x[0];
        g[1] = 2.0 * x[1];
      },
      2.0);
}

template <class F>
ErrorKind kind_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::ConfigInvalid;
}

}  // namespace

TEST_CASE("cone membership is scale invariant and convex on samples") {
  const std::vector<Cone> cones = {Cone::full_space(3), Cone::half_space({1.0, -2.0, 0.5}), Cone::orthant(3),
                                   Cone::orthant(3, {true, false, true}),
                                   Cone::polyhedral(2, {{1.0, 0.2}, {-0.3, 1.0}})};
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g;
  for (const auto& cone : cones) {
    const int n = cone.dimension();
    int checked = 0;
    for (int k = 0; k < 20000; ++k) {
      Point x(n), y(n), mid(n), sx(n);
      for (int i = 0; i < n; ++i) {
        x[i] = g(rng);
        y[i] = g(rng);
      }
      if (!cone.contains(x) || !cone.contains(y)) continue;
      ++checked;
      for (int i = 0; i < n; ++i) {
        mid[i] = 0.5 * (x[i] + y[i]);
        sx[i] = 3.7 * x[i];
      }
      CHECK(cone.contains(mid));
      CHECK(cone.contains(sx));
      CHECK(cone.boundary_distance(x) > 0.0);
    }
    CHECK(checked > 50);
  }
}

TEST_CASE("boundary distance of points on a face is zero") {
  const auto q = Cone::orthant(2);
  const Point on_face{0.0, 3.0};
  CHECK(q.boundary_distance(on_face) == 0.0);
  CHECK_FALSE(q.contains(on_face));
  const auto h = Cone::half_space({3.0, 4.0});
  const Point p{4.0, -3.0};
  CHECK(std::abs(h.boundary_distance(p)) < 1e-15);
}

TEST_CASE("sampled points stay clear of the boundary") {
  const auto pts = sample_cone(Cone::orthant(3), 500, 3);
  for (const auto& x : pts) {
    const double r = norm(x);
    CHECK(r >= 0.1 - 1e-12);
    CHECK(r <= 10.0 + 1e-12);
    CHECK(Cone::orthant(3).boundary_distance(x) >= 1e-6 * r);
  }
}

TEST_CASE("constant weight certificate is clean") {
  const auto w = Weight::constant(Cone::full_space(2), 1.0);
  const auto cert = check_log_concavity(w, 200, 1);
  CHECK(cert.all_ok());
  CHECK(cert.worst_violation == 0.0);
  CHECK(cert.samples_used == 200);
}

TEST_CASE("xy on the quadrant is log-concave") {
  const auto w = Weight::monomial(Cone::orthant(2), {1.0, 1.0});
  CHECK(w.degree() == 2.0);
  const auto cert = check_log_concavity(w, 1000, 5);
  CHECK(cert.all_ok());

  // Symbolic oracle: log(y1 y2 / x1 x2) <= -2 + y1/x1 + y2/x2 is log t <= t - 1 twice.
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.01, 10.0);
  for (int k = 0; k < 1000; ++k) {
    const Point x{u(rng), u(rng)};
    const Point y{u(rng), u(rng)};
    const auto gx = w.gradient(x);
    const double lhs = std::log(w(y) / w(x));
    const double rhs = -2.0 + (gx[0] * y[0] + gx[1] * y[1]) / w(x);
    const double oracle = -2.0 + y[0] / x[0] + y[1] / x[1];
    CHECK(rhs == doctest::Approx(oracle).epsilon(1e-12));
    CHECK(lhs <= rhs + 1e-12);
  }
}

TEST_CASE("x1^2 + x2^2 declared with tau = 2 fails log-concavity") {
  const auto w = sum_of_squares_quadrant();
  // Direct evaluation at x = (1, 0), y = (0, 1): lhs = 0, rhs = -2 + 0 = -2.
  const Point x{1.0, 1e-9};
  const Point y{1e-9, 1.0};
  const double lhs = std::log(w(y) / w(x));
  const double rhs = -2.0 + (2.0 * x[0] * y[0] + 2.0 * x[1] * y[1]) / w(x);
  CHECK(lhs > rhs + 1.0);

  const auto cert = check_log_concavity(w, 500, 2);
  CHECK_FALSE(cert.log_concavity_ok);
  CHECK(cert.worst_violation > 0.0);
  CHECK(cert.homogeneity_ok);
  CHECK(cert.euler_ok);
}

TEST_CASE("tau-concavity agrees with log-concavity") {
  CHECK(check_tau_concavity(Weight::monomial(Cone::orthant(2), {1.0, 1.0}), 1000, 9));
  CHECK(check_tau_concavity(Weight::monomial(Cone::orthant(1), {3.0}), 200, 9));
  CHECK_FALSE(check_tau_concavity(sum_of_squares_quadrant(), 500, 2));
  CHECK(kind_of([] { (void)check_tau_concavity(Weight::constant(Cone::full_space(2), 2.0), 10, 1); }) ==
        ErrorKind::DegreeZero);

  const std::vector<Weight> weights = {Weight::monomial(Cone::orthant(3), {0.5, 1.0, 2.0}),
                                       Weight::monomial(Cone::orthant(2, {true, false}), {2.5, 0.0}),
                                       sum_of_squares_quadrant()};
  for (const auto& w : weights) {
    CHECK(check_log_concavity(w, 500, 4).log_concavity_ok == check_tau_concavity(w, 500, 4));
  }
}

TEST_CASE("Euler residual") {
  const auto one = Weight::constant(Cone::full_space(2), 1.0);
  CHECK(euler_residual(one, Point{0.3, -4.0}) == 0.0);
  const auto xy = Weight::monomial(Cone::orthant(2), {1.0, 1.0});
  CHECK(euler_residual(xy, Point{1.0, 2.0}) < 1e-12);

  const auto wrong = Weight::custom(
      Cone::orthant(1), [](PointView x) { return x[0]; }, [](PointView, std::span<double> g) { g[0] = 1.0; }, 2.0);
  CHECK(euler_residual(wrong, Point{0.5}) > 0.1);
  CHECK(euler_residual(wrong, Point{4.0}) > 0.1);
  CHECK(kind_of([&] { (void)euler_residual(xy, Point{-1.0, 2.0}); }) == ErrorKind::DomainError);
}

TEST_CASE("analytic weights satisfy homogeneity and Euler to 1e-10") {
  const std::vector<Weight> weights = {Weight::constant(Cone::half_space({1.0, 1.0, 1.0}), 2.5),
                                       Weight::monomial(Cone::orthant(3), {0.5, 1.0, 2.0}),
                                       Weight::monomial(Cone::orthant(2, {false, true}), {0.0, 1.5})};
  for (const auto& w : weights) {
    const auto pts = sample_cone(w.cone(), 1000, 21);
    double worst = 0.0;
    for (const auto& x : pts) {
      for (double lambda : {0.5, 2.0, 7.0}) worst = std::max(worst, homogeneity_residual(w, x, lambda));
      worst = std::max(worst, euler_residual(w, x));
    }
    CHECK(worst < 1e-10);
  }
}

TEST_CASE("monomial degree is the exponent sum and needs positive axes") {
  const auto w = Weight::monomial(Cone::orthant(3), {0.25, 1.5, 2.0});
  CHECK(w.degree() == doctest::Approx(3.75));
  CHECK(w.homogeneous_dimension() == doctest::Approx(6.75));
  CHECK(kind_of([] { (void)Weight::monomial(Cone::full_space(2), {1.0, 0.0}); }) == ErrorKind::InvalidWeight);
  CHECK(kind_of([] { (void)Weight::monomial(Cone::orthant(2), {-1.0, 0.0}); }) == ErrorKind::InvalidWeight);
  CHECK(Weight::monomial(Cone::orthant(2), {0.0, 0.0}).kind() == WeightKind::Constant);
  CHECK(kind_of([] { (void)Weight::constant(Cone::full_space(1), 0.0); }) == ErrorKind::InvalidWeight);
}

TEST_CASE("non-positive custom weights are rejected by the certificate") {
  const auto bad = Weight::custom(
      Cone::full_space(1), [](PointView x) { return x[0]; }, [](PointView, std::span<double> g) { g[0] = 1.0; },
      1.0);
  CHECK(kind_of([&] { (void)check_log_concavity(bad, 50, 3); }) == ErrorKind::InvalidWeight);
}

TEST_CASE("translation invariance") {
  const auto one = Weight::constant(Cone::full_space(2), 1.0);
  CHECK(translation_invariant(one, Point{1.0, -2.0}));
  const auto xy = Weight::monomial(Cone::orthant(2), {1.0, 1.0});
  CHECK(translation_invariant(xy, Point{0.0, 0.0}));
  CHECK_FALSE(translation_invariant(xy, Point{0.5, 0.5}));
  // x2^2 on the upper half-plane is invariant under horizontal shifts.
  const auto y2 = Weight::monomial(Cone::orthant(2, {false, true}), {0.0, 2.0});
  CHECK(translation_invariant(y2, Point{3.0, 0.0}));
}
