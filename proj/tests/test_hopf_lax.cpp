#include <doctest.h>

#include <cmath>
#include <memory>

#include "conelab/constants.hpp"
#include "conelab/error.hpp"
#include "conelab/hopf_lax.hpp"

using namespace conelab;

namespace {

std::shared_ptr<const GridRule> box(const Cone& cone, double lo, double hi, int n) {
  const auto d = static_cast<std::size_t>(cone.dimension());
  return std::make_shared<const GridRule>(cone, std::vector<double>(d, lo), std::vector<double>(d, hi), n);
}

TestFunction from(int n, std::function<double(PointView)> f) {
  TestFunction u;
  u.dimension = n;
  u.value = std::move(f);
  return u;
}

// Power family on R^n: exact Q_t written out directly, with the minimizer
// y* = kappa x, kappa = 1 / (1 + sign t b^{p-1}).
struct PowerCase {
  double b, p, t;
  int sign;

  [[nodiscard]] double q() const { return p / (p - 1.0); }
  [[nodiscard]] double kappa() const { return 1.0 / (1.0 + sign * t * std::pow(b, p - 1.0)); }
  [[nodiscard]] double exact(PointView x) const {
    const double bt = b / std::pow(1.0 + sign * t * std::pow(b, p - 1.0), q() - 1.0);
    return sign * bt / q() * std::pow(norm(x), q());
  }
  [[nodiscard]] double lipschitz(double r) const {
    const double bt = b / std::pow(1.0 + sign * t * std::pow(b, p - 1.0), q() - 1.0);
    return bt * std::pow(r, q() - 1.0);
  }
};

struct ErrorSample {
  double err = 0.0;
  double bound = 0.0;
};

ErrorSample power_error(const PowerCase& c, int dim, int n, double half, HopfLaxMethod method) {
  const auto rule = box(Cone::full_space(dim), -half, half, n);
  const auto g = sample_field(power_potential(Point(dim, 0.0), c.b, c.q(), c.sign), rule);
  const auto res = inf_convolve(g, c.t, c.p, method);
  ErrorSample out;
  double lip = 0.0;
  for (std::size_t k = 0; k < rule->size(); ++k) {
    const Point x = rule->node(rule->inside()[k]);
    // Only nodes whose exact minimizer is inside the box are comparable.
    bool ok = true;
    for (double xi : x) ok = ok && std::abs(c.kappa() * xi) <= half - rule->spacing(0);
    if (!ok) continue;
    out.err = std::max(out.err, std::abs(res.field.values[k] - c.exact(x)));
    lip = std::max(lip, c.lipschitz(norm(x)));
  }
  out.bound = 2.0 * rule->max_spacing() * lip;
  return out;
}

}  // namespace

TEST_CASE("t = 0 is the identity and fast_p2 rejects p != 2") {
  const auto rule = box(Cone::full_space(1), -2, 2, 33);
  const auto g = sample_field(from(1, [](PointView x) { return std::sin(3 * x[0]); }), rule);
  const auto r = inf_convolve(g, 0.0, 2.0, HopfLaxMethod::Naive);
  CHECK(r.field.values == g.values);
  CHECK_THROWS_AS(inf_convolve(g, 0.5, 3.0, HopfLaxMethod::FastP2), Error);
  try {
    (void)inf_convolve(g, 0.5, 3.0, HopfLaxMethod::FastP2);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::MethodCostMismatch);
  }
  GridField empty;
  empty.rule = rule;
  try {
    (void)inf_convolve(empty, 0.5, 2.0, HopfLaxMethod::Naive);
    FAIL("expected EmptyDomain");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::EmptyDomain);
  }
  CHECK(hopf_lax_method_from_string("fast_p2") == HopfLaxMethod::FastP2);
  CHECK_THROWS_AS(hopf_lax_method_from_string("fft"), Error);
}

TEST_CASE("power family rate matches the written-out closed form") {
  // p = 2, b = 1, t = 1: |y|^2/2 -> |y|^2/4.
  CHECK(power_family_rate(1.0, 2.0, 1.0, 1) == doctest::Approx(0.5).epsilon(1e-15));
  // Concave, p = 2, b = 1, t = 1/2: -|y|^2/2 -> -|y|^2.
  CHECK(power_family_rate(1.0, 2.0, 0.5, -1) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK_THROWS_AS(power_family_rate(1.0, 2.0, 1.0, -1), Error);
}

TEST_CASE("closed forms: max interior error below 2hL and shrinking under refinement (1D)") {
  const PowerCase cases[] = {
      {1.0, 2.0, 1.0, 1}, {0.7, 3.0, 0.8, 1}, {1.3, 1.5, 0.5, 1},
      {1.0, 2.0, 0.5, -1}, {0.6, 3.0, 0.9, -1}, {0.8, 1.5, 0.4, -1},
  };
  for (const auto& c : cases) {
    for (auto method : {HopfLaxMethod::Naive, HopfLaxMethod::Pruned}) {
      CAPTURE(c.p);
      CAPTURE(c.sign);
      CAPTURE(to_string(method));
      double prev = 0.0;
      for (int n : {256, 512, 1024}) {
        const auto e = power_error(c, 1, n, 4.0, method);
        CAPTURE(n);
        CHECK(e.err <= e.bound);
        if (prev > 0.0) CHECK(e.err <= 0.6 * prev);
        prev = e.err;
      }
    }
  }
}

TEST_CASE("closed forms in 2D with fast_p2 up to 256^2") {
  for (const PowerCase c : {PowerCase{1.0, 2.0, 1.0, 1}, PowerCase{1.0, 2.0, 0.5, -1}}) {
    double prev = 0.0;
    for (int n : {64, 128, 256}) {
      const auto e = power_error(c, 2, n, 4.0, HopfLaxMethod::FastP2);
      CAPTURE(n);
      CHECK(e.err <= e.bound);
      if (prev > 0.0) CHECK(e.err <= 0.6 * prev);
      prev = e.err;
    }
  }
}

TEST_CASE("fast_p2 agrees with naive to 1e-12") {
  auto g1 = from(1, [](PointView x) { return std::sin(3 * x[0]) + 0.3 * x[0] * x[0]; });
  auto g2 = from(2, [](PointView x) { return std::cos(2 * x[0]) * std::sin(x[1]) - 0.1 * x[0] * x[1]; });
  struct Case {
    std::shared_ptr<const GridRule> rule;
    const TestFunction* g;
  };
  const Case cases[] = {
      {box(Cone::full_space(1), -3, 3, 1024), &g1},
      {box(Cone::orthant(1), -1, 3, 400), &g1},
      {box(Cone::full_space(2), -2, 2, 48), &g2},
      {box(Cone::orthant(2), -1, 3, 48), &g2},
      {box(Cone::half_space({0.6, 0.8}), -2, 2, 40), &g2},
  };
  for (const auto& c : cases) {
    const auto g = sample_field(*c.g, c.rule);
    for (double t : {0.05, 0.5, 3.0}) {
      const auto a = inf_convolve(g, t, 2.0, HopfLaxMethod::Naive);
      const auto b = inf_convolve(g, t, 2.0, HopfLaxMethod::FastP2);
      double worst = 0.0;
      for (std::size_t k = 0; k < g.values.size(); ++k) worst = std::max(worst, std::abs(a.field.values[k] - b.field.values[k]));
      CHECK(worst <= 1e-12);
    }
  }
}

TEST_CASE("pruned returns exactly the naive minimum") {
  auto g1 = from(1, [](PointView x) { return std::sin(5 * x[0]) + 0.2 * std::abs(x[0]); });
  auto g2 = from(2, [](PointView x) { return std::sin(3 * x[0] + x[1]) + 0.05 * (x[0] * x[0] + x[1] * x[1]); });
  auto g3 = from(3, [](PointView x) { return std::cos(x[0] - x[1]) * std::sin(2 * x[2]); });
  const std::pair<std::shared_ptr<const GridRule>, const TestFunction*> cases[] = {
      {box(Cone::full_space(1), -3, 3, 300), &g1},
      {box(Cone::orthant(2), -1, 3, 30), &g2},
      {box(Cone::full_space(3), -1.5, 1.5, 12), &g3},
  };
  for (const auto& [rule, fn] : cases) {
    const auto g = sample_field(*fn, rule);
    for (double p : {1.5, 2.0, 3.0}) {
      for (double t : {0.1, 1.0}) {
        const auto a = inf_convolve(g, t, p, HopfLaxMethod::Naive);
        const auto b = inf_convolve(g, t, p, HopfLaxMethod::Pruned);
        CHECK(a.field.values == b.field.values);
        CHECK(a.argmin == b.argmin);
        set_hopf_lax_threads(3);
        const auto c = inf_convolve(g, t, p, HopfLaxMethod::Pruned);
        set_hopf_lax_threads(1);
        CHECK(c.field.values == b.field.values);
        CHECK(c.argmin == b.argmin);
      }
    }
  }
}

TEST_CASE("Q_t g <= g and non-increasing in t at every node") {
  auto g = from(2, [](PointView x) { return std::sin(2 * x[0]) + std::abs(x[1]) - 0.2 * x[0] * x[0]; });
  const auto rule = box(Cone::orthant(2, {true, false}), -1, 3, 40);
  const auto field = sample_field(g, rule);
  for (auto [p, m] : {std::pair{2.0, HopfLaxMethod::FastP2}, std::pair{1.5, HopfLaxMethod::Pruned},
                      std::pair{3.0, HopfLaxMethod::Naive}}) {
    const auto run = run_hopf_lax(field, p, {0.1, 0.2, 0.4, 0.8, 1.6}, m);
    const auto rep = check_monotonicity(run);
    CHECK(rep.ok());
    CHECK(rep.worst <= 0.0);
  }
  CHECK_THROWS_AS(run_hopf_lax(field, 2.0, {0.2, 0.1}, HopfLaxMethod::Naive), Error);
}

TEST_CASE("boundary argmin ratio flags truncation") {
  // Minimizers of a linear tilt run off the right edge of the box.
  auto g = from(1, [](PointView x) { return -x[0]; });
  const auto rule = box(Cone::full_space(1), -2, 2, 101);
  const auto r = inf_convolve(sample_field(g, rule), 2.0, 2.0, HopfLaxMethod::Naive);
  CHECK(r.boundary_argmin_ratio > 0.5);
  // Quadratic wells keep minimizers well inside.
  const auto q = inf_convolve(sample_field(power_potential({0.0}, 1.0, 2.0, 1), rule), 1.0, 2.0,
                              HopfLaxMethod::Naive);
  CHECK(q.boundary_argmin_ratio == 0.0);
  // A truncation edge along the cone boundary does not count.
  const auto half = box(Cone::orthant(1), -1, 2, 100);
  CHECK_FALSE(on_truncation_boundary(*half, 0));
  CHECK(on_truncation_boundary(*half, half->size() - 1));
}

TEST_CASE("HJ residual: refinement on the quadratic family, zero for constants") {
  const auto g = power_potential({0.0}, 1.0, 2.0, 1);
  double prev = 0.0;
  for (int n : {100, 200, 400, 800}) {
    const auto rule = box(Cone::full_space(1), -2, 2, n);
    const double h = rule->spacing(0);
    std::vector<double> times;
    for (int k = 1; k <= 8; ++k) times.push_back(0.5 + k * h);
    const auto run = run_hopf_lax(sample_field(g, rule), 2.0, times, HopfLaxMethod::FastP2);
    const auto res = hj_residual(run);
    CAPTURE(n);
    CHECK(res.count > 0);
    if (prev > 0.0) CHECK(prev / res.median >= 1.5);
    prev = res.median;
  }
  const auto rule = box(Cone::orthant(2), -1, 2, 30);
  const auto c = sample_field(from(2, [](PointView) { return 0.7; }), rule);
  for (double p : {1.5, 2.0, 3.0}) {
    const auto run = run_hopf_lax(c, p, {0.1, 0.2, 0.3, 0.4}, HopfLaxMethod::Pruned);
    const auto res = hj_residual(run);
    CHECK(res.median == 0.0);
    CHECK(res.p90 == 0.0);
  }
  const auto run2 = run_hopf_lax(c, 2.0, {0.1, 0.2}, HopfLaxMethod::Naive);
  try {
    (void)hj_residual(run2);
    FAIL("expected InsufficientSlices");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::InsufficientSlices);
  }
  const auto run3 = run_hopf_lax(c, 2.0, {0.1, 0.2, 0.4}, HopfLaxMethod::Naive);
  CHECK_THROWS_AS(hj_residual(run3), Error);
}

TEST_CASE("HJ residual on a kink: the bad set shrinks under refinement") {
  // Q_t of a minimum of two wells keeps its kink at 0 for all t.
  auto g = from(1, [](PointView x) {
    return std::min((x[0] - 1) * (x[0] - 1), (x[0] + 1) * (x[0] + 1)) / 2.0;
  });
  double prev = 1.0;
  for (int n : {100, 200, 400, 800}) {
    const auto rule = box(Cone::full_space(1), -4, 4, n);
    const double h = rule->spacing(0);
    std::vector<double> times;
    for (int k = 1; k <= 6; ++k) times.push_back(0.5 + k * h);
    const auto run = run_hopf_lax(sample_field(g, rule), 2.0, times, HopfLaxMethod::FastP2);
    const auto res = hj_residual(run, 0.05);
    CAPTURE(n);
    CHECK(res.fraction_above > 0.0);
    CHECK(res.fraction_above < prev);
    CHECK(res.median < 0.05);
    prev = res.fraction_above;
  }
}

TEST_CASE("membership in F_t0") {
  const auto rule = box(Cone::full_space(1), -6, 6, 241);
  const Point x0{0.5};
  // Hypercontractive extremal with t b0^{p-1} < 1 at t0 = t.
  const auto ext = hyper_extremal_g(2.0, 2.0, 1.0, 1.0, {0.0});
  CHECK(membership_F_t0(ext, 1.0, 2.0, x0, rule).result == Membership::True);
  // -b|y|^2/2 with t b >= 1: the probe is unbounded below.
  const auto steep = power_potential({0.0}, 2.0, 2.0, -1);
  const auto f = membership_F_t0(steep, 1.0, 2.0, x0, rule);
  CHECK(f.result == Membership::False);
  CHECK(f.bounded_above);
  // Bounded g.
  const auto bnd = from(1, [](PointView x) { return std::sin(x[0]) + std::cos(3 * x[0]); });
  for (double t0 : {0.1, 1.0, 10.0}) CHECK(membership_F_t0(bnd, t0, 2.0, x0, rule).result == Membership::True);
  // Not bounded above.
  const auto up = power_potential({0.0}, 1.0, 1.5, 1);
  CHECK(membership_F_t0(up, 1.0, 2.0, x0, rule).result == Membership::False);
  CHECK_FALSE(membership_F_t0(up, 1.0, 2.0, x0, rule).bounded_above);
  // Minimum of the probe lies past the box edge.
  const auto half = box(Cone::orthant(1), 0, 2, 80);
  const auto tilt = from(1, [](PointView x) { return -x[0]; });
  const auto ind = membership_F_t0(tilt, 3.0, 2.0, Point{1.0}, half);
  CHECK(ind.result == Membership::Indeterminate);
  CHECK(ind.argmin_on_boundary);
  CHECK(to_string(Membership::Indeterminate) == "indeterminate");
}

TEST_CASE("c-transform involution on the concave power family") {
  for (double p : {2.0, 3.0, 1.5}) {
    CAPTURE(p);
    const double q = p / (p - 1.0);
    const auto g = power_potential({0.0}, 0.8, q, -1);
    double prev = 0.0;
    for (int n : {100, 200, 400}) {
      const auto rule = box(Cone::full_space(1), -4, 4, n);
      const auto rep = c_transform_involution(g, 0.5, p, rule);
      const double h = rule->spacing(0);
      CAPTURE(n);
      CHECK(rep.nodes_used > 10);
      CHECK(rep.max_abs_deviation <= 10.0 * h);
      CHECK(rep.min_gap >= -1e-12);
      if (prev > 0.0) CHECK(rep.max_abs_deviation <= prev);
      prev = rep.max_abs_deviation;
    }
  }
  // Quadratic g, p = 2: the deviation vanishes as t -> 0.
  const auto rule = box(Cone::full_space(1), -3, 3, 301);
  const auto quad = power_potential({0.0}, 1.0, 2.0, 1);
  double prev = 1.0;
  for (double t : {0.4, 0.1, 0.02, 0.0}) {
    const auto rep = c_transform_involution(quad, t, 2.0, rule, HopfLaxMethod::FastP2);
    // Down to the rounding floor.
    CHECK(rep.max_abs_deviation <= std::max(prev, 1e-14));
    prev = rep.max_abs_deviation;
  }
  CHECK(prev == 0.0);
}

TEST_CASE("c-transform involution gap is one-signed and strict off the c-concave class") {
  // A narrow bump on top of a concave quadratic.
  auto g = from(1, [](PointView x) { return -0.25 * x[0] * x[0] + std::exp(-x[0] * x[0] / 0.09); });
  const auto rule = box(Cone::full_space(1), -4, 4, 401);
  const auto rep = c_transform_involution(g, 0.5, 2.0, rule, HopfLaxMethod::Naive);
  CHECK(rep.min_gap >= -1e-12);
  CHECK(rep.max_gap > 1e-2);
}
