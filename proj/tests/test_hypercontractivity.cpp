#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "conelab/constants.hpp"
#include "conelab/error.hpp"
#include "conelab/hypercontractivity.hpp"
#include "oracles.hpp"

using namespace conelab;

namespace {

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no error thrown");
  return ErrorKind::ConfigInvalid;
}

HyperConfig extremal_config(double p, double alpha, double beta, double t, Weight w) {
  HyperConfig cfg;
  cfg.p = p;
  cfg.alpha = alpha;
  cfg.beta = beta;
  cfg.t_tilde = t;
  cfg.g = hyper_extremal_g(p, beta, alpha, t, Point(static_cast<std::size_t>(w.dimension()), 0.0));
  cfg.weight = std::move(w);
  return cfg;
}

}  // namespace

TEST_CASE("q path") {
  CHECK(q_path(1.0, 2.0, 1.0, 0.0) == 1.0);
  CHECK(q_path(1.0, 2.0, 1.0, 1.0) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(q_path(1.0, 2.0, 1.0, 0.5) == doctest::Approx(4.0 / 3.0).epsilon(1e-15));
  for (double t : {0.0, 0.3, 0.9}) CHECK(q_path(1.5, 1.5, 0.9, t) == 1.5);
  CHECK(kind_of([] { (void)q_path(1.0, 2.0, 1.0, 1.5); }) == ErrorKind::OutOfRange);
  CHECK(kind_of([] { (void)q_path(1.0, 2.0, 1.0, -0.1); }) == ErrorKind::OutOfRange);
  CHECK(kind_of([] { (void)q_path(2.0, 1.0, 1.0, 0.5); }) == ErrorKind::AlphaBetaOrder);
}

TEST_CASE("closed-form factor: hand value, alpha = beta, and the near-diagonal limit") {
  const auto w = Weight::constant(Cone::full_space(1));
  // p = 2, alpha = 1, beta = 2, t = 1, n = 1: -(3/4) log 2 - (1/4) log(2 pi).
  const double hand = -0.75 * std::log(2.0) - 0.25 * std::log(2.0 * std::numbers::pi);
  CHECK(log_hyper_factor(2.0, 1.0, 2.0, 1.0, w) == doctest::Approx(hand).epsilon(1e-14));
  CHECK(log_hyper_factor(2.0, 1.3, 1.3, 0.7, w) == 0.0);
  for (double p : {1.5, 2.0, 3.0}) {
    const double near = log_hyper_factor(p, 1.3, 1.3 + 1e-6, 0.7, w);
    CHECK(std::abs(near) < 1e-4);
  }
}

TEST_CASE("integrating the log-derivative bound reproduces the closed-form factor") {
  const Weight weights[] = {Weight::constant(Cone::full_space(1)), Weight::constant(Cone::full_space(2)),
                            Weight::monomial(Cone::orthant(2), {1.0, 2.0}),
                            Weight::monomial(Cone::orthant(1), {0.5})};
  for (const auto& w : weights) {
    for (double p : {1.5, 2.0, 3.0}) {
      for (auto [a, b, t] : {std::tuple{1.0, 2.0, 1.0}, std::tuple{0.5, 3.0, 0.4}, std::tuple{2.0, 2.5, 2.0}}) {
        const double closed = log_hyper_factor(p, a, b, t, w);
        // Independent integration of the same integrand written out here.
        const double m = w.homogeneous_dimension();
        const double L = sharp_constant(p, w).value;
        auto f = [&](double s) {
          const double q = a * b / ((a - b) * s / t + b);
          const double dq = a * b * (b - a) / t / std::pow((a - b) * s / t + b, 2.0);
          return (m / p) * dq / (q * q) * std::log(L / (std::exp(1.0) * std::pow(p, p)) * m * dq / std::pow(q, 2.0 - p));
        };
        const double oracle_int = oracle::gauss_legendre(f, 0.0, t, 40);
        CHECK(closed == doctest::Approx(oracle_int).epsilon(1e-10));
        CHECK(integrated_log_bound(p, a, b, t, w) == doctest::Approx(oracle_int).epsilon(1e-10));
      }
    }
  }
}

TEST_CASE("extremal equality at p = 2, alpha = 1, beta = 2, t = 1, n = 1") {
  auto cfg = extremal_config(2.0, 1.0, 2.0, 1.0, Weight::constant(Cone::full_space(1)));
  const auto rep = hyper_check(cfg);
  CHECK(rep.membership == Membership::True);
  CHECK(rep.ratio >= 0.999);
  CHECK(rep.ratio <= 1.001);
  CHECK(rep.pass);
  // Both sides by hand: ||e^g||_1 = 2 sqrt(pi), lhs = rhs = pi^{1/4}.
  CHECK(rep.norm_alpha == doctest::Approx(2.0 * std::sqrt(std::numbers::pi)).epsilon(1e-6));
  CHECK(rep.lhs == doctest::Approx(std::pow(std::numbers::pi, 0.25)).epsilon(1e-4));
  CHECK(rep.rhs == doctest::Approx(std::pow(std::numbers::pi, 0.25)).epsilon(1e-6));
  // Trace: times increasing, q inside [alpha, beta], and log F follows the
  // integrated bound exactly along the extremal path.
  REQUIRE(rep.F_trace.size() == 8);
  const auto& w = cfg.weight;
  for (std::size_t i = 0; i < rep.F_trace.size(); ++i) {
    const auto& tp = rep.F_trace[i];
    if (i > 0) CHECK(tp.t > rep.F_trace[i - 1].t);
    CHECK(tp.q >= 1.0);
    CHECK(tp.q <= 2.0);
    const double bound = oracle::gauss_legendre(
        [&](double s) { return log_derivative_rhs(2.0, 1.0, 2.0, 1.0, w, s); }, 0.0, tp.t, 20);
    CHECK(std::log(tp.F / rep.norm_alpha) == doctest::Approx(bound).epsilon(1e-4).scale(1.0));
  }
}

TEST_CASE("extremal equality across p, dimensions and weights") {
  struct Case {
    double p, a, b, t;
    Weight w;
  };
  const Case cases[] = {
      {1.5, 1.0, 2.0, 1.0, Weight::constant(Cone::full_space(1))},
      {3.0, 1.0, 3.0, 0.5, Weight::constant(Cone::full_space(1))},
      {2.0, 1.0, 2.0, 1.0, Weight::monomial(Cone::orthant(1), {2.0})},
      {3.0, 0.8, 1.6, 1.0, Weight::monomial(Cone::orthant(1), {1.0})},
      {2.0, 1.0, 2.0, 0.5, Weight::constant(Cone::full_space(2))},
      {2.0, 1.0, 1.5, 1.0, Weight::monomial(Cone::orthant(2), {1.0, 1.0})},
  };
  for (const auto& c : cases) {
    CAPTURE(c.p);
    CAPTURE(c.w.describe());
    const auto rep = hyper_check(extremal_config(c.p, c.a, c.b, c.t, c.w));
    CHECK(rep.ratio == doctest::Approx(1.0).epsilon(1e-3));
  }
}

TEST_CASE("strict inequality off the extremal family") {
  // min(0, extremal with C = 1): a plateau on top of the extremal profile.
  const auto w = Weight::constant(Cone::full_space(1));
  auto cfg = extremal_config(2.0, 1.0, 2.0, 1.0, w);
  const auto ext = hyper_extremal_g(2.0, 2.0, 1.0, 1.0, {0.0}, 1.0);
  cfg.g = ext;
  cfg.g.value = [f = ext.value](PointView x) { return std::min(0.0, f(x)); };
  cfg.g.gradient = nullptr;
  const auto rep = hyper_check(cfg);
  CHECK(rep.ratio < 0.99);
  CHECK(rep.pass);
  // Same profile with the wrong rate.
  auto off = extremal_config(2.0, 1.0, 2.0, 1.0, w);
  off.g = hyper_extremal_g(2.0, 2.0, 1.0, 0.6, {0.0});
  CHECK(hyper_check(off).ratio < 0.99);
}

TEST_CASE("alpha = beta reduces to ||e^{Q g}|| <= ||e^g||") {
  for (int n : {1, 2}) {
    HyperConfig cfg;
    cfg.weight = Weight::constant(Cone::full_space(n));
    cfg.alpha = cfg.beta = 1.5;
    cfg.t_tilde = 0.7;
    Point c1(static_cast<std::size_t>(n), 0.3), c2(static_cast<std::size_t>(n), -1.0);
    cfg.g = log_mixture({c1, c2}, {1.0, 0.6}, {1.0, 0.5});
    const auto rep = hyper_check(cfg);
    CHECK(rep.rhs == doctest::Approx(rep.norm_alpha).epsilon(1e-15));
    CHECK(rep.ratio < 1.0);
    for (const auto& tp : rep.F_trace) CHECK(tp.q == 1.5);
  }
}

TEST_CASE("randomized admissible suite stays below the bound, strictly") {
  std::mt19937_64 rng(20241);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  const Weight weights[] = {Weight::constant(Cone::full_space(1)), Weight::monomial(Cone::orthant(1), {1.0}),
                            Weight::constant(Cone::full_space(2)), Weight::monomial(Cone::orthant(2), {1.0, 2.0})};
  int count = 0;
  double worst = 0.0;
  for (const auto& w : weights) {
    for (double p : {1.5, 2.0, 3.0}) {
      for (int rep_i = 0; rep_i < (w.dimension() == 1 ? 3 : 1); ++rep_i) {
        const double q = p / (p - 1.0);
        const double t = 0.3 + 0.7 * U(rng);
        // t b^{p-1} < 1/2 for every component.
        const double bmax = std::pow(0.5 / t, 1.0 / (p - 1.0));
        const int k = 1 + static_cast<int>(3 * U(rng));
        const auto centers = sample_cone(w.cone(), static_cast<std::size_t>(k), 7 + count, 0.0, 1.5);
        std::vector<double> rates, coeffs;
        for (int i = 0; i < k; ++i) {
          rates.push_back(bmax * (0.2 + 0.75 * U(rng)));
          coeffs.push_back(0.2 + U(rng));
        }
        HyperConfig cfg;
        cfg.p = p;
        cfg.alpha = 0.5 + U(rng);
        cfg.beta = cfg.alpha * (1.2 + U(rng));
        cfg.t_tilde = t;
        cfg.weight = w;
        cfg.g = log_mixture(centers, rates, coeffs, q);
        const auto rep = hyper_check(cfg);
        CAPTURE(w.describe());
        CAPTURE(p);
        CHECK(rep.ratio <= 1.0 + 1e-3);
        CHECK(rep.ratio < 1.0);
        MESSAGE("delta = " << 1.0 - rep.ratio);
        worst = std::max(worst, rep.ratio);
        ++count;
      }
    }
  }
  CHECK(count >= 18);
  CHECK(worst < 1.0);
}

TEST_CASE("log-derivative bound: equality on the extremal, strict on a generic g") {
  const auto w = Weight::constant(Cone::full_space(1));
  auto cfg = extremal_config(2.0, 1.0, 2.0, 1.0, w);
  for (double t : {0.25, 0.5, 0.75}) {
    const auto rep = log_derivative_bound(cfg, t, 0.01);
    CHECK(rep.ok);
    CHECK(rep.lhs == doctest::Approx(rep.rhs).epsilon(1e-3).scale(1.0));
  }
  HyperConfig gen = cfg;
  gen.g = log_mixture({{0.5}, {-1.0}}, {0.3, 0.4}, {1.0, 0.7});
  const auto rep = log_derivative_bound(gen, 0.5, 0.01);
  CHECK(rep.ok);
  CHECK(rep.lhs < rep.rhs - 1e-2);
  CHECK(kind_of([&] { (void)log_derivative_bound(cfg, 0.5, 0.3); }) == ErrorKind::OutOfRange);
  // dt and 2 dt disagree well beyond the tolerance.
  CHECK(kind_of([&] { (void)log_derivative_bound(gen, 0.5, 0.24); }) == ErrorKind::StepTooCoarse);
}

TEST_CASE("error paths") {
  auto cfg = extremal_config(2.0, 1.0, 2.0, 1.0, Weight::constant(Cone::full_space(1)));
  auto bare = cfg;
  bare.g.tail.reset();
  CHECK(kind_of([&] { (void)hyper_check(bare); }) == ErrorKind::NonIntegrable);
  auto order = cfg;
  order.alpha = 3.0;
  CHECK(kind_of([&] { (void)hyper_check(order); }) == ErrorKind::AlphaBetaOrder);
  // -|y|^2 with t b >= 1: Q_t g is -inf, so g is not in F_t.
  auto steep = cfg;
  steep.g = power_potential({0.0}, 2.0, 2.0, -1);
  steep.g.tail = TailCertificate::gaussian(1.0, 2.0, 1.0);
  CHECK(kind_of([&] { (void)hyper_check(steep); }) == ErrorKind::DomainError);
}
