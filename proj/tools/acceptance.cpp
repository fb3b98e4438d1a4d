// Acceptance run: one PASS/FAIL line per criterion, exit 0 iff all pass.
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "conelab/constants.hpp"
#include "conelab/error.hpp"
#include "conelab/functionals.hpp"
#include "conelab/hopf_lax.hpp"
#include "conelab/hypercontractivity.hpp"
#include "conelab/quadrature.hpp"
#include "conelab/transport1d.hpp"

using namespace conelab;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok && pass) detail << "first failure: " << what << "; ";
    pass = pass && ok;
  }
};

Weight one(int n) { return Weight::constant(Cone::full_space(n)); }
Weight xy() { return Weight::monomial(Cone::orthant(2), {1.0, 1.0}); }

std::vector<Weight> builtin_weights() {
  return {one(1),
          one(2),
          one(3),
          Weight::constant(Cone::half_space({0.0, 1.0}), 2.0),
          Weight::constant(Cone::orthant(3)),
          Weight::monomial(Cone::orthant(1), {2.0}),
          xy(),
          Weight::monomial(Cone::half_space({0.0, 0.0, 1.0}), {0.0, 0.0, 1.5}),
          Weight::monomial(Cone::orthant(3), {1.0, 0.5, 0.0})};
}

std::shared_ptr<const GridRule> box(const Cone& cone, double lo, double hi, int n) {
  const auto d = static_cast<std::size_t>(cone.dimension());
  return std::make_shared<const GridRule>(cone, std::vector<double>(d, lo), std::vector<double>(d, hi), n);
}

// Every Hopf-Lax run below reports into this tally for criterion 11.
struct MonotoneTally {
  std::size_t runs = 0, bad = 0;
  void add(const HopfLaxRun& run) {
    ++runs;
    if (!check_monotonicity(run).ok()) ++bad;
  }
} g_tally;

void c1(Outcome& o) {
  const double L = sharp_constant(2.0, one(1)).value;
  const double exact = 2.0 / (std::numbers::e * std::numbers::pi);
  o.require(std::abs(L - exact) <= 1e-10, "L(p=2, n=1)");
  double worst = 0.0;
  for (double p : {1.5, 2.0, 3.0, 5.0}) {
    for (const auto& w : builtin_weights()) {
      const auto c = proof_constants(p, w);
      const double m = w.homogeneous_dimension();
      const double v = sharp_constant(p, w).value;
      const double rebuilt = std::exp(p * c.C2 / m) / std::pow(m, p) * std::pow(c.C4, p);
      worst = std::max(worst, std::abs(rebuilt - v) / v);
    }
  }
  o.require(worst <= 1e-12, "constants identity");
  o.detail << "|L - 2/(e pi)| = " << std::abs(L - exact) << ", identity rel. error " << worst;
}

void c2(Outcome& o) {
  std::vector<Weight> ws;
  for (int n : {1, 2, 3}) {
    std::vector<double> normal(static_cast<std::size_t>(n), 0.0);
    normal.back() = 1.0;
    std::vector<double> last(static_cast<std::size_t>(n), 0.0);
    last.back() = 1.5;
    std::vector<double> all(static_cast<std::size_t>(n), 0.0);
    for (int i = 0; i < n; ++i) all[i] = 0.5 + i;
    ws.push_back(one(n));
    ws.push_back(Weight::constant(Cone::half_space(normal), 3.0));
    ws.push_back(Weight::monomial(Cone::half_space(normal), last));
    ws.push_back(Weight::constant(Cone::orthant(n)));
    ws.push_back(Weight::monomial(Cone::orthant(n), all));
  }
  double worst = 0.0;
  for (const auto& w : ws) {
    const double lhs = sphere_weight_mass_direct(w);
    const double rhs = w.homogeneous_dimension() * ball_weight_mass(w);
    worst = std::max(worst, std::abs(lhs - rhs) / rhs);
  }
  o.require(worst <= 1e-8, "radial identity");
  o.detail << ws.size() << " weights, worst rel. error " << worst;
}

void c3(Outcome& o) {
  double worst = 0.0;
  int count = 0;
  for (const auto& w : {one(1), one(2), xy()}) {
    for (double p : {1.5, 2.0, 3.0}) {
      for (double lambda : {0.5, 1.0, 2.0}) {
        const auto rep = deficit_p(GaussianExtremal(w, p, lambda).test_function(), p, w, RadialMethod{});
        worst = std::max(worst, std::abs(rep.deficit));
        ++count;
      }
    }
  }
  o.require(worst <= 1e-4, "extremal deficit");
  o.detail << count << " extremals, max |deficit| " << worst;
}

void c4(Outcome& o) {
  const std::vector<Weight> ws = {one(1), one(2), one(3), xy(), Weight::monomial(Cone::orthant(1), {1.0}),
                                  Weight::constant(Cone::half_space({1.0, 0.0}))};
  int total = 0, strict = 0;
  double smallest = INFINITY;
  for (std::uint64_t s = 0; s < 60; ++s) {
    const auto& w = ws[s % ws.size()];
    const double p = std::array{1.5, 2.0, 3.0, 4.0}[s % 4];
    const auto u = normalized(random_radial(w.dimension(), p, 7000 + s), p, w, RadialMethod{});
    const double d = deficit_p(u, p, w, RadialMethod{}).deficit;
    smallest = std::min(smallest, d);
    ++total;
    if (d > 1e-3) ++strict;
  }
  o.require(smallest >= -1e-3, "deficit sign");
  o.require(strict >= 0.9 * total, "strict fraction");
  o.detail << total << " functions, " << strict << " strict, smallest deficit " << smallest;
}

void c5(Outcome& o) {
  double worst = 0.0;
  for (const auto& w : {one(1), one(2), xy(), Weight::monomial(Cone::orthant(1), {2.0})}) {
    for (double p : {1.5, 2.0, 3.0}) {
      const double m = w.homogeneous_dimension();
      for (const auto& u0 : {GaussianExtremal(w, p, 1.3).test_function(),
                             normalized(random_radial(w.dimension(), p, 42), p, w, RadialMethod{})}) {
        const double e0 = entropy(u0, p, w, RadialMethod{});
        for (double t : {0.5, 2.0}) {
          const double et = entropy(dilated(u0, t, m, p), p, w, RadialMethod{});
          worst = std::max(worst, std::abs(et - e0 - m * std::log(t)));
        }
      }
    }
  }
  o.require(worst <= 1e-5, "scaling identity");
  o.detail << "max |E(u_t) - E(u) - m log t| " << worst;
}

void c6(Outcome& o) {
  double closed = 0.0, perim = 0.0;
  for (const auto& w : builtin_weights()) {
    const auto rep = deficit_1(w, 1.0);
    closed = std::max(closed, std::abs(rep.deficit) / std::max(1.0, std::abs(rep.entropy_lhs)));
    perim = std::max(perim, std::abs(perimeter_ball(w, 1.0) - sphere_weight_mass(w)));
  }
  o.require(closed <= 1e-12, "closed form");
  o.require(perim == 0.0, "perimeter identity");
  const GridRule q(Cone::orthant(2), {0.0, 0.0}, {1.0, 1.0}, 1024);
  const GridRule d(Cone::full_space(2), {-1.0, -1.0}, {1.0, 1.0}, 1024);
  const double grid = std::max(std::abs(deficit_1_grid(xy(), 1.0, {}, q, {1e-3, 1e-3, true}).deficit),
                               std::abs(deficit_1_grid(one(2), 1.0, {}, d, {1e-3, 1e-3, true}).deficit));
  o.require(grid <= 1e-3, "grid entropy");
  o.detail << "closed form " << closed << ", grid " << grid << ", perimeter mismatch " << perim;
}

struct PowerCase {
  double b, p, t;
  int sign;
};

// Max error over nodes whose exact minimizer kappa x stays inside the box,
// and 2 h L with L the largest |grad Q| over those nodes.
std::pair<double, double> power_error(const PowerCase& c, int dim, int n, HopfLaxMethod method) {
  const double half = 4.0;
  const auto rule = box(Cone::full_space(dim), -half, half, n);
  const double q = conjugate(c.p);
  const auto g = sample_field(power_potential(Point(dim, 0.0), c.b, q, c.sign), rule);
  const auto run = run_hopf_lax(g, c.p, {c.t / 2, c.t}, method);
  g_tally.add(run);
  const double bt = power_family_rate(c.b, c.p, c.t, c.sign);
  const double kappa = 1.0 / (1.0 + c.sign * c.t * std::pow(c.b, c.p - 1.0));
  double err = 0.0, lip = 0.0;
  for (std::size_t k = 0; k < rule->size(); ++k) {
    const Point x = rule->node(rule->inside()[k]);
    bool ok = true;
    for (double xi : x) ok = ok && std::abs(kappa * xi) <= half - rule->spacing(0);
    if (!ok) continue;
    const double r = norm(x);
    err = std::max(err, std::abs(run.slices[1].values[k] - c.sign * bt / q * std::pow(r, q)));
    lip = std::max(lip, bt * std::pow(r, q - 1.0));
  }
  return {err, 2.0 * rule->max_spacing() * lip};
}

void c7(Outcome& o) {
  const PowerCase cases1[] = {{1.0, 2.0, 1.0, 1}, {0.7, 3.0, 0.8, 1}, {1.3, 1.5, 0.5, 1},
                              {1.0, 2.0, 0.5, -1}, {0.6, 3.0, 0.9, -1}, {0.8, 1.5, 0.4, -1}};
  double worst_ratio = 0.0;
  for (const auto& c : cases1) {
    double prev = 0.0;
    for (int n : {256, 512, 1024}) {
      const auto [err, bound] = power_error(c, 1, n, HopfLaxMethod::Pruned);
      o.require(err <= bound, "1D error bound");
      if (prev > 0.0) worst_ratio = std::max(worst_ratio, err / prev);
      prev = err;
    }
  }
  for (const PowerCase c : {PowerCase{1.0, 2.0, 1.0, 1}, PowerCase{1.0, 2.0, 0.5, -1}}) {
    double prev = 0.0;
    for (int n : {64, 128, 256}) {
      const auto [err, bound] = power_error(c, 2, n, HopfLaxMethod::FastP2);
      o.require(err <= bound, "2D error bound");
      if (prev > 0.0) worst_ratio = std::max(worst_ratio, err / prev);
      prev = err;
    }
  }
  o.require(worst_ratio <= 0.6, "refinement ratio");
  double agree = 0.0;
  for (const auto& cone : {Cone::full_space(2), Cone::orthant(2), Cone::half_space({1.0, 1.0})}) {
    const auto rule = box(cone, -2.0, 2.0, 48);
    TestFunction g;
    g.dimension = 2;
    g.value = [](PointView x) { return std::sin(3 * x[0]) * std::cos(2 * x[1]) + 0.1 * x[0] * x[1]; };
    const auto f = sample_field(g, rule);
    const auto a = inf_convolve(f, 0.3, 2.0, HopfLaxMethod::FastP2);
    const auto b = inf_convolve(f, 0.3, 2.0, HopfLaxMethod::Naive);
    for (std::size_t k = 0; k < a.field.values.size(); ++k) {
      agree = std::max(agree, std::abs(a.field.values[k] - b.field.values[k]));
    }
  }
  o.require(agree <= 1e-12, "fast_p2 vs naive");
  o.detail << "worst refinement ratio " << worst_ratio << ", fast_p2 vs naive " << agree;
}

void c8(Outcome& o) {
  const auto g = power_potential({0.0}, 1.0, 2.0, 1);
  double prev = 0.0, worst_gain = INFINITY;
  std::ostringstream med;
  for (int n : {100, 200, 400, 800}) {
    const auto rule = box(Cone::full_space(1), -2, 2, n);
    const double h = rule->spacing(0);
    std::vector<double> times;
    for (int k = 1; k <= 8; ++k) times.push_back(0.5 + k * h);
    const auto run = run_hopf_lax(sample_field(g, rule), 2.0, times, HopfLaxMethod::FastP2);
    g_tally.add(run);
    const auto res = hj_residual(run);
    if (prev > 0.0) worst_gain = std::min(worst_gain, prev / res.median);
    prev = res.median;
    med << res.median << ' ';
  }
  o.require(worst_gain >= 1.5, "residual refinement");
  TestFunction c;
  c.dimension = 2;
  c.value = [](PointView) { return 0.7; };
  const auto cf = sample_field(c, box(Cone::orthant(2), -1, 2, 30));
  double constant = 0.0;
  for (double p : {1.5, 2.0, 3.0}) {
    const auto run = run_hopf_lax(cf, p, {0.1, 0.2, 0.3, 0.4}, HopfLaxMethod::Pruned);
    g_tally.add(run);
    constant = std::max(constant, hj_residual(run).p90);
  }
  o.require(constant == 0.0, "constant datum");
  o.detail << "medians " << med.str() << "(min gain " << worst_gain << "), constant residual " << constant;
}

HyperConfig extremal_config(double p, double a, double b, double t, const Weight& w) {
  HyperConfig cfg;
  cfg.p = p;
  cfg.alpha = a;
  cfg.beta = b;
  cfg.t_tilde = t;
  cfg.weight = w;
  cfg.g = hyper_extremal_g(p, b, a, t, Point(static_cast<std::size_t>(w.dimension()), 0.0));
  return cfg;
}

void c9(Outcome& o) {
  const double ext = hyper_check(extremal_config(2.0, 1.0, 2.0, 1.0, one(1))).ratio;
  o.require(ext >= 0.999 && ext <= 1.001, "extremal ratio");

  std::mt19937_64 rng(9001);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  const Weight weights[] = {one(1), Weight::monomial(Cone::orthant(1), {2.0}), one(2), xy()};
  int count = 0;
  double worst = 0.0;
  for (const auto& w : weights) {
    for (double p : {1.5, 2.0, 3.0}) {
      for (int r = 0; r < (w.dimension() == 1 ? 3 : 1); ++r) {
        const double q = conjugate(p);
        const double t = 0.3 + 0.7 * U(rng);
        const double bmax = std::pow(0.5 / t, 1.0 / (p - 1.0));
        const int k = 1 + static_cast<int>(3 * U(rng));
        const auto centers = sample_cone(w.cone(), static_cast<std::size_t>(k), 100 + count, 0.0, 1.5);
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
        worst = std::max(worst, hyper_check(cfg).ratio);
        ++count;
      }
    }
  }
  o.require(worst <= 1.0 + 1e-3, "randomized suite");

  HyperConfig same;
  same.alpha = same.beta = 1.5;
  same.t_tilde = 0.7;
  same.g = log_mixture({{0.3}, {-1.0}}, {1.0, 0.6}, {1.0, 0.5});
  const auto eq = hyper_check(same);
  o.require(eq.pass && eq.rhs == eq.norm_alpha && eq.lhs <= eq.norm_alpha, "alpha = beta");
  o.detail << "extremal ratio " << ext << ", " << count << " random cases, max ratio " << worst
           << ", alpha = beta ratio " << eq.ratio;
}

void c10(Outcome& o) {
  double worst_gap = 0.0, worst_routes = 0.0;
  int cases = 0;
  for (double p : {1.5, 2.0, 3.0}) {
    for (const auto& w : {one(1), Weight::monomial(Cone::orthant(1), {1.0}), Weight::monomial(Cone::orthant(1), {2.0})}) {
      const auto u = GaussianExtremal(w, p, 1.0).test_function();
      const Grid1D grid{w.degree() > 0 ? 0.0 : -8.0, 8.0, 4096};
      const auto r = entropy_chain(u, p, w, grid);
      o.require(r.pass, "chain pass");
      for (double g : {r.am_gm_gap, r.jensen_gap, r.byparts_gap, r.holder_gap, r.log_concavity_gap,
                       r.final_bound - r.I, r.ma_identity}) {
        worst_gap = std::max(worst_gap, std::abs(g));
      }
      worst_routes = std::max(worst_routes, std::abs(r.final_bound - deficit_p(u, p, w, RadialMethod{}).rhs));
      std::vector<double> res;
      for (int n : {256, 512, 1024, 2048}) {
        Grid1D gn = grid;
        gn.n = n;
        const auto src = Density1D::make(
            [&](double x) { return std::pow(u(PointView(&x, 1)), p); }, w, gn);
        res.push_back(monge_ampere_residual(brenier_map_1d(src, model_density(p, w, 4 * n)), p, r.C1));
      }
      for (std::size_t k = 1; k < res.size(); ++k) o.require(res[k] < res[k - 1], "MA residual decreasing");
      ++cases;
    }
  }
  o.require(worst_gap <= 1e-3, "tight chain");
  o.require(worst_routes <= 2e-3, "two routes");
  o.detail << cases << " extremals, worst gap " << worst_gap << ", final bound vs deficit rhs " << worst_routes;
}

void c11(Outcome& o) {
  // Extra runs over rough data, cones and all three solvers.
  TestFunction g;
  g.dimension = 2;
  g.value = [](PointView x) { return std::sin(2 * x[0]) + std::abs(x[1]) - 0.2 * x[0] * x[0]; };
  for (const auto& cone : {Cone::full_space(2), Cone::orthant(2, {true, false}), Cone::half_space({1.0, -1.0})}) {
    const auto f = sample_field(g, box(cone, -1, 3, 40));
    for (auto [p, m] : {std::pair{2.0, HopfLaxMethod::FastP2}, std::pair{1.5, HopfLaxMethod::Pruned},
                        std::pair{3.0, HopfLaxMethod::Naive}}) {
      g_tally.add(run_hopf_lax(f, p, {0.1, 0.2, 0.4, 0.8, 1.6}, m));
    }
  }
  o.require(g_tally.bad == 0, "monotonicity");
  double worst = 0.0;
  for (double p : {1.5, 2.0, 3.0}) {
    const auto gp = power_potential({0.0}, 0.8, conjugate(p), -1);
    for (int n : {100, 200, 400}) {
      const auto rule = box(Cone::full_space(1), -4, 4, n);
      const auto rep = c_transform_involution(gp, 0.5, p, rule);
      worst = std::max(worst, rep.max_abs_deviation / rule->spacing(0));
    }
  }
  o.require(worst <= 10.0, "involution");
  o.detail << g_tally.runs << " Hopf-Lax runs, " << g_tally.bad << " monotonicity violations, involution deviation <= "
           << worst << " h";
}

struct Criterion {
  int id;
  const char* title;
  double limit_s;
  std::function<void(Outcome&)> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> all = {
      {1, "sharp constant", 1.0, c1},
      {2, "radial identity", 10.0, c2},
      {3, "equality cases p > 1", 30.0, c3},
      {4, "inequality direction", 300.0, c4},
      {5, "scaling identity", 10.0, c5},
      {6, "p = 1 equality", 5.0, c6},
      {7, "Hopf-Lax closed forms", 120.0, c7},
      {8, "Hamilton-Jacobi residual", 120.0, c8},
      {9, "hypercontractivity", 300.0, c9},
      {10, "transport chain", 120.0, c10},
      {11, "monotonicity and involution", 60.0, c11},
  };
  int failed = 0;
  for (const auto& c : all) {
    Outcome o;
    const auto start = std::chrono::steady_clock::now();
    try {
      c.run(o);
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << "exception: " << e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (secs > c.limit_s) {
      o.pass = false;
      o.detail << "; over the time limit";
    }
    failed += o.pass ? 0 : 1;
    std::printf("criterion %2d %-28s %s  (%.2f s / %.0f s)  %s\n", c.id, c.title, o.pass ? "PASS" : "FAIL", secs,
                c.limit_s, o.detail.str().c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
