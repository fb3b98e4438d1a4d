#include "conelab/hypercontractivity.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>

#include "conelab/constants.hpp"
#include "conelab/error.hpp"

namespace conelab {

namespace {

void check_exponents(double p, double alpha, double beta, double t_tilde) {
  if (!(p > 1.0)) fail(ErrorKind::DomainError, "hypercontractivity needs p > 1");
  if (!(alpha > 0.0) || !(beta > 0.0)) fail(ErrorKind::DomainError, "exponents must be positive");
  if (!(alpha <= beta)) fail(ErrorKind::AlphaBetaOrder, "need alpha <= beta");
  if (!(t_tilde > 0.0)) fail(ErrorKind::DomainError, "t_tilde must be positive");
}

HopfLaxMethod method_for(const HyperConfig& cfg) {
  if (cfg.options.method) return *cfg.options.method;
  return cfg.p == 2.0 ? HopfLaxMethod::FastP2 : HopfLaxMethod::Pruned;
}

int default_nodes(const HyperConfig& cfg) {
  if (cfg.options.nodes_per_axis > 0) return cfg.options.nodes_per_axis;
  switch (cfg.weight.dimension()) {
    case 1: return 2048;
    case 2: return cfg.p == 2.0 ? 400 : 240;
    default: return 48;
  }
}

std::shared_ptr<const GridRule> make_box(const Cone& cone, double half, int nodes) {
  const int n = cone.dimension();
  std::vector<double> lo(static_cast<std::size_t>(n), -half), hi(static_cast<std::size_t>(n), half);
  std::vector<int> counts(static_cast<std::size_t>(n), nodes);
  for (int a = 0; a < n; ++a) {
    // Axes the cone keeps positive only need [0, half].
    if (cone.axis_positive(a)) {
      lo[a] = 0.0;
      counts[a] = std::max(2, nodes / 2);
    }
  }
  return std::make_shared<const GridRule>(cone, lo, hi, counts);
}

// Fraction of sum e^{q v} w carried by nodes on a truncation edge or whose
// minimizer sits on one.
double edge_fraction(const GridField& f, const std::vector<std::size_t>* argmin, double q, const Weight& w) {
  const GridRule& rule = *f.rule;
  const auto wv = sample_weight(w, rule);
  double top = -INFINITY;
  for (double v : f.values) top = std::max(top, q * v);
  StableSum all, edge;
  for (std::size_t k = 0; k < f.values.size(); ++k) {
    const double c = std::exp(q * f.values[k] - top) * wv[k];
    all.add(c);
    const bool hit = on_truncation_boundary(rule, k) || (argmin && on_truncation_boundary(rule, (*argmin)[k]));
    if (hit) edge.add(c);
  }
  return all.value() > 0.0 ? edge.value() / all.value() : 1.0;
}

struct Evaluated {
  std::shared_ptr<const GridRule> rule;
  GridField g;
  ConvolutionResult q_tilde;
  double edge = 0.0;
  double half = 0.0;
  int nodes = 0;
};

double initial_half_width(const HyperConfig& cfg) {
  check_exponents(cfg.p, cfg.alpha, cfg.beta, cfg.t_tilde);
  if (cfg.g.dimension != cfg.weight.dimension()) fail(ErrorKind::DomainError, "g and the weight differ in dimension");
  if (!cfg.g.tail) fail(ErrorKind::NonIntegrable, "e^g has no tail certificate (" + cfg.g.label + ")");
  if (cfg.options.box_half_width > 0.0) return cfg.options.box_half_width;
  const auto t = cfg.g.tail->pow(cfg.alpha);
  return t.truncation_radius(1e-12 * t.constant);
}

Evaluated evaluate(const HyperConfig& cfg) {
  double half = initial_half_width(cfg);
  int nodes = default_nodes(cfg);
  const double h = 2.0 * half / nodes;
  for (int round = 0;; ++round) {
    Evaluated ev;
    ev.half = half;
    ev.nodes = nodes;
    ev.rule = make_box(cfg.weight.cone(), half, nodes);
    ev.g = sample_field(cfg.g, ev.rule);
    ev.q_tilde = inf_convolve(ev.g, cfg.t_tilde, cfg.p, method_for(cfg));
    ev.edge = std::max(edge_fraction(ev.g, nullptr, cfg.alpha, cfg.weight),
                       edge_fraction(ev.q_tilde.field, &ev.q_tilde.argmin, cfg.beta, cfg.weight));
    if (ev.edge <= cfg.options.edge_mass_tol) return ev;
    if (round >= cfg.options.max_enlargements) {
      fail(ErrorKind::NonIntegrable, "mass of e^g keeps reaching the truncation edge (fraction " +
                                         std::to_string(ev.edge) + ")");
    }
    half *= 1.5;
    nodes = static_cast<int>(std::ceil(2.0 * half / h));
  }
}

}  // namespace

double q_path(double alpha, double beta, double t_tilde, double t) {
  check_exponents(2.0, alpha, beta, t_tilde);
  if (!(t >= 0.0 && t <= t_tilde)) fail(ErrorKind::OutOfRange, "q_path needs 0 <= t <= t_tilde");
  if (alpha == beta) return alpha;
  return alpha * beta / ((alpha - beta) * t / t_tilde + beta);
}

double log_hyper_factor(double p, double alpha, double beta, double t_tilde, const Weight& w) {
  check_exponents(p, alpha, beta, t_tilde);
  if (alpha == beta) return 0.0;
  const double m = w.homogeneous_dimension();
  const double q = conjugate(p);
  const double ab = alpha * beta;
  const double mb = sharp_constant(p, w).ball_mass;
  const double log_k = (m / q) * std::log(q) + boost::math::lgamma(m / q + 1.0) + std::log(mb);
  return (m / p) * (beta - alpha) / ab * std::log((beta - alpha) / t_tilde) +
         (m / ab) * (alpha / p + beta / q) * std::log(alpha) - (m / ab) * (beta / p + alpha / q) * std::log(beta) +
         (alpha - beta) / ab * log_k;
}

double log_derivative_rhs(double p, double alpha, double beta, double t_tilde, const Weight& w, double t) {
  const double qt = q_path(alpha, beta, t_tilde, t);
  if (alpha == beta) return 0.0;
  const double m = w.homogeneous_dimension();
  // q'/q^2 is constant along the path.
  const double k = (beta - alpha) / (alpha * beta * t_tilde);
  const double qprime = k * qt * qt;
  const double L = sharp_constant(p, w).value;
  return (m / p) * k * std::log(L / (std::exp(1.0) * std::pow(p, p)) * m * qprime * std::pow(qt, p - 2.0));
}

double integrated_log_bound(double p, double alpha, double beta, double t_tilde, const Weight& w) {
  check_exponents(p, alpha, beta, t_tilde);
  if (alpha == beta) return 0.0;
  auto f = [&](double t) { return log_derivative_rhs(p, alpha, beta, t_tilde, w, t); };
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, 0.0, t_tilde, 15, 1e-14);
}

double exp_norm(const GridField& f, double q, const Weight& w) {
  if (!(q > 0.0)) fail(ErrorKind::DomainError, "norm exponent must be positive");
  double top = -INFINITY;
  for (double v : f.values) top = std::max(top, q * v);
  std::vector<double> shifted(f.values.size());
  for (std::size_t k = 0; k < shifted.size(); ++k) shifted[k] = std::exp(q * f.values[k] - top);
  const double mass = integrate_weighted(w, shifted, *f.rule);
  return std::exp((top + std::log(mass)) / q);
}

std::shared_ptr<const GridRule> hyper_grid(const HyperConfig& cfg) { return evaluate(cfg).rule; }

double hyper_rhs(const HyperConfig& cfg) {
  const auto ev = evaluate(cfg);
  return exp_norm(ev.g, cfg.alpha, cfg.weight) *
         std::exp(log_hyper_factor(cfg.p, cfg.alpha, cfg.beta, cfg.t_tilde, cfg.weight));
}

HyperReport hyper_check(const HyperConfig& cfg) {
  HyperReport rep;
  const Point origin(static_cast<std::size_t>(cfg.weight.dimension()), 0.0);
  rep.membership =
      membership_F_t0(cfg.g, cfg.t_tilde, cfg.p, origin, make_box(cfg.weight.cone(), initial_half_width(cfg), default_nodes(cfg)))
          .result;
  if (rep.membership == Membership::Indeterminate) {
    fail(ErrorKind::MembershipIndeterminate, "cannot decide whether g belongs to F_t for t = t_tilde");
  }
  if (rep.membership == Membership::False) fail(ErrorKind::DomainError, "g is not in F_t for t = t_tilde");

  const auto ev = evaluate(cfg);
  rep.eps = cfg.options.eps;
  rep.edge_mass_fraction = ev.edge;
  rep.box_half_width = ev.half;
  rep.nodes_per_axis = ev.nodes;

  rep.norm_alpha = exp_norm(ev.g, cfg.alpha, cfg.weight);
  rep.lhs = exp_norm(ev.q_tilde.field, cfg.beta, cfg.weight);
  rep.rhs = rep.norm_alpha * std::exp(log_hyper_factor(cfg.p, cfg.alpha, cfg.beta, cfg.t_tilde, cfg.weight));
  rep.ratio = rep.lhs / rep.rhs;

  const int k = std::max(0, cfg.options.trace_points);
  rep.F_trace.push_back({0.0, cfg.alpha, rep.norm_alpha});
  for (int i = 1; i <= k; ++i) {
    const double t = cfg.t_tilde * i / (k + 1);
    const double qt = q_path(cfg.alpha, cfg.beta, cfg.t_tilde, t);
    const auto qg = inf_convolve(ev.g, t, cfg.p, method_for(cfg));
    rep.F_trace.push_back({t, qt, exp_norm(qg.field, qt, cfg.weight)});
  }
  rep.F_trace.push_back({cfg.t_tilde, cfg.beta, rep.lhs});

  bool finite = std::isfinite(rep.ratio);
  for (const auto& tp : rep.F_trace) finite = finite && std::isfinite(tp.F);
  rep.pass = finite && rep.ratio <= 1.0 + rep.eps;
  return rep;
}

LogDerivativeReport log_derivative_bound(const HyperConfig& cfg, double t, double dt) {
  if (!(dt > 0.0) || t - 2.0 * dt < 0.0 || t + 2.0 * dt > cfg.t_tilde) {
    fail(ErrorKind::OutOfRange, "t +- 2 dt must stay inside [0, t_tilde]");
  }
  const auto ev = evaluate(cfg);
  auto logF = [&](double s) {
    const auto qg = inf_convolve(ev.g, s, cfg.p, method_for(cfg));
    return std::log(exp_norm(qg.field, q_path(cfg.alpha, cfg.beta, cfg.t_tilde, s), cfg.weight));
  };
  LogDerivativeReport rep;
  rep.t = t;
  const double d1 = (logF(t + dt) - logF(t - dt)) / (2.0 * dt);
  const double d2 = (logF(t + 2.0 * dt) - logF(t - 2.0 * dt)) / (4.0 * dt);
  rep.lhs = d1;
  rep.noise = std::abs(d1 - d2);
  rep.rhs = log_derivative_rhs(cfg.p, cfg.alpha, cfg.beta, cfg.t_tilde, cfg.weight, t);
  const double tol = cfg.options.eps * (1.0 + std::abs(rep.rhs));
  if (rep.noise > tol) {
    fail(ErrorKind::StepTooCoarse, "finite-difference noise " + std::to_string(rep.noise) + " exceeds " +
                                       std::to_string(tol));
  }
  rep.ok = rep.lhs <= rep.rhs + tol + rep.noise;
  return rep;
}

}  // namespace conelab
