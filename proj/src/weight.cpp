#include "conelab/weight.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "conelab/error.hpp"

namespace conelab {

std::string_view to_string(WeightKind kind) noexcept {
  switch (kind) {
    case WeightKind::Constant: return "constant";
    case WeightKind::Monomial: return "monomial";
    case WeightKind::Custom: return "custom";
  }
  return "unknown";
}

Weight::Weight(Cone cone, WeightKind kind, double degree)
    : cone_(std::move(cone)), kind_(kind), degree_(degree) {}

Weight Weight::constant(Cone cone, double c) {
  if (!(c > 0.0) || !std::isfinite(c)) fail(ErrorKind::InvalidWeight, "constant weight must be positive");
  Weight w(std::move(cone), WeightKind::Constant, 0.0);
  w.constant_ = c;
  w.label_ = "constant";
  return w;
}

Weight Weight::monomial(Cone cone, std::vector<double> exponents) {
  if (static_cast<int>(exponents.size()) != cone.dimension()) {
    fail(ErrorKind::InvalidWeight, "monomial exponents must match the cone dimension");
  }
  double tau = 0.0;
  for (std::size_t i = 0; i < exponents.size(); ++i) {
    const double a = exponents[i];
    if (!(a >= 0.0) || !std::isfinite(a)) fail(ErrorKind::InvalidWeight, "monomial exponents must be >= 0");
    if (a > 0.0 && !cone.axis_positive(static_cast<int>(i))) {
      fail(ErrorKind::InvalidWeight,
           "monomial exponent on axis " + std::to_string(i) + " needs x_i > 0 on the cone");
    }
    tau += a;
  }
  if (tau == 0.0) return constant(std::move(cone), 1.0);
  Weight w(std::move(cone), WeightKind::Monomial, tau);
  w.exponents_ = std::move(exponents);
  w.label_ = "monomial";
  return w;
}

Weight Weight::custom(Cone cone, ValueFn value, GradientFn gradient, double degree, double tolerance,
                      std::string label) {
  if (!value || !gradient) fail(ErrorKind::InvalidWeight, "custom weight needs value and gradient callbacks");
  if (!(degree >= 0.0) || !std::isfinite(degree)) fail(ErrorKind::InvalidWeight, "degree must be >= 0");
  if (degree == 0.0) {
    fail(ErrorKind::InvalidWeight, "a log-concave weight of degree 0 is constant; use Weight::constant");
  }
  Weight w(std::move(cone), WeightKind::Custom, degree);
  w.value_fn_ = std::make_shared<const ValueFn>(std::move(value));
  w.gradient_fn_ = std::make_shared<const GradientFn>(std::move(gradient));
  w.tolerance_ = tolerance;
  w.label_ = std::move(label);
  return w;
}

double Weight::operator()(PointView x) const {
  if (!cone_.contains(x)) fail(ErrorKind::DomainError, "weight evaluated outside the open cone");
  switch (kind_) {
    case WeightKind::Constant: return constant_;
    case WeightKind::Monomial: {
      double v = 1.0;
      for (std::size_t i = 0; i < exponents_.size(); ++i) {
        if (exponents_[i] != 0.0) v *= std::pow(x[i], exponents_[i]);
      }
      return v;
    }
    case WeightKind::Custom: return (*value_fn_)(x);
  }
  return 0.0;
}

void Weight::gradient(PointView x, std::span<double> out) const {
  if (!cone_.contains(x)) fail(ErrorKind::DomainError, "weight gradient evaluated outside the open cone");
  switch (kind_) {
    case WeightKind::Constant: std::fill(out.begin(), out.end(), 0.0); return;
    case WeightKind::Monomial: {
      const double v = (*this)(x);
      for (std::size_t i = 0; i < exponents_.size(); ++i) {
        out[i] = exponents_[i] == 0.0 ? 0.0 : exponents_[i] * v / x[i];
      }
      return;
    }
    case WeightKind::Custom: (*gradient_fn_)(x, out); return;
  }
}

std::vector<double> Weight::gradient(PointView x) const {
  std::vector<double> g(x.size());
  gradient(x, g);
  return g;
}

std::string Weight::describe() const {
  std::ostringstream os;
  os << label_ << "(tau=" << degree_;
  if (kind_ == WeightKind::Constant) os << ", c=" << constant_;
  if (kind_ == WeightKind::Monomial) {
    os << ", a=[";
    for (std::size_t i = 0; i < exponents_.size(); ++i) os << (i ? "," : "") << exponents_[i];
    os << "]";
  }
  os << ") on " << cone_.describe();
  return os.str();
}

double euler_residual(const Weight& w, PointView x) {
  const double v = w(x);
  const auto g = w.gradient(x);
  return std::abs(dot(g, x) - w.degree() * v) / std::max(1.0, std::abs(v));
}

double homogeneity_residual(const Weight& w, PointView x, double lambda) {
  Point lx(x.begin(), x.end());
  for (double& c : lx) c *= lambda;
  const double expect = std::pow(lambda, w.degree()) * w(x);
  return std::abs(w(lx) - expect) / std::max(std::abs(expect), 1e-300);
}

namespace {

double checked_value(const Weight& w, PointView x) {
  const double v = w(x);
  if (!(v > 0.0) || !std::isfinite(v)) {
    fail(ErrorKind::InvalidWeight, "weight is not positive and finite at a sample point");
  }
  return v;
}

Point midpoint(PointView a, PointView b) {
  Point m(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) m[i] = 0.5 * (a[i] + b[i]);
  return m;
}

struct PairChecks {
  double log_concavity = 0.0;
  double tau_concavity = 0.0;
  double gradient_pairing = 0.0;
};

// Positive values are violations, already scaled to relative units.
PairChecks pair_violations(const Weight& w, PointView x, PointView y) {
  const double tau = w.degree();
  const double wx = checked_value(w, x);
  const double wy = checked_value(w, y);
  const auto gx = w.gradient(x);
  const double gy = dot(gx, y);

  PairChecks out;
  const double lhs = std::log(wy / wx);
  const double rhs = -tau + gy / wx;
  out.log_concavity = (lhs - rhs) / std::max({1.0, std::abs(lhs), std::abs(rhs)});
  out.gradient_pairing = -gy / std::max(1.0, norm(gx) * norm(y));

  const Point m = midpoint(x, y);
  if (tau > 0.0) {
    const double vx = std::pow(wx, 1.0 / tau);
    const double vy = std::pow(wy, 1.0 / tau);
    const double vm = std::pow(checked_value(w, m), 1.0 / tau);
    out.tau_concavity = (0.5 * (vx + vy) - vm) / std::max({1.0, vx, vy});
  } else {
    out.tau_concavity = std::abs(wy - wx) / std::max(1.0, std::abs(wx));
  }
  return out;
}

}  // namespace

WeightCertificate check_log_concavity(const Weight& w, int samples, std::uint64_t seed) {
  if (samples < 2) fail(ErrorKind::DomainError, "need at least 2 samples");
  const auto pts = sample_cone(w.cone(), 2 * static_cast<std::size_t>(samples), seed);
  const double tol = w.tolerance();

  WeightCertificate cert;
  cert.samples_used = samples;
  double worst_h = 0.0, worst_e = 0.0, worst_l = 0.0, worst_t = 0.0, worst_g = 0.0;
  for (int k = 0; k < samples; ++k) {
    const Point& x = pts[2 * k];
    const Point& y = pts[2 * k + 1];
    for (double lambda : {0.5, 2.0, 7.0}) worst_h = std::max(worst_h, homogeneity_residual(w, x, lambda));
    worst_e = std::max(worst_e, euler_residual(w, x));
    const auto pc = pair_violations(w, x, y);
    worst_l = std::max(worst_l, pc.log_concavity);
    worst_t = std::max(worst_t, pc.tau_concavity);
    worst_g = std::max(worst_g, pc.gradient_pairing);
  }
  cert.homogeneity_ok = worst_h <= tol;
  cert.euler_ok = worst_e <= tol;
  cert.log_concavity_ok = worst_l <= tol;
  cert.tau_concavity_ok = worst_t <= tol;
  cert.gradient_pairing_ok = worst_g <= tol;
  cert.worst_violation = std::max({0.0, worst_h, worst_e, worst_l, worst_t, worst_g});
  return cert;
}

bool check_tau_concavity(const Weight& w, int samples, std::uint64_t seed) {
  if (w.degree() == 0.0) fail(ErrorKind::DegreeZero, "tau = 0: use the constancy check instead");
  if (samples < 2) fail(ErrorKind::DomainError, "need at least 2 samples");
  const auto pts = sample_cone(w.cone(), 2 * static_cast<std::size_t>(samples), seed);
  for (int k = 0; k < samples; ++k) {
    if (pair_violations(w, pts[2 * k], pts[2 * k + 1]).tau_concavity > w.tolerance()) return false;
  }
  return true;
}

bool translation_invariant(const Weight& w, PointView x0, int samples, std::uint64_t seed, double rel_tol) {
  if (static_cast<int>(x0.size()) != w.dimension()) {
    fail(ErrorKind::DomainError, "shift dimension does not match the weight");
  }
  if (norm(x0) == 0.0) return true;
  const auto pts = sample_cone(w.cone(), static_cast<std::size_t>(samples), seed);
  Point shifted(x0.size()), back(x0.size());
  for (const auto& x : pts) {
    for (std::size_t i = 0; i < x.size(); ++i) {
      shifted[i] = x[i] + x0[i];
      back[i] = x[i] - x0[i];
    }
    // E + x0 = E is needed, not just inclusion, or mass leaks out of the cone.
    if (!w.cone().contains(shifted) || !w.cone().contains(back)) return false;
    const double a = w(x);
    const double b = w(shifted);
    if (std::abs(a - b) > rel_tol * std::max(std::abs(a), 1e-300)) return false;
  }
  return true;
}

}  // namespace conelab
