#include "conelab/constants.hpp"

#include <boost/math/special_functions/digamma.hpp>
#include <cmath>

#include "conelab/error.hpp"
#include "conelab/quadrature.hpp"

namespace conelab {

double conjugate(double p) {
  if (!(p > 1.0)) fail(ErrorKind::DomainError, "conjugate exponent needs p > 1");
  return p / (p - 1.0);
}

SharpConstant sharp_constant(double p, const Weight& w) {
  SharpConstant sc;
  sc.p = p;
  sc.p_conj = conjugate(p);
  sc.n = w.dimension();
  sc.tau = w.degree();
  sc.ball_mass = cone_mass(w).ball_mass;
  const double m = w.homogeneous_dimension();
  const double log_value = std::log(p / m) + (p - 1.0) * (std::log(p - 1.0) - 1.0) -
                           (p / m) * (std::lgamma(m / sc.p_conj + 1.0) + std::log(sc.ball_mass));
  sc.value = std::exp(log_value);
  return sc;
}

ProofConstants proof_constants(double p, const Weight& w) {
  const double q = conjugate(p);
  const double m = w.homogeneous_dimension();
  const double tau = w.degree();
  const double omega_se = sphere_weight_mass(w);
  ProofConstants pc;
  pc.C1 = q / (omega_se * std::tgamma(m / q));
  pc.C2 = std::log(pc.C1) - m / q;
  pc.C4 = p * std::pow(m / q, 1.0 / q);
  // w(r theta) = r^tau w(theta): the integral splits into
  //   tau omega_SE Gamma(m/q) psi(m/q) / q^2  +  S_log Gamma(m/q) / q,
  // and C1 cancels the Gamma factors.
  const double radial = tau > 0.0 ? tau * boost::math::digamma(m / q) / q : 0.0;
  pc.C3 = pc.C2 + radial + sphere_weight_log_mass(w) / omega_se;
  return pc;
}

GaussianExtremal::GaussianExtremal(const Weight& w, double p, double lambda, Point x0)
    : cone_(w.cone()), p_(p), q_(conjugate(p)), lambda_(lambda), m_(w.homogeneous_dimension()), x0_(std::move(x0)) {
  if (!(lambda > 0.0)) fail(ErrorKind::DomainError, "Gaussian extremal needs lambda > 0");
  if (x0_.empty()) x0_.assign(static_cast<std::size_t>(w.dimension()), 0.0);
  if (static_cast<int>(x0_.size()) != w.dimension()) fail(ErrorKind::DomainError, "shift has wrong dimension");
  if (norm(x0_) > 0.0 && !translation_invariant(w, x0_)) {
    fail(ErrorKind::TranslationNotInvariant, "weight is not invariant under the requested shift");
  }
  const double mb = cone_mass(w).ball_mass;
  const double log_a = (m_ / q_) * std::log(lambda) - std::lgamma(m_ / q_ + 1.0) - std::log(mb);
  prefactor_ = std::exp(log_a / p);
}

double GaussianExtremal::operator()(PointView x) const {
  if (!cone_.contains(x)) fail(ErrorKind::DomainError, "Gaussian extremal evaluated outside the cone");
  double d2 = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) d2 += (x[i] + x0_[i]) * (x[i] + x0_[i]);
  return prefactor_ * std::exp(-lambda_ * std::pow(d2, 0.5 * q_) / p_);
}

TestFunction GaussianExtremal::test_function() const {
  TestFunction u;
  u.dimension = static_cast<int>(x0_.size());
  u.label = "gaussian_extremal";
  const double a = prefactor_, lam = lambda_, p = p_, q = q_;
  const Point x0 = x0_;
  u.value = [self = *this](PointView x) { return self(x); };
  u.gradient = [a, lam, p, q, x0](PointView x, std::span<double> out) {
    double d2 = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) d2 += (x[i] + x0[i]) * (x[i] + x0[i]);
    const double d = std::sqrt(d2);
    const double e = a * std::exp(-lam * std::pow(d, q) / p);
    const double f = d > 0.0 ? -(lam * q / p) * std::pow(d, q - 2.0) * e : 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = f * (x[i] + x0[i]);
  };
  if (norm(x0_) == 0.0) {
    u.radial = RadialForm{[a, lam, p, q](double r) { return a * std::exp(-lam * std::pow(r, q) / p); },
                          [a, lam, p, q](double r) {
                            return -(lam * q / p) * std::pow(r, q - 1.0) * a * std::exp(-lam * std::pow(r, q) / p);
                          }};
    u.tail = TailCertificate::gaussian(lam / p, q, a);
  } else {
    const double r0 = norm(x0_);
    const double rate = lam / (p * std::pow(2.0, q));
    u.tail = TailCertificate::gaussian(rate, q, a * std::exp(rate * std::pow(2.0 * r0, q)));
  }
  return u;
}

double GaussianExtremal::entropy_closed_form() const noexcept {
  return p_ * std::log(prefactor_) - m_ / q_;
}

double GaussianExtremal::gradient_energy_closed_form() const noexcept {
  return std::pow(lambda_, p_ - 1.0) * (m_ / q_) * std::pow(q_ / p_, p_);
}

IndicatorExtremal IndicatorExtremal::make(const Weight& w, double lambda, Point x0) {
  if (!(lambda > 0.0)) fail(ErrorKind::DomainError, "indicator extremal needs lambda > 0");
  if (x0.empty()) x0.assign(static_cast<std::size_t>(w.dimension()), 0.0);
  if (norm(x0) > 0.0 && !translation_invariant(w, x0)) {
    fail(ErrorKind::TranslationNotInvariant, "weight is not invariant under the requested shift");
  }
  IndicatorExtremal ie;
  ie.lambda = lambda;
  ie.x0 = std::move(x0);
  ie.height = std::pow(lambda, -w.homogeneous_dimension()) / cone_mass(w).ball_mass;
  return ie;
}

TestFunction IndicatorExtremal::test_function() const {
  TestFunction u;
  u.dimension = static_cast<int>(x0.size());
  u.label = "indicator_extremal";
  u.value = [h = height, lam = lambda, x0 = x0](PointView x) {
    double d2 = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) d2 += (x[i] + x0[i]) * (x[i] + x0[i]);
    return d2 < lam * lam ? h : 0.0;
  };
  u.tail = TailCertificate::compact(lambda + norm(x0));
  if (norm(x0) == 0.0) {
    u.radial = RadialForm{[h = height, lam = lambda](double r) { return r < lam ? h : 0.0; },
                          [](double) { return 0.0; }};
  }
  return u;
}

double hyper_extremal_rate(double p, double beta, double alpha, double t) {
  if (!(alpha > 0.0) || !(alpha < beta)) fail(ErrorKind::AlphaBetaOrder, "need 0 < alpha < beta");
  if (!(t > 0.0)) fail(ErrorKind::DomainError, "need t > 0");
  (void)conjugate(p);
  return std::pow((beta - alpha) / (beta * t), 1.0 / (p - 1.0));
}

TestFunction hyper_extremal_g(double p, double beta, double alpha, double t, Point x0, double C) {
  const double b0 = hyper_extremal_rate(p, beta, alpha, t);
  const double q = conjugate(p);
  TestFunction g;
  g.dimension = static_cast<int>(x0.size());
  g.label = "hyper_extremal";
  g.value = [b0, q, x0, C](PointView x) {
    double d2 = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) d2 += (x[i] + x0[i]) * (x[i] + x0[i]);
    return C - (b0 / q) * std::pow(d2, 0.5 * q);
  };
  g.gradient = [b0, q, x0](PointView x, std::span<double> out) {
    double d2 = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) d2 += (x[i] + x0[i]) * (x[i] + x0[i]);
    const double f = d2 > 0.0 ? -b0 * std::pow(d2, 0.5 * (q - 2.0)) : 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = f * (x[i] + x0[i]);
  };
  const double r0 = norm(x0);
  if (r0 == 0.0) {
    g.radial = RadialForm{[b0, q, C](double r) { return C - (b0 / q) * std::pow(r, q); },
                          [b0, q](double r) { return -b0 * std::pow(r, q - 1.0); }};
    g.tail = TailCertificate::gaussian(b0 / q, q, std::exp(C));
  } else {
    const double rate = b0 / (q * std::pow(2.0, q));
    g.tail = TailCertificate::gaussian(rate, q, std::exp(C + rate * std::pow(2.0 * r0, q)));
  }
  return g;
}

}  // namespace conelab
