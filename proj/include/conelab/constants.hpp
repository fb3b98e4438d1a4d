#pragma once

#include "conelab/test_function.hpp"
#include "conelab/weight.hpp"

namespace conelab {

/// p' = p / (p - 1).
double conjugate(double p);

struct SharpConstant {
  double p = 0.0;
  double p_conj = 0.0;
  int n = 0;
  double tau = 0.0;
  double ball_mass = 0.0;
  double value = 0.0;
};

/// L = (p/m) ((p-1)/e)^{p-1} (Gamma(m/p' + 1) M_B)^{-p/m}, m = n + tau.
SharpConstant sharp_constant(double p, const Weight& w);

struct ProofConstants {
  double C1 = 0.0;
  double C2 = 0.0;
  double C3 = 0.0;
  double C4 = 0.0;
};

/// C1 = p' / (omega_SE Gamma(m/p')), C2 = log C1 - m/p',
/// C3 = C2 + C1 int_E e^{-|y|^{p'}} w log w, C4 = p (m/p')^{1/p'}.
/// The C3 integral splits into a radial digamma term and the angular
/// log-mass, so it is exact for built-in weights.
ProofConstants proof_constants(double p, const Weight& w);

/// u(x) = A^{1/p} exp(-lambda |x + x0|^{p'} / p) with
/// A = lambda^{m/p'} / (Gamma(m/p' + 1) M_B), normalized in L^p(w; E).
/// A nonzero x0 is only accepted for weights that pass the sampled
/// translation-invariance test (TranslationNotInvariant otherwise).
class GaussianExtremal {
 public:
  GaussianExtremal(const Weight& w, double p, double lambda, Point x0 = {});

  [[nodiscard]] double p() const noexcept { return p_; }
  [[nodiscard]] double lambda() const noexcept { return lambda_; }
  [[nodiscard]] const Point& shift() const noexcept { return x0_; }
  /// A^{1/p}, the value at x = -x0.
  [[nodiscard]] double prefactor() const noexcept { return prefactor_; }

  /// DomainError outside the cone.
  [[nodiscard]] double operator()(PointView x) const;
  [[nodiscard]] TestFunction test_function() const;

  /// log A - m/p'.
  [[nodiscard]] double entropy_closed_form() const noexcept;
  /// lambda^{p-1} (m/p') (p'/p)^p.
  [[nodiscard]] double gradient_energy_closed_form() const noexcept;

 private:
  Cone cone_;
  double p_, q_, lambda_, m_;
  Point x0_;
  double prefactor_;
};

/// Normalized indicator of B(-x0, lambda) cap E with height
/// lambda^{-m} / M_B.
struct IndicatorExtremal {
  double lambda = 1.0;
  Point x0;
  double height = 0.0;

  static IndicatorExtremal make(const Weight& w, double lambda, Point x0 = {});
  [[nodiscard]] TestFunction test_function() const;
};

/// g(x) = C - (1/p') ((beta - alpha) / (beta t))^{1/(p-1)} |x + x0|^{p'}.
/// AlphaBetaOrder unless 0 < alpha < beta; t must be positive. The tail
/// certificate bounds e^g.
TestFunction hyper_extremal_g(double p, double beta, double alpha, double t, Point x0, double C = 0.0);

/// Coefficient b0 = ((beta - alpha) / (beta t))^{1/(p-1)} of the above.
double hyper_extremal_rate(double p, double beta, double alpha, double t);

}  // namespace conelab
