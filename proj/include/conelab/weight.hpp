#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "conelab/cone.hpp"

namespace conelab {

enum class WeightKind { Constant, Monomial, Custom };

std::string_view to_string(WeightKind kind) noexcept;

/// A positive weight on an open cone, homogeneous of degree tau >= 0.
///
/// Constant and monomial weights are analytic. A custom weight wraps user
/// callbacks for the value and the gradient together with a declared
/// degree; nothing about a custom weight is trusted until it has been run
/// through the validators below.
class Weight {
 public:
  using ValueFn = std::function<double(PointView)>;
  using GradientFn = std::function<void(PointView, std::span<double>)>;

  static Weight constant(Cone cone, double c = 1.0);
  /// prod_i x_i^{a_i}. Every axis with a_i > 0 must be positive on the cone.
  /// All-zero exponents collapse to the constant weight 1.
  static Weight monomial(Cone cone, std::vector<double> exponents);
  static Weight custom(Cone cone, ValueFn value, GradientFn gradient, double degree,
                       double tolerance = 1e-8, std::string label = "custom");

  [[nodiscard]] const Cone& cone() const noexcept { return cone_; }
  [[nodiscard]] int dimension() const noexcept { return cone_.dimension(); }
  [[nodiscard]] double degree() const noexcept { return degree_; }
  /// n + tau, the homogeneous dimension that appears in every constant.
  [[nodiscard]] double homogeneous_dimension() const noexcept { return dimension() + degree_; }
  [[nodiscard]] WeightKind kind() const noexcept { return kind_; }
  [[nodiscard]] bool analytic() const noexcept { return kind_ != WeightKind::Custom; }
  [[nodiscard]] double constant_value() const noexcept { return constant_; }
  [[nodiscard]] const std::vector<double>& exponents() const noexcept { return exponents_; }
  [[nodiscard]] double tolerance() const noexcept { return tolerance_; }
  [[nodiscard]] const std::string& label() const noexcept { return label_; }

  /// Throws DomainError outside the open cone.
  [[nodiscard]] double operator()(PointView x) const;
  void gradient(PointView x, std::span<double> out) const;
  [[nodiscard]] std::vector<double> gradient(PointView x) const;

  [[nodiscard]] std::string describe() const;

 private:
  Weight(Cone cone, WeightKind kind, double degree);

  Cone cone_;
  WeightKind kind_;
  double degree_ = 0.0;
  double constant_ = 1.0;
  std::vector<double> exponents_;
  std::shared_ptr<const ValueFn> value_fn_;
  std::shared_ptr<const GradientFn> gradient_fn_;
  double tolerance_ = 1e-8;
  std::string label_;
};

struct WeightCertificate {
  bool homogeneity_ok = false;
  bool euler_ok = false;
  bool log_concavity_ok = false;
  bool tau_concavity_ok = false;
  bool gradient_pairing_ok = false;
  double worst_violation = 0.0;
  int samples_used = 0;

  [[nodiscard]] bool all_ok() const noexcept {
    return homogeneity_ok && euler_ok && log_concavity_ok && tau_concavity_ok && gradient_pairing_ok;
  }
};

/// |grad w(x) . x - tau w(x)| / max(1, |w(x)|).
double euler_residual(const Weight& w, PointView x);

/// |w(lambda x) - lambda^tau w(x)| / max(|lambda^tau w(x)|, tiny).
double homogeneity_residual(const Weight& w, PointView x, double lambda);

/// Samples pairs (x, y) in E and checks
///   log(w(y)/w(x)) <= -tau + grad w(x).y / w(x)   and   grad w(x).y >= 0,
/// plus homogeneity at lambda in {0.5, 2, 7}, the Euler relation and the
/// 1/tau-concavity (or constancy when tau = 0) on the same point set.
WeightCertificate check_log_concavity(const Weight& w, int samples, std::uint64_t seed);

/// Midpoint concavity of w^{1/tau} on sampled pairs. Throws DegreeZero for tau = 0.
bool check_tau_concavity(const Weight& w, int samples, std::uint64_t seed);

/// Sampled check of w(x + x0) = w(x) with x, x + x0 and x - x0 in E.
bool translation_invariant(const Weight& w, PointView x0, int samples = 200, std::uint64_t seed = 7,
                           double rel_tol = 1e-10);

}  // namespace conelab
