#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "conelab/cone.hpp"
#include "conelab/weight.hpp"

namespace conelab {

/// Decay certificate for a function f on E: either f vanishes outside
/// B(0, radius), or |f(x)| <= constant * exp(-rate |x|^power).
struct TailCertificate {
  enum class Kind { CompactSupport, GaussianType };

  Kind kind = Kind::GaussianType;
  double radius = 0.0;
  double rate = 1.0;
  double power = 2.0;
  double constant = 1.0;

  static TailCertificate compact(double radius);
  static TailCertificate gaussian(double rate, double power, double constant = 1.0);

  /// Certificate for |f|^p given one for f.
  [[nodiscard]] TailCertificate pow(double p) const;
  /// Radius beyond which the bound is below eps relative to the constant;
  /// adds the fixed safety margin 2.0 for Gaussian-type tails.
  [[nodiscard]] double truncation_radius(double eps_tail = 1e-12) const;
};

/// Nodes and positive weights approximating
///   int_0^R f(r) r^{m-1} dr  ~=  sum_k weights[k] * f(nodes[k]).
///
/// compact: tanh-sinh on [0, R], which absorbs the algebraic endpoint
/// behaviour at r = 0 for non-integer m.
///
/// laguerre: for profiles with |f| <= C exp(-rate r^power), substitute
/// s = rate r^power and apply generalized Gauss-Laguerre with
/// alpha = m/power - 1 to f(r(s)) e^s. Exact when f is exp(-rate r^power)
/// times a polynomial in r^power, which covers the Gaussian extremals and
/// their entropy and gradient integrands. radius is the largest node.
struct RadialRule {
  std::vector<double> nodes;
  std::vector<double> weights;
  int order = 0;
  double radius = 0.0;
  double homogeneous_dimension = 0.0;

  static RadialRule compact(double m, double radius, int order = 201);
  static RadialRule laguerre(double m, double rate, double power, int order = 64);

  [[nodiscard]] double integrate(const std::function<double(double)>& f) const;
};

/// Options for radial integration of profiles with a tail certificate.
struct RadialMethod {
  int laguerre_order = 64;
  int compact_order = 201;
};

/// Cell-centred tensor grid over [lo, hi] (n <= 3) keeping only the
/// nodes whose centre lies strictly inside the cone.
class GridRule {
 public:
  GridRule(Cone cone, std::vector<double> lo, std::vector<double> hi, std::vector<int> n_per_axis);
  GridRule(Cone cone, std::vector<double> lo, std::vector<double> hi, int n_per_axis);

  [[nodiscard]] const Cone& cone() const noexcept { return cone_; }
  [[nodiscard]] int dimension() const noexcept { return cone_.dimension(); }
  [[nodiscard]] const std::vector<double>& lo() const noexcept { return lo_; }
  [[nodiscard]] const std::vector<double>& hi() const noexcept { return hi_; }
  [[nodiscard]] const std::vector<int>& counts() const noexcept { return counts_; }
  [[nodiscard]] double spacing(int axis) const noexcept { return spacing_[axis]; }
  [[nodiscard]] double max_spacing() const noexcept;
  [[nodiscard]] double cell_volume() const noexcept { return cell_volume_; }

  /// Number of full tensor cells (inside and outside the cone).
  [[nodiscard]] std::size_t tensor_size() const noexcept { return tensor_size_; }
  /// Flat tensor indices (axis 0 slowest) of the nodes inside the cone.
  [[nodiscard]] const std::vector<std::size_t>& inside() const noexcept { return inside_; }
  [[nodiscard]] std::size_t size() const noexcept { return inside_.size(); }
  /// Position in inside() of a tensor index, or npos when it is outside E.
  [[nodiscard]] std::size_t slot(std::size_t flat) const noexcept { return slot_[flat]; }
  [[nodiscard]] double total_weight() const noexcept { return cell_volume_ * static_cast<double>(size()); }

  [[nodiscard]] Point node(std::size_t flat) const;
  void node(std::size_t flat, std::span<double> out) const;
  [[nodiscard]] std::vector<int> multi_index(std::size_t flat) const;
  [[nodiscard]] std::size_t flat_index(std::span<const int> multi) const;
  [[nodiscard]] std::size_t stride(int axis) const noexcept { return strides_[axis]; }

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

 private:
  Cone cone_;
  std::vector<double> lo_, hi_, spacing_;
  std::vector<int> counts_;
  std::vector<std::size_t> strides_;
  std::size_t tensor_size_ = 0;
  double cell_volume_ = 0.0;
  std::vector<std::size_t> inside_;
  std::vector<std::size_t> slot_;
};

/// int_{B cap E} w and int_{S^{n-1} cap E} w; the second equals (n + tau)
/// times the first by homogeneity.
struct ConeMass {
  double ball_mass = 0.0;
  double sphere_mass = 0.0;
};

struct BallMassMethod {
  enum class Kind { RadialExact, Grid };
  Kind kind = Kind::RadialExact;
  int n_per_axis = 256;

  static BallMassMethod radial_exact() { return {}; }
  static BallMassMethod grid(int n) { return {Kind::Grid, n}; }
};

/// Closed forms for constant and monomial weights on the full space,
/// half-spaces and coordinate orthants; grid(N) integrates numerically
/// with sub-sampled boundary cells. UnsupportedClosedForm otherwise.
double ball_weight_mass(const Weight& w, BallMassMethod method = BallMassMethod::radial_exact());

/// (n + tau) * ball mass, taking the closed form when there is one and the
/// direct angular quadrature (n <= 3) otherwise.
double sphere_weight_mass(const Weight& w);

/// Independent route: integrates w over S^{n-1} cap E in angular
/// coordinates, splitting at every face crossing. n <= 3 only.
double sphere_weight_mass_direct(const Weight& w, int order = 121);

/// int_{S^{n-1} cap E} w log w. Closed form (digamma) for constant and
/// monomial weights on coordinate cones, angular quadrature otherwise.
double sphere_weight_log_mass(const Weight& w);

ConeMass cone_mass(const Weight& w);

/// A radially symmetric integrand f(|x|) with its decay certificate.
struct RadialProfile {
  std::function<double(double)> f;
  std::optional<TailCertificate> tail;
};

/// int_E f(|x|) w(x) dx = omega_SE * int_0^inf f(r) r^{n+tau-1} dr.
/// Throws TailUnbounded without a certificate.
double integrate_radial(const Weight& w, const RadialProfile& profile, RadialMethod method = {});

/// The one-dimensional factor int_0^inf f(r) r^{m-1} dr used above.
double integrate_radial_factor(double m, const RadialProfile& profile, RadialMethod method = {});

/// sum_k f(x_k) w(x_k) vol over the inside nodes in flat (axis-major)
/// order with compensated summation. NonFiniteSample on bad values.
double integrate_weighted(const Weight& w, const std::function<double(PointView)>& f, const GridRule& rule);

/// Same with f already sampled at rule.inside() (in that order).
double integrate_weighted(const Weight& w, std::span<const double> values, const GridRule& rule);

/// Weight values at the inside nodes of a rule.
std::vector<double> sample_weight(const Weight& w, const GridRule& rule);

/// Compensated (Neumaier) accumulator with a fixed left-to-right order.
class StableSum {
 public:
  void add(double v) noexcept;
  [[nodiscard]] double value() const noexcept { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

}  // namespace conelab
