#include "conelab/quadrature.hpp"

#include <algorithm>
#include <boost/math/special_functions/digamma.hpp>
#include <cmath>
#include <numbers>
#include <numeric>

#include "conelab/error.hpp"

namespace conelab {

namespace {

constexpr double kHalfPi = std::numbers::pi / 2.0;

// exp(2u) based complements keep full relative precision near both ends.
double one_minus_tanh(double u) { return 2.0 / (1.0 + std::exp(2.0 * u)); }
double one_plus_tanh(double u) { return 2.0 / (1.0 + std::exp(-2.0 * u)); }

}  // namespace

void StableSum::add(double v) noexcept {
  const double t = sum_ + v;
  if (std::abs(sum_) >= std::abs(v)) {
    comp_ += (sum_ - t) + v;
  } else {
    comp_ += (v - t) + sum_;
  }
  sum_ = t;
}

// ---------------------------------------------------------------- tails

TailCertificate TailCertificate::compact(double radius) {
  if (!(radius > 0.0)) fail(ErrorKind::TailUnbounded, "support radius must be positive");
  TailCertificate t;
  t.kind = Kind::CompactSupport;
  t.radius = radius;
  return t;
}

TailCertificate TailCertificate::gaussian(double rate, double power, double constant) {
  if (!(rate > 0.0) || !(power > 0.0) || !(constant > 0.0)) {
    fail(ErrorKind::TailUnbounded, "Gaussian-type tail needs positive rate, power and constant");
  }
  TailCertificate t;
  t.kind = Kind::GaussianType;
  t.rate = rate;
  t.power = power;
  t.constant = constant;
  return t;
}

TailCertificate TailCertificate::pow(double p) const {
  TailCertificate t = *this;
  if (kind == Kind::GaussianType) {
    t.rate = rate * p;
    t.constant = std::pow(constant, p);
  }
  return t;
}

double TailCertificate::truncation_radius(double eps_tail) const {
  if (kind == Kind::CompactSupport) return radius;
  const double logs = std::max(0.0, std::log(constant / eps_tail));
  return std::pow(logs / rate, 1.0 / power) + 2.0;
}

// ---------------------------------------------------------------- radial rules

RadialRule RadialRule::compact(double m, double radius, int order) {
  if (order < 3) fail(ErrorKind::DomainError, "radial rule order must be >= 3");
  if (!(radius > 0.0)) fail(ErrorKind::DomainError, "radial rule radius must be positive");
  RadialRule rule;
  rule.order = order;
  rule.radius = radius;
  rule.homogeneous_dimension = m;
  const double tmax = 3.2;
  const double h = 2.0 * tmax / (order - 1);
  double prev = 0.0;
  for (int k = 0; k < order; ++k) {
    const double t = -tmax + k * h;
    const double u = kHalfPi * std::sinh(t);
    const double r = t < 0.0 ? 0.5 * radius * one_plus_tanh(u) : radius - 0.5 * radius * one_minus_tanh(u);
    if (!(r > prev) || !(r < radius)) continue;
    const double sech = 2.0 / (std::exp(u) + std::exp(-u));
    const double jac = 0.5 * radius * sech * sech * kHalfPi * std::cosh(t);
    const double w = h * jac * std::pow(r, m - 1.0);
    if (!(w > 0.0)) continue;
    rule.nodes.push_back(r);
    rule.weights.push_back(w);
    prev = r;
  }
  return rule;
}

RadialRule RadialRule::laguerre(double m, double rate, double power, int order) {
  if (order < 2 || order > 150) fail(ErrorKind::DomainError, "Laguerre order must be in [2, 150]");
  if (!(rate > 0.0) || !(power > 0.0)) fail(ErrorKind::DomainError, "invalid Laguerre substitution");
  const double alpha = m / power - 1.0;
  if (!(alpha > -1.0)) fail(ErrorKind::DomainError, "Laguerre exponent must exceed -1");
  RadialRule rule;
  rule.order = order;
  rule.homogeneous_dimension = m;
  const int n = order;
  const double log_norm = std::lgamma(alpha + n) - std::lgamma(static_cast<double>(n));
  const double scale = std::pow(rate, -m / power) / power;
  std::vector<double> s(static_cast<std::size_t>(n));
  double z = 0.0;
  for (int i = 0; i < n; ++i) {
    // Asymptotic initial guesses followed by Newton on the three-term recurrence.
    if (i == 0) {
      z = (1.0 + alpha) * (3.0 + 0.92 * alpha) / (1.0 + 2.4 * n + 1.8 * alpha);
    } else if (i == 1) {
      z += (15.0 + 6.25 * alpha) / (1.0 + 0.9 * alpha + 2.5 * n);
    } else {
      const double ai = i - 1;
      z += ((1.0 + 2.55 * ai) / (1.9 * ai) + 1.26 * ai * alpha / (1.0 + 3.5 * ai)) * (z - s[i - 2]) /
           (1.0 + 0.3 * alpha);
    }
    double p1 = 0.0, p2 = 0.0, pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      p1 = 1.0;
      p2 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = ((2.0 * j + 1.0 + alpha - z) * p2 - (j + alpha) * p3) / (j + 1.0);
      }
      pp = (n * p1 - (n + alpha) * p2) / z;
      const double z1 = z;
      z = z1 - p1 / pp;
      if (std::abs(z - z1) <= 1e-15 * std::max(1.0, std::abs(z))) break;
    }
    s[i] = z;
    // Weight times e^{s}, assembled in log space to keep the far nodes finite.
    const double log_w = log_norm - std::log(std::abs(pp * n * p2)) + z;
    const double r = std::pow(z / rate, 1.0 / power);
    if (i > 0 && !(r > rule.nodes.back())) fail(ErrorKind::DomainError, "Laguerre nodes failed to separate");
    rule.nodes.push_back(r);
    rule.weights.push_back(scale * std::exp(log_w));
  }
  rule.radius = rule.nodes.back();
  return rule;
}

double RadialRule::integrate(const std::function<double(double)>& f) const {
  StableSum s;
  for (std::size_t k = 0; k < nodes.size(); ++k) s.add(weights[k] * f(nodes[k]));
  return s.value();
}

double integrate_radial_factor(double m, const RadialProfile& profile, RadialMethod method) {
  if (!profile.tail) fail(ErrorKind::TailUnbounded, "radial integrand has no tail certificate");
  const TailCertificate& tail = *profile.tail;
  const RadialRule rule = tail.kind == TailCertificate::Kind::CompactSupport
                              ? RadialRule::compact(m, tail.radius, method.compact_order)
                              : RadialRule::laguerre(m, tail.rate, tail.power, method.laguerre_order);
  const double total = rule.integrate(profile.f);
  if (!std::isfinite(total)) fail(ErrorKind::NonFiniteSample, "radial integrand is not finite");
  return total;
}

// ---------------------------------------------------------------- grid rules

GridRule::GridRule(Cone cone, std::vector<double> lo, std::vector<double> hi, std::vector<int> n_per_axis)
    : cone_(std::move(cone)), lo_(std::move(lo)), hi_(std::move(hi)), counts_(std::move(n_per_axis)) {
  const int n = cone_.dimension();
  if (n > 3) fail(ErrorKind::DomainError, "grid rules are limited to n <= 3");
  if (static_cast<int>(lo_.size()) != n || static_cast<int>(hi_.size()) != n ||
      static_cast<int>(counts_.size()) != n) {
    fail(ErrorKind::DomainError, "grid box does not match the cone dimension");
  }
  spacing_.resize(n);
  strides_.resize(n);
  cell_volume_ = 1.0;
  tensor_size_ = 1;
  for (int i = n - 1; i >= 0; --i) {
    if (counts_[i] < 1) fail(ErrorKind::DomainError, "grid needs at least one cell per axis");
    if (!(hi_[i] > lo_[i])) fail(ErrorKind::DomainError, "grid box must have hi > lo");
    spacing_[i] = (hi_[i] - lo_[i]) / counts_[i];
    cell_volume_ *= spacing_[i];
    strides_[i] = tensor_size_;
    tensor_size_ *= static_cast<std::size_t>(counts_[i]);
  }
  slot_.assign(tensor_size_, npos);
  Point x(static_cast<std::size_t>(n));
  for (std::size_t flat = 0; flat < tensor_size_; ++flat) {
    node(flat, x);
    if (cone_.contains(x)) {
      slot_[flat] = inside_.size();
      inside_.push_back(flat);
    }
  }
  if (inside_.empty()) fail(ErrorKind::EmptyDomain, "no grid node lies inside the cone");
}

GridRule::GridRule(Cone cone, std::vector<double> lo, std::vector<double> hi, int n_per_axis)
    : GridRule(cone, std::move(lo), std::move(hi),
               std::vector<int>(static_cast<std::size_t>(cone.dimension()), n_per_axis)) {}

double GridRule::max_spacing() const noexcept { return *std::max_element(spacing_.begin(), spacing_.end()); }

void GridRule::node(std::size_t flat, std::span<double> out) const {
  for (int i = 0; i < dimension(); ++i) {
    const std::size_t k = (flat / strides_[i]) % static_cast<std::size_t>(counts_[i]);
    out[i] = lo_[i] + (static_cast<double>(k) + 0.5) * spacing_[i];
  }
}

Point GridRule::node(std::size_t flat) const {
  Point x(static_cast<std::size_t>(dimension()));
  node(flat, x);
  return x;
}

std::vector<int> GridRule::multi_index(std::size_t flat) const {
  std::vector<int> idx(static_cast<std::size_t>(dimension()));
  for (int i = 0; i < dimension(); ++i) {
    idx[i] = static_cast<int>((flat / strides_[i]) % static_cast<std::size_t>(counts_[i]));
  }
  return idx;
}

std::size_t GridRule::flat_index(std::span<const int> multi) const {
  std::size_t flat = 0;
  for (int i = 0; i < dimension(); ++i) flat += static_cast<std::size_t>(multi[i]) * strides_[i];
  return flat;
}

std::vector<double> sample_weight(const Weight& w, const GridRule& rule) {
  std::vector<double> out(rule.size());
  Point x(static_cast<std::size_t>(rule.dimension()));
  for (std::size_t k = 0; k < rule.size(); ++k) {
    rule.node(rule.inside()[k], x);
    out[k] = w(x);
  }
  return out;
}

double integrate_weighted(const Weight& w, const std::function<double(PointView)>& f, const GridRule& rule) {
  StableSum s;
  Point x(static_cast<std::size_t>(rule.dimension()));
  for (std::size_t flat : rule.inside()) {
    rule.node(flat, x);
    const double fv = f(x);
    const double wv = w(x);
    if (!std::isfinite(fv) || !std::isfinite(wv)) {
      fail(ErrorKind::NonFiniteSample, "integrand or weight is not finite at a grid node");
    }
    s.add(fv * wv);
  }
  return s.value() * rule.cell_volume();
}

double integrate_weighted(const Weight& w, std::span<const double> values, const GridRule& rule) {
  if (values.size() != rule.size()) fail(ErrorKind::DomainError, "sample count does not match the rule");
  StableSum s;
  Point x(static_cast<std::size_t>(rule.dimension()));
  for (std::size_t k = 0; k < rule.size(); ++k) {
    rule.node(rule.inside()[k], x);
    const double wv = w(x);
    if (!std::isfinite(values[k]) || !std::isfinite(wv)) {
      fail(ErrorKind::NonFiniteSample, "integrand or weight is not finite at a grid node");
    }
    s.add(values[k] * wv);
  }
  return s.value() * rule.cell_volume();
}

// ---------------------------------------------------------------- cone masses

namespace {

bool closed_form_available(const Weight& w) {
  if (w.kind() == WeightKind::Custom) return false;
  if (w.cone().coordinate_mask()) return true;
  return w.kind() == WeightKind::Constant && w.cone().kind() == ConeKind::HalfSpace;
}

double ball_mass_closed_form(const Weight& w) {
  const int n = w.dimension();
  const double m = w.homogeneous_dimension();
  if (w.kind() == WeightKind::Constant && w.cone().kind() == ConeKind::HalfSpace &&
      !w.cone().coordinate_mask()) {
    return 0.5 * w.constant_value() * std::exp(0.5 * n * std::log(std::numbers::pi) - std::lgamma(0.5 * n + 1.0));
  }
  const auto mask = w.cone().coordinate_mask();
  if (!mask || w.kind() == WeightKind::Custom) {
    fail(ErrorKind::UnsupportedClosedForm, "no closed-form ball mass for " + w.describe());
  }
  double log_mass = -std::lgamma(0.5 * m + 1.0);
  for (int i = 0; i < n; ++i) {
    const double a = w.kind() == WeightKind::Monomial ? w.exponents()[i] : 0.0;
    log_mass += std::lgamma(0.5 * (a + 1.0));
    if ((*mask)[i]) log_mass -= std::numbers::ln2;
  }
  const double c = w.kind() == WeightKind::Constant ? w.constant_value() : 1.0;
  return c * std::exp(log_mass);
}

double safe_weight(const Weight& w, PointView x) { return w.cone().contains(x) ? w(x) : 0.0; }

// Grid integration of w over B cap E; cells cut by the sphere or by a cone
// face are refined by an M^n sub-grid.
double ball_mass_grid(const Weight& w, int n_per_axis) {
  const int n = w.dimension();
  const auto mask = w.cone().coordinate_mask();
  std::vector<double> lo(static_cast<std::size_t>(n), -1.0), hi(static_cast<std::size_t>(n), 1.0);
  if (mask) {
    for (int i = 0; i < n; ++i) {
      if ((*mask)[i]) lo[i] = 0.0;
    }
  }
  std::vector<int> counts(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) counts[i] = mask && (*mask)[i] ? n_per_axis / 2 : n_per_axis;
  for (int& c : counts) c = std::max(c, 1);

  // Tensor cells including those whose centre falls outside E.
  std::vector<double> h(static_cast<std::size_t>(n));
  std::size_t total = 1;
  for (int i = 0; i < n; ++i) {
    h[i] = (hi[i] - lo[i]) / counts[i];
    total *= static_cast<std::size_t>(counts[i]);
  }
  const int sub = n == 1 ? 256 : (n == 2 ? 32 : 8);
  const auto& cone = w.cone();
  auto inside = [&](PointView x) { return cone.boundary_distance(x) >= 0.0 && norm(x) <= 1.0; };

  StableSum s;
  Point c(static_cast<std::size_t>(n)), y(static_cast<std::size_t>(n));
  std::vector<int> idx(static_cast<std::size_t>(n));
  for (std::size_t flat = 0; flat < total; ++flat) {
    std::size_t rem = flat;
    for (int i = n - 1; i >= 0; --i) {
      idx[i] = static_cast<int>(rem % static_cast<std::size_t>(counts[i]));
      rem /= static_cast<std::size_t>(counts[i]);
      c[i] = lo[i] + (idx[i] + 0.5) * h[i];
    }
    int in_count = 0;
    const int corners = 1 << n;
    for (int mbits = 0; mbits < corners; ++mbits) {
      for (int i = 0; i < n; ++i) y[i] = c[i] + ((mbits >> i) & 1 ? 0.5 : -0.5) * h[i];
      in_count += inside(y) ? 1 : 0;
    }
    const bool centre_in = cone.contains(c) && norm(c) <= 1.0;
    double cell_vol = 1.0;
    for (int i = 0; i < n; ++i) cell_vol *= h[i];
    if (in_count == corners && centre_in) {
      s.add(w(c) * cell_vol);
    } else if (in_count > 0 || centre_in) {
      std::size_t subtotal = 1;
      for (int i = 0; i < n; ++i) subtotal *= static_cast<std::size_t>(sub);
      StableSum cell;
      for (std::size_t sf = 0; sf < subtotal; ++sf) {
        std::size_t r2 = sf;
        for (int i = 0; i < n; ++i) {
          const int k = static_cast<int>(r2 % static_cast<std::size_t>(sub));
          r2 /= static_cast<std::size_t>(sub);
          y[i] = c[i] - 0.5 * h[i] + (k + 0.5) * h[i] / sub;
        }
        if (norm(y) <= 1.0) cell.add(safe_weight(w, y));
      }
      s.add(cell.value() * cell_vol / static_cast<double>(subtotal));
    }
  }
  return s.value();
}

// Critical azimuths in [0, 2pi) where a face plane crosses the circle
// {(rho cos phi, rho sin phi, z)}.
std::vector<double> azimuth_breaks(const Cone& cone, double rho, double z) {
  std::vector<double> out{0.0, 2.0 * std::numbers::pi};
  for (const auto& f : cone.faces()) {
    const double a = f[0];
    const double b = f[1];
    const double c = f.size() > 2 ? f[2] : 0.0;
    const double amp = std::hypot(a, b);
    if (amp < 1e-15 || rho <= 0.0) continue;
    const double kappa = -c * z / (rho * amp);
    if (std::abs(kappa) >= 1.0) continue;
    const double phi0 = std::atan2(b, a);
    const double d = std::acos(kappa);
    for (double phi : {phi0 + d, phi0 - d}) {
      phi = std::fmod(phi, 2.0 * std::numbers::pi);
      if (phi < 0.0) phi += 2.0 * std::numbers::pi;
      out.push_back(phi);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

// Integral over [a, b] by tanh-sinh.
template <class F>
double interval_integral(double a, double b, const RadialRule& unit_rule, F&& f) {
  StableSum s;
  const double len = b - a;
  for (std::size_t k = 0; k < unit_rule.nodes.size(); ++k) s.add(unit_rule.weights[k] * f(a + len * unit_rule.nodes[k]));
  return s.value() * len;
}

template <class G>
double circle_integral(const Weight& w, double rho, double z, const RadialRule& unit_rule, G&& transform) {
  const auto& cone = w.cone();
  const int n = cone.dimension();
  const auto breaks = azimuth_breaks(cone, rho, z);
  double total = 0.0;
  Point x(static_cast<std::size_t>(n));
  auto at = [&](double phi) -> Point& {
    x[0] = rho * std::cos(phi);
    x[1] = rho * std::sin(phi);
    if (n == 3) x[2] = z;
    return x;
  };
  for (std::size_t k = 0; k + 1 < breaks.size(); ++k) {
    const double a = breaks[k];
    const double b = breaks[k + 1];
    if (b - a < 1e-15) continue;
    if (!cone.contains(at(0.5 * (a + b)))) continue;
    total += interval_integral(a, b, unit_rule, [&](double phi) { return transform(safe_weight(w, at(phi))); });
  }
  return total;
}

template <class G>
double angular_integral(const Weight& w, int order, G&& transform) {
  const auto& cone = w.cone();
  const int n = cone.dimension();
  if (n > 3) fail(ErrorKind::UnsupportedClosedForm, "angular quadrature is limited to n <= 3");
  if (n == 1) {
    double s = 0.0;
    for (double v : {-1.0, 1.0}) {
      const Point x{v};
      if (cone.contains(x)) s += transform(w(x));
    }
    return s;
  }
  const RadialRule unit_rule = RadialRule::compact(1.0, 1.0, order);
  if (n == 2) return circle_integral(w, 1.0, 0.0, unit_rule, transform);

  std::vector<double> zb{-1.0, 0.0, 1.0};
  const auto& faces = cone.faces();
  for (std::size_t i = 0; i < faces.size(); ++i) {
    const auto& f = faces[i];
    const double amp = std::hypot(f[0], f[1]);
    if (amp > 1e-15 && std::abs(f[2]) > 1e-15) {
      zb.push_back(amp);
      zb.push_back(-amp);
    }
    for (std::size_t j = i + 1; j < faces.size(); ++j) {
      const auto& g = faces[j];
      const double cx = f[1] * g[2] - f[2] * g[1];
      const double cy = f[2] * g[0] - f[0] * g[2];
      const double cz = f[0] * g[1] - f[1] * g[0];
      const double len = std::sqrt(cx * cx + cy * cy + cz * cz);
      if (len > 1e-15) {
        zb.push_back(cz / len);
        zb.push_back(-cz / len);
      }
    }
  }
  std::sort(zb.begin(), zb.end());
  zb.erase(std::unique(zb.begin(), zb.end(), [](double a, double b) { return std::abs(a - b) < 1e-14; }),
           zb.end());
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < zb.size(); ++k) {
    const double a = std::max(-1.0, zb[k]);
    const double b = std::min(1.0, zb[k + 1]);
    if (b - a < 1e-15) continue;
    total += interval_integral(a, b, unit_rule, [&](double z) {
      const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
      return circle_integral(w, rho, z, unit_rule, transform);
    });
  }
  return total;
}

}  // namespace

double ball_weight_mass(const Weight& w, BallMassMethod method) {
  if (method.kind == BallMassMethod::Kind::Grid) return ball_mass_grid(w, method.n_per_axis);
  if (!closed_form_available(w)) {
    fail(ErrorKind::UnsupportedClosedForm, "no closed-form ball mass for " + w.describe());
  }
  return ball_mass_closed_form(w);
}

double sphere_weight_mass_direct(const Weight& w, int order) {
  return angular_integral(w, order, [](double v) { return v; });
}

double sphere_weight_mass(const Weight& w) {
  if (closed_form_available(w)) return w.homogeneous_dimension() * ball_mass_closed_form(w);
  return sphere_weight_mass_direct(w);
}

ConeMass cone_mass(const Weight& w) {
  ConeMass cm;
  cm.sphere_mass = sphere_weight_mass(w);
  cm.ball_mass = closed_form_available(w) ? ball_mass_closed_form(w) : cm.sphere_mass / w.homogeneous_dimension();
  return cm;
}

double sphere_weight_log_mass(const Weight& w) {
  if (w.kind() == WeightKind::Constant) return sphere_weight_mass(w) * std::log(w.constant_value());
  const auto mask = w.cone().coordinate_mask();
  if (w.kind() == WeightKind::Monomial && mask) {
    const int n = w.dimension();
    const double m = w.homogeneous_dimension();
    const double tau = w.degree();
    // Gaussian moments: int_E w log w e^{-|x|^2} split into radial and angular parts.
    double log_prod = 0.0;
    for (int i = 0; i < n; ++i) {
      log_prod += std::lgamma(0.5 * (w.exponents()[i] + 1.0));
      if ((*mask)[i]) log_prod -= std::numbers::ln2;
    }
    const double prod = std::exp(log_prod);
    double gauss_log_moment = 0.0;
    for (int j = 0; j < n; ++j) {
      const double a = w.exponents()[j];
      if (a != 0.0) gauss_log_moment += a * 0.5 * boost::math::digamma(0.5 * (a + 1.0)) * prod;
    }
    const double omega_se = sphere_weight_mass(w);
    const double j0 = 0.5 * std::tgamma(0.5 * m);
    const double j1 = 0.25 * std::tgamma(0.5 * m) * boost::math::digamma(0.5 * m);
    return (gauss_log_moment - tau * omega_se * j1) / j0;
  }
  return angular_integral(w, 121, [](double v) { return v > 0.0 ? v * std::log(v) : 0.0; });
}

double integrate_radial(const Weight& w, const RadialProfile& profile, RadialMethod method) {
  const double factor = integrate_radial_factor(w.homogeneous_dimension(), profile, method);
  return sphere_weight_mass(w) * factor;
}

}  // namespace conelab
