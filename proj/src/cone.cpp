#include "conelab/cone.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "conelab/error.hpp"

namespace conelab {

double norm(PointView x) noexcept {
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s);
}

double dot(PointView a, PointView b) noexcept {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

std::string_view to_string(ConeKind kind) noexcept {
  switch (kind) {
    case ConeKind::FullSpace: return "full_space";
    case ConeKind::HalfSpace: return "half_space";
    case ConeKind::Orthant: return "orthant";
    case ConeKind::Polyhedral: return "polyhedral";
  }
  return "unknown";
}

namespace {

std::vector<double> unit(std::vector<double> v, int n) {
  if (static_cast<int>(v.size()) != n) {
    fail(ErrorKind::DomainError, "face normal has wrong dimension");
  }
  const double len = norm(v);
  if (!(len > 0.0) || !std::isfinite(len)) {
    fail(ErrorKind::DomainError, "face normal must be nonzero and finite");
  }
  for (double& c : v) c /= len;
  return v;
}

void require_dimension(int n) {
  if (n <= 0) fail(ErrorKind::DomainError, "cone dimension must be positive");
}

}  // namespace

Cone::Cone(int n, ConeKind kind, std::vector<std::vector<double>> faces)
    : n_(n), kind_(kind), faces_(std::move(faces)) {}

Cone Cone::full_space(int n) {
  require_dimension(n);
  return Cone(n, ConeKind::FullSpace, {});
}

Cone Cone::half_space(std::vector<double> inward_normal) {
  const int n = static_cast<int>(inward_normal.size());
  require_dimension(n);
  return Cone(n, ConeKind::HalfSpace, {unit(std::move(inward_normal), n)});
}

Cone Cone::orthant(int n, std::vector<bool> active_axes) {
  require_dimension(n);
  if (static_cast<int>(active_axes.size()) != n) {
    fail(ErrorKind::DomainError, "orthant mask has wrong dimension");
  }
  std::vector<std::vector<double>> faces;
  for (int i = 0; i < n; ++i) {
    if (!active_axes[i]) continue;
    std::vector<double> e(n, 0.0);
    e[i] = 1.0;
    faces.push_back(std::move(e));
  }
  if (faces.empty()) return full_space(n);
  return Cone(n, ConeKind::Orthant, std::move(faces));
}

Cone Cone::orthant(int n) { return orthant(n, std::vector<bool>(static_cast<std::size_t>(n), true)); }

Cone Cone::polyhedral(int n, std::vector<std::vector<double>> inward_normals) {
  require_dimension(n);
  if (inward_normals.empty()) return full_space(n);
  for (auto& f : inward_normals) f = unit(std::move(f), n);
  return Cone(n, ConeKind::Polyhedral, std::move(inward_normals));
}

double Cone::boundary_distance(PointView x) const {
  if (static_cast<int>(x.size()) != n_) {
    fail(ErrorKind::DomainError, "point dimension does not match cone");
  }
  double d = std::numeric_limits<double>::infinity();
  for (const auto& f : faces_) d = std::min(d, dot(f, x));
  return d;
}

bool Cone::axis_positive(int axis) const {
  for (const auto& f : faces_) {
    bool is_axis = true;
    for (int j = 0; j < n_; ++j) {
      const double want = (j == axis) ? 1.0 : 0.0;
      if (std::abs(f[j] - want) > 1e-14) {
        is_axis = false;
        break;
      }
    }
    if (is_axis) return true;
  }
  return false;
}

std::optional<std::vector<bool>> Cone::coordinate_mask() const {
  std::vector<bool> mask(static_cast<std::size_t>(n_), false);
  for (const auto& f : faces_) {
    int hit = -1;
    for (int j = 0; j < n_; ++j) {
      if (std::abs(f[j] - 1.0) <= 1e-14) {
        hit = j;
      } else if (std::abs(f[j]) > 1e-14) {
        return std::nullopt;
      }
    }
    if (hit < 0 || mask[hit]) return std::nullopt;
    mask[hit] = true;
  }
  return mask;
}

std::string Cone::describe() const {
  std::ostringstream os;
  os << to_string(kind_) << "(n=" << n_ << ", faces=" << faces_.size() << ")";
  return os.str();
}

std::vector<Point> sample_cone(const Cone& cone, std::size_t count, std::uint64_t seed, double rmin,
                               double rmax, double eps_rel) {
  const int n = cone.dimension();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double a = std::pow(rmin, n);
  const double b = std::pow(rmax, n);

  std::vector<Point> out;
  out.reserve(count);
  const std::size_t max_attempts = 1000 * count + 10000;
  for (std::size_t attempt = 0; out.size() < count; ++attempt) {
    if (attempt >= max_attempts) {
      fail(ErrorKind::EmptyDomain, "cone sampling acceptance rate too low: " + cone.describe());
    }
    Point x(static_cast<std::size_t>(n));
    double len = 0.0;
    while (len == 0.0) {
      for (double& c : x) c = gauss(rng);
      len = norm(x);
    }
    const double r = std::pow(a + unif(rng) * (b - a), 1.0 / n);
    for (double& c : x) c *= r / len;
    if (cone.boundary_distance(x) >= eps_rel * r) out.push_back(std::move(x));
  }
  return out;
}

}  // namespace conelab
