#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace conelab {

using Point = std::vector<double>;
using PointView = std::span<const double>;

double norm(PointView x) noexcept;
double dot(PointView a, PointView b) noexcept;

enum class ConeKind { FullSpace, HalfSpace, Orthant, Polyhedral };

std::string_view to_string(ConeKind kind) noexcept;

/// An open convex cone E in R^n stored as the intersection of open
/// half-spaces {x : nu_k . x > 0} with unit inward normals nu_k.
/// The full space has no faces.
class Cone {
 public:
  static Cone full_space(int n);
  static Cone half_space(std::vector<double> inward_normal);
  /// Positive orthant over the active axes; inactive axes range over R.
  static Cone orthant(int n, std::vector<bool> active_axes);
  static Cone orthant(int n);
  static Cone polyhedral(int n, std::vector<std::vector<double>> inward_normals);

  [[nodiscard]] int dimension() const noexcept { return n_; }
  [[nodiscard]] ConeKind kind() const noexcept { return kind_; }
  [[nodiscard]] const std::vector<std::vector<double>>& faces() const noexcept { return faces_; }

  /// Minimum signed distance to the faces; +inf for the full space and
  /// negative outside E.
  [[nodiscard]] double boundary_distance(PointView x) const;
  [[nodiscard]] bool contains(PointView x) const { return boundary_distance(x) > 0.0; }

  /// True when E lies inside {x_i > 0}, i.e. some face normal is e_i.
  [[nodiscard]] bool axis_positive(int axis) const;

  /// When every face normal is a coordinate vector e_i (full space,
  /// axis-aligned half-space, orthant) returns the mask of constrained axes.
  [[nodiscard]] std::optional<std::vector<bool>> coordinate_mask() const;

  [[nodiscard]] std::string describe() const;

 private:
  Cone(int n, ConeKind kind, std::vector<std::vector<double>> faces);

  int n_ = 0;
  ConeKind kind_ = ConeKind::FullSpace;
  std::vector<std::vector<double>> faces_;
};

/// Points drawn uniformly from the annulus rmin <= |x| <= rmax intersected
/// with E, kept only when boundary_distance(x) >= eps_rel * |x|.
std::vector<Point> sample_cone(const Cone& cone, std::size_t count, std::uint64_t seed,
                               double rmin = 0.1, double rmax = 10.0, double eps_rel = 1e-6);

}  // namespace conelab
