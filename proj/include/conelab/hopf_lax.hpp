#pragma once

#include <memory>
#include <string_view>
#include <vector>

#include "conelab/quadrature.hpp"
#include "conelab/test_function.hpp"

namespace conelab {

/// Values of a function at the inside nodes of a grid rule, in
/// rule.inside() order.
struct GridField {
  std::shared_ptr<const GridRule> rule;
  std::vector<double> values;
  double t = 0.0;
};

GridField sample_field(const TestFunction& g, std::shared_ptr<const GridRule> rule, double t = 0.0);

enum class HopfLaxMethod { Naive, Pruned, FastP2 };

std::string_view to_string(HopfLaxMethod m) noexcept;
HopfLaxMethod hopf_lax_method_from_string(std::string_view s);

struct ConvolutionResult {
  GridField field;
  /// Slot (position in rule.inside()) of the minimizing node per target.
  std::vector<std::size_t> argmin;
  /// Fraction of targets away from the box edge whose minimizer sits on a
  /// box edge that cuts through E. Nonzero means the truncated infimum may
  /// differ from the one over E.
  double boundary_argmin_ratio = 0.0;
};

/// (Q_t g)(x_i) = min_j g(y_j) + |y_j - x_i|^{p'} / (p' t^{p'-1}) over the
/// inside nodes. t = 0 returns g unchanged.
///
/// naive: all pairs. pruned: branch and bound over a tree of grid blocks
/// that skips a block once min g over it plus the cost to its nearest
/// cell exceeds the best value found; returns the naive minimum and the
/// same (lowest-slot) argmin.
/// fast_p2: separable lower envelope of parabolas (p = 2 only,
/// MethodCostMismatch otherwise), O(N) per grid line.
ConvolutionResult inf_convolve(const GridField& g, double t, double p, HopfLaxMethod method);

/// For g = sign (b/p') |x + x0|^{p'} on R^n, Q_t g = sign (b_t/p') |x + x0|^{p'}
/// with b_t = b / (1 + sign t b^{p-1})^{p'-1}. DomainError when sign = -1
/// and t b^{p-1} >= 1 (the infimum is -inf).
double power_family_rate(double b, double p, double t, int sign);

/// Worker threads for naive and pruned (targets are split in fixed chunks,
/// so results do not depend on the count). Default 1.
void set_hopf_lax_threads(int n);

/// True when the slot lies on a box edge that cuts through E.
bool on_truncation_boundary(const GridRule& rule, std::size_t slot);
/// True when the slot lies on any box edge.
bool on_box_edge(const GridRule& rule, std::size_t slot);

struct HopfLaxRun {
  GridField initial;
  double p = 2.0;
  HopfLaxMethod method = HopfLaxMethod::Naive;
  std::vector<double> times;
  std::vector<GridField> slices;
  std::vector<double> boundary_argmin_ratio;
};

/// Times must be strictly increasing and positive.
HopfLaxRun run_hopf_lax(const GridField& g, double p, std::vector<double> times, HopfLaxMethod method);

struct MonotonicityReport {
  /// Nodes with Q_t g > g + tol.
  std::size_t above_initial = 0;
  /// Nodes with Q_{t_{k+1}} g > Q_{t_k} g + tol.
  std::size_t increasing_in_t = 0;
  double worst = 0.0;
  [[nodiscard]] bool ok() const noexcept { return above_initial == 0 && increasing_in_t == 0; }
};

MonotonicityReport check_monotonicity(const HopfLaxRun& run, double tol = 1e-12);

struct ResidualSlice {
  double t = 0.0;
  std::vector<std::size_t> slots;
  std::vector<double> values;
};

struct HJResidual {
  std::vector<ResidualSlice> slices;
  double median = 0.0;
  double p90 = 0.0;
  std::size_t count = 0;
  /// Fraction of evaluated (node, time) pairs with |r| > tol, where tol is
  /// the argument given to hj_residual.
  double fraction_above = 0.0;
};

/// r = dQ/dt + |grad Q|^p / p by central differences at interior nodes of
/// interior time slices. Needs >= 3 uniformly spaced slices
/// (InsufficientSlices).
HJResidual hj_residual(const HopfLaxRun& run, double tol = 1e-2);

enum class Membership { True, False, Indeterminate };

std::string_view to_string(Membership m) noexcept;

struct MembershipReport {
  Membership result = Membership::Indeterminate;
  bool bounded_above = false;
  double grid_min = 0.0;
  bool argmin_on_boundary = false;
  /// Minimum of the probe functional over each ray shell beyond the box.
  std::vector<double> shell_min;
};

/// Tri-state test of g in F_{t0}(E) through the probe
/// inf_y g(y) + |y - x0|^{p'} / (p' t0^{p'-1}) on the grid, followed by a
/// ray probe at geometrically growing radii.
MembershipReport membership_F_t0(const TestFunction& g, double t0, double p, PointView x0,
                                 std::shared_ptr<const GridRule> rule, std::uint64_t seed = 3);

struct InvolutionReport {
  /// max |Q_t(-Q_t g) + g| over reliable interior nodes.
  double max_abs_deviation = 0.0;
  /// Range of the signed gap Q_t(-Q_t g) - (-g) over the same nodes.
  double min_gap = 0.0;
  double max_gap = 0.0;
  std::size_t nodes_used = 0;
};

/// Computes Q_t(-Q_t g) on the grid and compares it with -g. Nodes whose
/// minimizer chain reaches a truncation edge are skipped.
InvolutionReport c_transform_involution(const TestFunction& g, double t, double p,
                                        std::shared_ptr<const GridRule> rule,
                                        HopfLaxMethod method = HopfLaxMethod::Pruned);

}  // namespace conelab
