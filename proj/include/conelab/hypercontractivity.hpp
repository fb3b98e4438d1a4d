#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "conelab/hopf_lax.hpp"
#include "conelab/test_function.hpp"
#include "conelab/weight.hpp"

namespace conelab {

/// q(t) = alpha beta / ((alpha - beta) t / t_tilde + beta) on [0, t_tilde].
/// OutOfRange outside that interval, DomainError unless 0 < alpha <= beta.
double q_path(double alpha, double beta, double t_tilde, double t);

struct HyperOptions {
  /// Grid nodes per axis for the initial box; 0 picks 2048 / 400 / 48 in
  /// 1 / 2 / 3 dimensions (240 in 2D when p != 2).
  int nodes_per_axis = 0;
  /// Half-width of the initial box; 0 derives it from the tail
  /// certificate of e^g. The box grows (same spacing) while mass of
  /// e^{beta Q g} reaches the truncation edge.
  double box_half_width = 0.0;
  int max_enlargements = 3;
  /// Relative mass allowed on or behind the truncation edge.
  double edge_mass_tol = 1e-9;
  /// Unset: fast_p2 for p = 2, pruned otherwise.
  std::optional<HopfLaxMethod> method;
  /// Interior times in the F(t) trace.
  int trace_points = 6;
  double eps = 1e-3;
};

struct HyperConfig {
  double p = 2.0;
  double alpha = 1.0;
  double beta = 2.0;
  double t_tilde = 1.0;
  Weight weight = Weight::constant(Cone::full_space(1));
  /// e^g must carry a tail certificate (stored on g.tail).
  TestFunction g;
  HyperOptions options;
};

/// Log of the factor multiplying ||e^g||_{L^alpha} on the right side;
/// exactly 0 when alpha = beta.
double log_hyper_factor(double p, double alpha, double beta, double t_tilde, const Weight& w);

/// The same number obtained by integrating the log-derivative bound over
/// [0, t_tilde] with adaptive Gauss-Kronrod.
double integrated_log_bound(double p, double alpha, double beta, double t_tilde, const Weight& w);

/// (m/p) (q'/q^2) log(L / (e p^p) m q' q^{p-2}) at time t; 0 when alpha = beta.
double log_derivative_rhs(double p, double alpha, double beta, double t_tilde, const Weight& w, double t);

/// Grid chosen for a configuration (box from the tail certificate, grown
/// until the edge mass test passes).
std::shared_ptr<const GridRule> hyper_grid(const HyperConfig& cfg);

/// ||e^f||_{L^q(w)} by the cell-centered grid rule, evaluated in log space.
double exp_norm(const GridField& f, double q, const Weight& w);

/// ||e^g||_{L^alpha} exp(log_hyper_factor). NonIntegrable without a tail
/// certificate or when e^{alpha g} still has mass at the truncation edge.
double hyper_rhs(const HyperConfig& cfg);

struct TracePoint {
  double t = 0.0;
  double q = 0.0;
  double F = 0.0;
};

struct HyperReport {
  double lhs = 0.0;
  double rhs = 0.0;
  double ratio = 0.0;
  double norm_alpha = 0.0;
  std::vector<TracePoint> F_trace;
  Membership membership = Membership::Indeterminate;
  double edge_mass_fraction = 0.0;
  double box_half_width = 0.0;
  int nodes_per_axis = 0;
  double eps = 0.0;
  bool pass = false;
};

/// lhs = ||e^{Q_t g}||_{L^beta} with Q from inf_convolve, rhs from
/// hyper_rhs, F(t) = ||e^{Q_t g}||_{L^{q(t)}} at the trace times.
/// MembershipIndeterminate when the probe cannot decide g in F_t, and
/// DomainError when it decides g is not.
HyperReport hyper_check(const HyperConfig& cfg);

struct LogDerivativeReport {
  double t = 0.0;
  /// Central difference of log F with step dt.
  double lhs = 0.0;
  double rhs = 0.0;
  /// |D_dt - D_{2 dt}|, the finite-difference noise estimate.
  double noise = 0.0;
  bool ok = false;
};

/// StepTooCoarse when the noise estimate exceeds eps (1 + |rhs|); the
/// check is lhs <= rhs + eps (1 + |rhs|) + noise. t +- 2 dt must stay in
/// [0, t_tilde].
LogDerivativeReport log_derivative_bound(const HyperConfig& cfg, double t, double dt);

}  // namespace conelab
