#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "conelab/test_function.hpp"
#include "conelab/weight.hpp"

namespace conelab {

/// Uniform cells [lo + i h, lo + (i+1) h], nodes at the cell centers.
struct Grid1D {
  double lo = -8.0;
  double hi = 8.0;
  int n = 2048;

  [[nodiscard]] double h() const { return (hi - lo) / n; }
  [[nodiscard]] double node(int i) const { return lo + (i + 0.5) * h(); }
  [[nodiscard]] double edge(int i) const { return lo + i * h(); }
};

/// A probability density rho with respect to w dx on a 1D cone
/// (R or (0, inf)) sampled on a grid. Cell masses come from 5-point
/// Gauss-Legendre per cell; the CDF at the cell edges is their prefix sum
/// in fixed order.
struct Density1D {
  std::shared_ptr<const Weight> weight;
  Grid1D grid;
  std::function<double(double)> rho;
  std::vector<double> nodes, rho_nodes, w_nodes, cell_mass, cdf;
  /// int rho w over the grid before renormalization.
  double raw_mass = 0.0;

  /// int f rho w / raw_mass with 5-point Gauss-Legendre per cell; points
  /// where rho w vanishes are skipped, so f may be singular there.
  [[nodiscard]] double expectation(const std::function<double(double)>& f) const;

  /// NotNormalized when |raw_mass - 1| > eps_norm; DomainError for a grid
  /// leaving the cone or a weight that is not one-dimensional.
  static Density1D make(std::function<double(double)> rho, const Weight& w, Grid1D grid, double eps_norm = 1e-6);
};

/// C1 e^{-|y|^{p'}} w(y), on [0, R] or [-R, R] with e^{-R^{p'}} < 1e-16.
Density1D model_density(double p, const Weight& w, int n = 4096);

struct TransportMap1D {
  std::shared_ptr<const Density1D> source, target;
  /// T at the source nodes.
  std::vector<double> T;
  /// Central differences (one-sided at the ends), clamped below at 1e-12.
  std::vector<double> dT;
  std::size_t clamped = 0;
};

/// T = G^{-1} o F with F, G the piecewise-linear CDFs; ties in G go to the
/// left-most preimage. DegenerateCDF when a CDF has no mass or a value
/// cannot be bracketed.
TransportMap1D brenier_map_1d(const Density1D& src, const Density1D& dst);

/// Median over support nodes (rho w >= 1e-8 max) of
/// |rho_src w - rho_dst(T) w(T) T'| / (rho_src w).
double monge_ampere_residual(const TransportMap1D& m);

/// The same against the model density C1 e^{-|y|^{p'}} w(y) with the given C1.
double monge_ampere_residual(const TransportMap1D& m, double p, double C1);

/// Total variation between the push-forward of the source cell masses
/// (binned by T) and the target cell masses, on `bins` equal bins of the
/// target grid.
double pushforward_total_variation(const TransportMap1D& m, int bins);

/// |target mass of [a, b] - source mass of T^{-1}([a, b])|.
double interval_mass_error(const TransportMap1D& m, double a, double b);

/// [-p int u^{p-1} w T u' - int u^p w' T] - int u^p w T', midpoint rule on
/// the source grid. IntegrabilityFailure when u^p |T|^{p'} w still carries
/// mass at the grid edge. p = 1 needs |T| <= 1.
double byparts_gap(const TestFunction& u, const TransportMap1D& m, double p, const Weight& w);

/// Dilation factor t with int u_t^p w log w = C3 - C2 for u_t = t^{m/p} u(t .)
/// (1 when tau = 0).
double scaling_parameter(const TestFunction& u, double p, const Weight& w, const Grid1D& grid);

struct ChainReport {
  double p = 0.0;
  double m = 0.0;
  double C1 = 0.0, C2 = 0.0, C3 = 0.0, C4 = 0.0;
  /// Entropy int u^p log u^p w.
  double I = 0.0;
  /// int u^p w log w and its required value C3 - C2.
  double J = 0.0;
  double J_target = 0.0;
  /// int u^p w log T'.
  double II = 0.0;
  /// int u^p w T'.
  double III = 0.0;
  /// int |u'|^p w.
  double G = 0.0;
  /// I - (C3 - J + II), zero when T solves the Monge-Ampere equation.
  double ma_identity = 0.0;
  double ma_residual = 0.0;
  double am_gm_gap = 0.0;
  double jensen_gap = 0.0;
  double byparts_gap = 0.0;
  double holder_gap = 0.0;
  double log_concavity_gap = 0.0;
  /// II <= m log(tau + III) - m log m and III <= C4 G^{1/p} - tau.
  bool ii_bound = false;
  bool iii_bound = false;
  /// C3 - J - m log m + m log(C4 G^{1/p}).
  double final_bound = 0.0;
  /// (m/p) log(L G).
  double rhs = 0.0;
  std::size_t clamped = 0;
  double eps = 0.0;
  bool pass = false;
};

/// Replays the transport proof of the log-Sobolev inequality for a
/// normalized u on a 1D cone. ScalingNotApplied when |J - (C3 - C2)| > 1e-6.
ChainReport entropy_chain(const TestFunction& u, double p, const Weight& w, const Grid1D& grid, double eps = 1e-3);

}  // namespace conelab
