#include "conelab/transport1d.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "conelab/constants.hpp"
#include "conelab/error.hpp"
#include "conelab/quadrature.hpp"

namespace conelab {

namespace {

constexpr std::array<double, 5> kGLx = {-0.9061798459386640, -0.5384693101056831, 0.0, 0.5384693101056831,
                                        0.9061798459386640};
constexpr std::array<double, 5> kGLw = {0.2369268850561891, 0.4786286704993665, 0.5688888888888889,
                                        0.4786286704993665, 0.2369268850561891};

double weight_at(const Weight& w, double x) {
  const double pt[1] = {x};
  return w.cone().contains(pt) ? w(pt) : 0.0;
}

double weight_slope(const Weight& w, double x) {
  const double pt[1] = {x};
  if (!w.cone().contains(pt)) return 0.0;
  double g[1] = {0.0};
  w.gradient(pt, g);
  return g[0];
}

double derivative(const TestFunction& u, const Weight& w, double x) {
  const double pt[1] = {x};
  double g[1] = {0.0};
  if (u.gradient) {
    u.gradient(pt, g);
  } else {
    fd_gradient(u, w.cone(), pt, g);
  }
  return g[0];
}

double eval(const TestFunction& u, double x) {
  const double pt[1] = {x};
  return u(pt);
}

void check_one_dimensional(const Weight& w) {
  if (w.dimension() != 1) fail(ErrorKind::DomainError, "transport1d needs a one-dimensional cone");
}

// Left-most x with G(x) = y for the piecewise-linear CDF of d.
double quantile(const Density1D& d, double y) {
  const auto& c = d.cdf;
  if (y <= 0.0) return d.grid.edge(0);
  if (y > c.back() * (1.0 + 1e-12)) fail(ErrorKind::DegenerateCDF, "quantile beyond the total mass");
  y = std::min(y, c.back());
  const auto it = std::lower_bound(c.begin() + 1, c.end(), y);
  const auto k = static_cast<int>(it - c.begin()) - 1;
  const double width = c[k + 1] - c[k];
  if (!(width > 0.0)) fail(ErrorKind::DegenerateCDF, "CDF is flat over the interpolation bracket");
  return d.grid.edge(k) + (y - c[k]) / width * d.grid.h();
}

// Piecewise-linear CDF of d at x.
double cdf_at(const Density1D& d, double x) {
  const double s = (x - d.grid.lo) / d.grid.h();
  if (s <= 0.0) return 0.0;
  if (s >= d.grid.n) return d.cdf.back();
  const int k = static_cast<int>(s);
  return d.cdf[k] + (s - k) * (d.cdf[k + 1] - d.cdf[k]);
}

}  // namespace

Density1D Density1D::make(std::function<double(double)> rho, const Weight& w, Grid1D grid, double eps_norm) {
  check_one_dimensional(w);
  if (grid.n < 2 || !(grid.hi > grid.lo)) fail(ErrorKind::DomainError, "grid needs n >= 2 and lo < hi");
  if (w.cone().axis_positive(0) && grid.lo < 0.0) fail(ErrorKind::DomainError, "grid leaves the half-line");
  Density1D d;
  d.weight = std::make_shared<const Weight>(w);
  d.grid = grid;
  d.rho = std::move(rho);
  const double h = grid.h();
  d.cdf.assign(static_cast<std::size_t>(grid.n) + 1, 0.0);
  for (int i = 0; i < grid.n; ++i) {
    const double x = grid.node(i);
    const double r = d.rho(x);
    if (!std::isfinite(r) || r < 0.0) fail(ErrorKind::NonFiniteSample, "density must be finite and non-negative");
    d.nodes.push_back(x);
    d.rho_nodes.push_back(r);
    d.w_nodes.push_back(weight_at(w, x));
    double mass = 0.0;
    for (std::size_t k = 0; k < kGLx.size(); ++k) {
      const double y = x + 0.5 * h * kGLx[k];
      mass += kGLw[k] * d.rho(y) * weight_at(w, y);
    }
    mass *= 0.5 * h;
    d.cell_mass.push_back(mass);
    d.cdf[i + 1] = d.cdf[i] + mass;
  }
  d.raw_mass = d.cdf.back();
  if (!(std::abs(d.raw_mass - 1.0) <= eps_norm)) {
    fail(ErrorKind::NotNormalized, "density mass " + std::to_string(d.raw_mass) + " is not 1");
  }
  for (double& c : d.cdf) c /= d.raw_mass;
  for (double& m : d.cell_mass) m /= d.raw_mass;
  return d;
}

double Density1D::expectation(const std::function<double(double)>& f) const {
  const double h = grid.h();
  StableSum acc;
  for (int i = 0; i < grid.n; ++i) {
    double cell = 0.0;
    for (std::size_t k = 0; k < kGLx.size(); ++k) {
      const double y = grid.node(i) + 0.5 * h * kGLx[k];
      const double mass = rho(y) * weight_at(*weight, y);
      if (mass > 0.0) cell += kGLw[k] * mass * f(y);
    }
    acc.add(0.5 * h * cell);
  }
  return acc.value() / raw_mass;
}

Density1D model_density(double p, const Weight& w, int n) {
  check_one_dimensional(w);
  const double q = conjugate(p);
  const double c1 = proof_constants(p, w).C1;
  const double r = std::pow(37.0, 1.0 / q) + 1.0;
  const Grid1D grid{w.cone().axis_positive(0) ? 0.0 : -r, r, n};
  return Density1D::make([c1, q](double y) { return c1 * std::exp(-std::pow(std::abs(y), q)); }, w, grid, 1e-8);
}

TransportMap1D brenier_map_1d(const Density1D& src, const Density1D& dst) {
  if (!(src.raw_mass > 0.0) || !(dst.raw_mass > 0.0)) fail(ErrorKind::DegenerateCDF, "density without mass");
  TransportMap1D m;
  m.source = std::make_shared<const Density1D>(src);
  m.target = std::make_shared<const Density1D>(dst);
  const int n = src.grid.n;
  m.T.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) m.T[i] = quantile(dst, 0.5 * (src.cdf[i] + src.cdf[i + 1]));
  const double h = src.grid.h();
  m.dT.resize(m.T.size());
  for (int i = 0; i < n; ++i) {
    double d;
    if (i == 0) {
      d = (m.T[1] - m.T[0]) / h;
    } else if (i == n - 1) {
      d = (m.T[n - 1] - m.T[n - 2]) / h;
    } else {
      d = (m.T[i + 1] - m.T[i - 1]) / (2.0 * h);
    }
    if (d <= 1e-12) {
      d = 1e-12;
      ++m.clamped;
    }
    m.dT[i] = d;
  }
  return m;
}

namespace {

double ma_median(const TransportMap1D& m, const std::function<double(double)>& target) {
  const Density1D& s = *m.source;
  double top = 0.0;
  for (std::size_t i = 0; i < s.nodes.size(); ++i) top = std::max(top, s.rho_nodes[i] * s.w_nodes[i]);
  std::vector<double> r;
  for (std::size_t i = 0; i < s.nodes.size(); ++i) {
    const double lhs = s.rho_nodes[i] * s.w_nodes[i];
    if (!(lhs >= 1e-8 * top) || lhs == 0.0) continue;
    const double rhs = target(m.T[i]) * weight_at(*m.target->weight, m.T[i]) * m.dT[i];
    r.push_back(std::abs(lhs - rhs) / lhs);
  }
  if (r.empty()) fail(ErrorKind::EmptyDomain, "source density has no support on the grid");
  const auto mid = r.begin() + static_cast<std::ptrdiff_t>(r.size() / 2);
  std::nth_element(r.begin(), mid, r.end());
  return *mid;
}

}  // namespace

double monge_ampere_residual(const TransportMap1D& m) {
  // rho is normalized against the raw grid mass the CDF was scaled by.
  const double scale = 1.0 / m.target->raw_mass;
  return ma_median(m, [&](double y) { return scale * m.target->rho(y); });
}

double monge_ampere_residual(const TransportMap1D& m, double p, double C1) {
  const double q = conjugate(p);
  return ma_median(m, [&](double y) { return C1 * std::exp(-std::pow(std::abs(y), q)); });
}

double pushforward_total_variation(const TransportMap1D& m, int bins) {
  if (bins < 1) fail(ErrorKind::DomainError, "need at least one bin");
  const Density1D& t = *m.target;
  const double width = (t.grid.hi - t.grid.lo) / bins;
  std::vector<double> pushed(static_cast<std::size_t>(bins), 0.0), expect(static_cast<std::size_t>(bins), 0.0);
  auto bin = [&](double x) {
    return std::clamp(static_cast<int>(std::floor((x - t.grid.lo) / width)), 0, bins - 1);
  };
  for (std::size_t i = 0; i < m.T.size(); ++i) pushed[bin(m.T[i])] += m.source->cell_mass[i];
  for (std::size_t i = 0; i < t.nodes.size(); ++i) expect[bin(t.nodes[i])] += t.cell_mass[i];
  double tv = 0.0;
  for (int b = 0; b < bins; ++b) tv += std::abs(pushed[b] - expect[b]);
  return 0.5 * tv;
}

double interval_mass_error(const TransportMap1D& m, double a, double b) {
  if (!(b >= a)) fail(ErrorKind::DomainError, "interval needs a <= b");
  const Density1D& s = *m.source;
  // Invert the monotone node map T by linear interpolation.
  auto preimage = [&](double y) {
    const auto it = std::lower_bound(m.T.begin(), m.T.end(), y);
    if (it == m.T.begin()) return s.grid.lo;
    if (it == m.T.end()) return s.grid.hi;
    const auto k = static_cast<std::size_t>(it - m.T.begin());
    const double t0 = m.T[k - 1], t1 = m.T[k];
    const double f = t1 > t0 ? (y - t0) / (t1 - t0) : 0.0;
    return s.nodes[k - 1] + f * (s.nodes[k] - s.nodes[k - 1]);
  };
  const double target = cdf_at(*m.target, b) - cdf_at(*m.target, a);
  const double source = cdf_at(s, preimage(b)) - cdf_at(s, preimage(a));
  return std::abs(target - source);
}

double byparts_gap(const TestFunction& u, const TransportMap1D& m, double p, const Weight& w) {
  check_one_dimensional(w);
  if (!(p >= 1.0)) fail(ErrorKind::DomainError, "by-parts needs p >= 1");
  const Density1D& s = *m.source;
  const double h = s.grid.h();
  const double q = p > 1.0 ? conjugate(p) : 0.0;
  StableSum rhs, lhs, integrability;
  double edge = 0.0;
  for (std::size_t i = 0; i < s.nodes.size(); ++i) {
    const double x = s.nodes[i];
    const double ui = eval(u, x);
    if (ui < 0.0) fail(ErrorKind::DomainError, "by-parts needs u >= 0");
    const double wi = weight_at(w, x);
    const double T = m.T[i];
    if (p == 1.0 && std::abs(T) > 1.0 + 1e-12) fail(ErrorKind::DomainError, "p = 1 needs |T| <= 1");
    const double up = std::pow(ui, p);
    const double du = derivative(u, w, x);
    rhs.add(h * (-p * std::pow(ui, p - 1.0) * wi * T * du - up * weight_slope(w, x) * T));
    lhs.add(h * up * wi * m.dT[i]);
    if (p > 1.0) {
      const double v = up * std::pow(std::abs(T), q) * wi * h;
      integrability.add(v);
      const bool last = i + 1 == s.nodes.size();
      const bool first = i == 0 && !w.cone().axis_positive(0);
      if (first || last) edge += v;
    }
  }
  if (p > 1.0) {
    const double total = integrability.value();
    if (!std::isfinite(total) || edge > 1e-8 * std::max(total, 1e-300)) {
      fail(ErrorKind::IntegrabilityFailure, "u^{p-1} T is not in L^{p'} on the grid (mass at the edge)");
    }
  }
  return rhs.value() - lhs.value();
}

double scaling_parameter(const TestFunction& u, double p, const Weight& w, const Grid1D& grid) {
  check_one_dimensional(w);
  const double tau = w.degree();
  if (tau == 0.0) return 1.0;
  const auto c = proof_constants(p, w);
  const auto d = Density1D::make([&](double x) { return std::pow(std::abs(eval(u, x)), p); }, w, grid);
  const double J = d.expectation([&](double x) { return std::log(weight_at(w, x)); });
  return std::exp((J - (c.C3 - c.C2)) / tau);
}

ChainReport entropy_chain(const TestFunction& u, double p, const Weight& w, const Grid1D& grid, double eps) {
  check_one_dimensional(w);
  if (!(p > 1.0)) fail(ErrorKind::DomainError, "the transport chain needs p > 1");
  ChainReport r;
  r.p = p;
  r.m = w.homogeneous_dimension();
  r.eps = eps;
  const double m = r.m;
  const double tau = w.degree();
  const auto c = proof_constants(p, w);
  r.C1 = c.C1;
  r.C2 = c.C2;
  r.C3 = c.C3;
  r.C4 = c.C4;
  r.J_target = c.C3 - c.C2;

  const auto src = Density1D::make([&](double x) { return std::pow(std::abs(eval(u, x)), p); }, w, grid);
  StableSum II, III, amgm_inner, G, holder_lhs, lc;
  const double h = grid.h();
  r.J = src.expectation([&](double x) { return std::log(weight_at(w, x)); });
  if (std::abs(r.J - r.J_target) > 1e-6) {
    fail(ErrorKind::ScalingNotApplied, "int u^p w log w = " + std::to_string(r.J) + ", expected C3 - C2 = " +
                                           std::to_string(r.J_target));
  }

  const auto dst = model_density(p, w);
  const auto map = brenier_map_1d(src, dst);
  r.clamped = map.clamped;
  for (std::size_t i = 0; i < src.nodes.size(); ++i) {
    const double mu = src.cell_mass[i];
    const double x = src.nodes[i];
    const double rho = src.rho_nodes[i];
    const double dT = map.dT[i];
    II.add(mu * std::log(dT));
    III.add(mu * dT);
    amgm_inner.add(mu * m * std::log((tau + dT) / m));
    const double ui = eval(u, x);
    const double du = derivative(u, w, x);
    G.add(h * std::pow(std::abs(du), p) * src.w_nodes[i]);
    holder_lhs.add(-p * h * std::pow(ui, p - 1.0) * src.w_nodes[i] * map.T[i] * du);
    lc.add(h * rho * weight_slope(w, x) * map.T[i]);
  }
  r.I = src.expectation([&](double x) { return std::log(src.rho(x)); });
  r.II = II.value();
  r.III = III.value();
  r.G = G.value();
  r.ma_identity = r.I - (r.C3 - r.J + r.II);
  r.ma_residual = monge_ampere_residual(map, p, r.C1);
  r.am_gm_gap = amgm_inner.value() - r.II;
  r.jensen_gap = (m * std::log(tau + r.III) - m * std::log(m)) - amgm_inner.value();
  r.byparts_gap = byparts_gap(u, map, p, w);
  const double g1p = std::pow(r.G, 1.0 / p);
  r.holder_gap = r.C4 * g1p - holder_lhs.value();
  r.log_concavity_gap = lc.value() - tau;
  r.ii_bound = r.II <= m * std::log(tau + r.III) - m * std::log(m) + eps;
  r.iii_bound = r.III <= r.C4 * g1p - tau + eps;
  r.final_bound = r.C3 - r.J - m * std::log(m) + m * std::log(r.C4 * g1p);
  r.rhs = (m / p) * std::log(sharp_constant(p, w).value * r.G);
  const bool gaps_ok = r.am_gm_gap >= -eps && r.jensen_gap >= -eps && r.byparts_gap >= -eps &&
                       r.holder_gap >= -eps && r.log_concavity_gap >= -eps;
  r.pass = gaps_ok && r.ii_bound && r.iii_bound && r.I <= r.final_bound + eps &&
           std::abs(r.final_bound - r.rhs) <= 2.0 * eps && std::abs(r.ma_identity) <= eps;
  return r;
}

}  // namespace conelab
