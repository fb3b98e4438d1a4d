#include "conelab/hopf_lax.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <thread>

#include "conelab/error.hpp"

namespace conelab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::atomic<int> g_threads{1};

// c(d) = |d|^{p'} / (p' t^{p'-1}) as a function of d^2.
struct Cost {
  double q;
  double denom;
  bool quadratic;

  Cost(double p, double t) : q(p / (p - 1.0)), denom(q * std::pow(t, q - 1.0)), quadratic(q == 2.0) {}

  [[nodiscard]] double operator()(double d2) const {
    return quadratic ? d2 / denom : std::pow(d2, 0.5 * q) / denom;
  }
  // Largest d^2 with cost <= budget.
  [[nodiscard]] double inverse(double budget) const {
    if (!(budget > 0.0)) return 0.0;
    return quadratic ? budget * denom : std::pow(budget * denom, 2.0 / q);
  }
};

struct Layout {
  int n;
  std::vector<int> counts;
  std::vector<double> spacing;
  std::vector<std::vector<int>> index;  // multi-index per inside slot

  explicit Layout(const GridRule& rule) : n(rule.dimension()), counts(rule.counts()) {
    for (int a = 0; a < n; ++a) spacing.push_back(rule.spacing(a));
    index.reserve(rule.size());
    for (std::size_t flat : rule.inside()) index.push_back(rule.multi_index(flat));
  }

  [[nodiscard]] double d2(const std::vector<int>& a, const std::vector<int>& b) const {
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
      const double d = (a[i] - b[i]) * spacing[i];
      s += d * d;
    }
    return s;
  }
};

template <class F>
void parallel_for(std::size_t count, int threads, F&& body) {
  const std::size_t nt = std::max<std::size_t>(1, std::min<std::size_t>(threads, count / 256 + 1));
  if (nt <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  const std::size_t chunk = (count + nt - 1) / nt;
  for (std::size_t k = 0; k < nt; ++k) {
    pool.emplace_back([&, k] {
      const std::size_t lo = k * chunk;
      const std::size_t hi = std::min(count, lo + chunk);
      for (std::size_t i = lo; i < hi; ++i) body(i);
    });
  }
  for (auto& th : pool) th.join();
}

void naive(const GridField& g, const Cost& cost, const Layout& lay, ConvolutionResult& out, int threads) {
  const std::size_t n = g.values.size();
  parallel_for(n, threads, [&](std::size_t i) {
    double best = kInf;
    std::size_t arg = i;
    for (std::size_t j = 0; j < n; ++j) {
      const double v = g.values[j] + cost(lay.d2(lay.index[i], lay.index[j]));
      if (v < best) {
        best = v;
        arg = j;
      }
    }
    out.field.values[i] = best;
    out.argmin[i] = arg;
  });
}

// Blocks of the tensor grid (recursive bisection of index ranges) with the
// minimum of g over their inside nodes.
struct BlockTree {
  struct Block {
    std::vector<int> lo, hi;  // inclusive index ranges
    double gmin = kInf;
    int left = -1, right = -1;
    std::vector<std::size_t> slots;  // leaves only
  };
  std::vector<Block> blocks;

  BlockTree(const GridRule& rule, const std::vector<double>& g) {
    Block root;
    for (int a = 0; a < rule.dimension(); ++a) {
      root.lo.push_back(0);
      root.hi.push_back(rule.counts()[a] - 1);
    }
    blocks.push_back(std::move(root));
    build(rule, g, 0);
  }

  void build(const GridRule& rule, const std::vector<double>& g, int b) {
    std::size_t cells = 1;
    int axis = 0;
    double widest = -1.0;
    for (int a = 0; a < rule.dimension(); ++a) {
      const int len = blocks[b].hi[a] - blocks[b].lo[a] + 1;
      cells *= static_cast<std::size_t>(len);
      const double w = len * rule.spacing(a);
      if (len > 1 && w > widest) {
        widest = w;
        axis = a;
      }
    }
    if (cells <= 16) {
      std::vector<int> idx(blocks[b].lo);
      collect(rule, g, b, idx, 0);
      return;
    }
    const int mid = (blocks[b].lo[axis] + blocks[b].hi[axis]) / 2;
    Block l{blocks[b].lo, blocks[b].hi, kInf, -1, -1, {}};
    Block r = l;
    l.hi[axis] = mid;
    r.lo[axis] = mid + 1;
    const int li = static_cast<int>(blocks.size());
    blocks.push_back(std::move(l));
    blocks.push_back(std::move(r));
    blocks[b].left = li;
    blocks[b].right = li + 1;
    build(rule, g, li);
    build(rule, g, li + 1);
    blocks[b].gmin = std::min(blocks[li].gmin, blocks[li + 1].gmin);
  }

  void collect(const GridRule& rule, const std::vector<double>& g, int b, std::vector<int>& idx, int axis) {
    if (axis == rule.dimension()) {
      const std::size_t slot = rule.slot(rule.flat_index(idx));
      if (slot == GridRule::npos) return;
      blocks[b].slots.push_back(slot);
      blocks[b].gmin = std::min(blocks[b].gmin, g[slot]);
      return;
    }
    for (int k = blocks[b].lo[axis]; k <= blocks[b].hi[axis]; ++k) {
      idx[axis] = k;
      collect(rule, g, b, idx, axis + 1);
    }
  }
};

// Branch and bound over the block tree. A block is skipped only when
// min g over it plus the cost to its nearest cell exceeds the best value
// so far, so the result (value and lowest-slot argmin) equals naive.
void pruned(const GridField& g, const Cost& cost, const Layout& lay, ConvolutionResult& out, int threads) {
  const BlockTree tree(*g.rule, g.values);
  const std::size_t n = g.values.size();
  parallel_for(n, threads, [&](std::size_t i) {
    const auto& xi = lay.index[i];
    double best = g.values[i];
    std::size_t arg = i;
    auto bound = [&](int b) {
      const auto& blk = tree.blocks[b];
      if (!std::isfinite(blk.gmin)) return kInf;
      double d2 = 0.0;
      for (int a = 0; a < lay.n; ++a) {
        const int k = xi[a] < blk.lo[a] ? blk.lo[a] - xi[a] : (xi[a] > blk.hi[a] ? xi[a] - blk.hi[a] : 0);
        const double d = k * lay.spacing[a];
        d2 += d * d;
      }
      return blk.gmin + cost(d2);
    };
    auto visit = [&](auto&& self, int b, double lb) -> void {
      if (lb > best) return;
      const auto& blk = tree.blocks[b];
      if (blk.left < 0) {
        for (std::size_t s : blk.slots) {
          const double v = g.values[s] + cost(lay.d2(xi, lay.index[s]));
          if (v < best || (v == best && s < arg)) {
            best = v;
            arg = s;
          }
        }
        return;
      }
      const double bl = bound(blk.left), br = bound(blk.right);
      if (bl <= br) {
        self(self, blk.left, bl);
        self(self, blk.right, br);
      } else {
        self(self, blk.right, br);
        self(self, blk.left, bl);
      }
    };
    visit(visit, 0, bound(0));
    out.field.values[i] = best;
    out.argmin[i] = arg;
  });
}

void fast_p2(const GridField& g, double t, ConvolutionResult& out) {
  const GridRule& rule = *g.rule;
  const int n = rule.dimension();
  std::vector<double> f(rule.tensor_size(), kInf);
  std::vector<std::size_t> arg(rule.tensor_size(), GridRule::npos);
  for (std::size_t k = 0; k < rule.size(); ++k) {
    f[rule.inside()[k]] = g.values[k];
    arg[rule.inside()[k]] = k;
  }
  std::vector<double> line, outv, z;
  std::vector<std::size_t> larg, outa;
  std::vector<int> v;
  for (int a = 0; a < n; ++a) {
    const int len = rule.counts()[a];
    const std::size_t stride = rule.stride(a);
    const double c = rule.spacing(a) * rule.spacing(a) / (2.0 * t);
    line.resize(len);
    larg.resize(len);
    outv.resize(len);
    outa.resize(len);
    v.resize(len);
    z.resize(len + 1);
    for (std::size_t base = 0; base < rule.tensor_size(); ++base) {
      if ((base / stride) % static_cast<std::size_t>(len) != 0) continue;
      for (int q = 0; q < len; ++q) {
        line[q] = f[base + q * stride];
        larg[q] = arg[base + q * stride];
      }
      // Lower envelope of the parabolas c (x - q)^2 + line[q].
      int k = -1;
      for (int q = 0; q < len; ++q) {
        if (!std::isfinite(line[q])) continue;
        if (k < 0) {
          k = 0;
          v[0] = q;
          z[0] = -kInf;
          z[1] = kInf;
          continue;
        }
        double s = 0.0;
        while (true) {
          const int r = v[k];
          s = ((line[q] + c * q * q) - (line[r] + c * r * r)) / (2.0 * c * (q - r));
          if (s <= z[k] && k > 0) {
            --k;
            continue;
          }
          break;
        }
        if (s <= z[k]) {
          // Replaces the only parabola left.
          v[k] = q;
          z[k + 1] = kInf;
          continue;
        }
        ++k;
        v[k] = q;
        z[k] = s;
        z[k + 1] = kInf;
      }
      if (k < 0) {
        for (int q = 0; q < len; ++q) {
          outv[q] = kInf;
          outa[q] = GridRule::npos;
        }
      } else {
        int j = 0;
        for (int q = 0; q < len; ++q) {
          while (z[j + 1] < q) ++j;
          const double d = q - v[j];
          outv[q] = c * d * d + line[v[j]];
          outa[q] = larg[v[j]];
        }
      }
      for (int q = 0; q < len; ++q) {
        f[base + q * stride] = outv[q];
        arg[base + q * stride] = outa[q];
      }
    }
  }
  for (std::size_t k = 0; k < rule.size(); ++k) {
    out.field.values[k] = f[rule.inside()[k]];
    out.argmin[k] = arg[rule.inside()[k]];
  }
}

}  // namespace

std::string_view to_string(HopfLaxMethod m) noexcept {
  switch (m) {
    case HopfLaxMethod::Naive: return "naive";
    case HopfLaxMethod::Pruned: return "pruned";
    case HopfLaxMethod::FastP2: return "fast_p2";
  }
  return "unknown";
}

HopfLaxMethod hopf_lax_method_from_string(std::string_view s) {
  if (s == "naive") return HopfLaxMethod::Naive;
  if (s == "pruned") return HopfLaxMethod::Pruned;
  if (s == "fast_p2") return HopfLaxMethod::FastP2;
  fail(ErrorKind::ConfigInvalid, "unknown Hopf-Lax method '" + std::string(s) + "'");
}

GridField sample_field(const TestFunction& g, std::shared_ptr<const GridRule> rule, double t) {
  GridField f;
  f.values.resize(rule->size());
  Point x(static_cast<std::size_t>(rule->dimension()));
  for (std::size_t k = 0; k < rule->size(); ++k) {
    rule->node(rule->inside()[k], x);
    f.values[k] = g(x);
    if (!std::isfinite(f.values[k])) fail(ErrorKind::NonFiniteSample, "field is not finite at a grid node");
  }
  f.rule = std::move(rule);
  f.t = t;
  return f;
}

void set_hopf_lax_threads(int n) { g_threads.store(std::max(1, n)); }

double power_family_rate(double b, double p, double t, int sign) {
  const double q = p / (p - 1.0);
  const double s = 1.0 + sign * t * std::pow(b, p - 1.0);
  if (!(s > 0.0)) fail(ErrorKind::DomainError, "t b^{p-1} >= 1: the concave power family has no finite Q_t");
  return b / std::pow(s, q - 1.0);
}

bool on_box_edge(const GridRule& rule, std::size_t slot) {
  const auto m = rule.multi_index(rule.inside()[slot]);
  for (int a = 0; a < rule.dimension(); ++a) {
    if (m[a] == 0 || m[a] == rule.counts()[a] - 1) return true;
  }
  return false;
}

bool on_truncation_boundary(const GridRule& rule, std::size_t slot) {
  const std::size_t flat = rule.inside()[slot];
  const auto m = rule.multi_index(flat);
  Point x = rule.node(flat);
  for (int a = 0; a < rule.dimension(); ++a) {
    const double h = rule.spacing(a);
    for (int dir : {-1, 1}) {
      const bool edge = dir < 0 ? m[a] == 0 : m[a] == rule.counts()[a] - 1;
      if (!edge) continue;
      const double keep = x[a];
      x[a] += dir * h;
      const bool cut = rule.cone().contains(x);
      x[a] = keep;
      if (cut) return true;
    }
  }
  return false;
}

ConvolutionResult inf_convolve(const GridField& g, double t, double p, HopfLaxMethod method) {
  if (!g.rule) fail(ErrorKind::EmptyDomain, "field has no grid");
  if (g.values.empty()) fail(ErrorKind::EmptyDomain, "field has no nodes");
  if (g.values.size() != g.rule->size()) fail(ErrorKind::DomainError, "field does not match its grid");
  if (!(p > 1.0)) fail(ErrorKind::DomainError, "Hopf-Lax needs p > 1");
  if (!(t >= 0.0)) fail(ErrorKind::DomainError, "Hopf-Lax needs t >= 0");
  if (method == HopfLaxMethod::FastP2 && p != 2.0) {
    fail(ErrorKind::MethodCostMismatch, "fast_p2 only applies to the quadratic cost p = 2");
  }
  ConvolutionResult out;
  out.field.rule = g.rule;
  out.field.t = g.t + t;
  out.field.values.assign(g.values.size(), 0.0);
  out.argmin.resize(g.values.size());
  if (t == 0.0) {
    out.field.values = g.values;
    for (std::size_t i = 0; i < out.argmin.size(); ++i) out.argmin[i] = i;
    return out;
  }
  for (double v : g.values) {
    if (!std::isfinite(v)) fail(ErrorKind::NonFiniteSample, "field is not finite at a grid node");
  }
  const Cost cost(p, t);
  switch (method) {
    case HopfLaxMethod::Naive: naive(g, cost, Layout(*g.rule), out, g_threads.load()); break;
    case HopfLaxMethod::Pruned: pruned(g, cost, Layout(*g.rule), out, g_threads.load()); break;
    case HopfLaxMethod::FastP2: fast_p2(g, t, out); break;
  }
  std::size_t targets = 0, hits = 0;
  for (std::size_t i = 0; i < out.argmin.size(); ++i) {
    if (on_truncation_boundary(*g.rule, i)) continue;
    ++targets;
    if (on_truncation_boundary(*g.rule, out.argmin[i])) ++hits;
  }
  out.boundary_argmin_ratio = targets ? static_cast<double>(hits) / static_cast<double>(targets) : 0.0;
  return out;
}

HopfLaxRun run_hopf_lax(const GridField& g, double p, std::vector<double> times, HopfLaxMethod method) {
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (!(times[k] > 0.0) || (k > 0 && !(times[k] > times[k - 1]))) {
      fail(ErrorKind::DomainError, "time grid must be positive and strictly increasing");
    }
  }
  HopfLaxRun run;
  run.initial = g;
  run.p = p;
  run.method = method;
  run.times = std::move(times);
  for (double t : run.times) {
    auto res = inf_convolve(g, t, p, method);
    res.field.t = t;
    run.slices.push_back(std::move(res.field));
    run.boundary_argmin_ratio.push_back(res.boundary_argmin_ratio);
  }
  return run;
}

MonotonicityReport check_monotonicity(const HopfLaxRun& run, double tol) {
  MonotonicityReport rep;
  const auto& g = run.initial.values;
  for (std::size_t k = 0; k < run.slices.size(); ++k) {
    const auto& q = run.slices[k].values;
    const auto& prev = k == 0 ? g : run.slices[k - 1].values;
    for (std::size_t i = 0; i < q.size(); ++i) {
      const double over_g = q[i] - g[i];
      if (over_g > tol * std::max(1.0, std::abs(g[i]))) ++rep.above_initial;
      const double over_prev = q[i] - prev[i];
      if (over_prev > tol * std::max(1.0, std::abs(prev[i]))) ++rep.increasing_in_t;
      rep.worst = std::max({rep.worst, over_g, over_prev});
    }
  }
  return rep;
}

namespace {

double quantile(std::vector<double> v, double q) {
  if (v.empty()) return 0.0;
  const std::size_t k = std::min(v.size() - 1, static_cast<std::size_t>(q * static_cast<double>(v.size() - 1) + 0.5));
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(k), v.end());
  return v[k];
}

}  // namespace

HJResidual hj_residual(const HopfLaxRun& run, double tol) {
  if (run.slices.size() < 3) fail(ErrorKind::InsufficientSlices, "need at least 3 time slices");
  const double dt = run.times[1] - run.times[0];
  for (std::size_t k = 1; k + 1 < run.times.size(); ++k) {
    if (std::abs((run.times[k + 1] - run.times[k]) - dt) > 1e-9 * dt) {
      fail(ErrorKind::InsufficientSlices, "time slices must be uniformly spaced");
    }
  }
  const GridRule& rule = *run.initial.rule;
  const int n = rule.dimension();
  // Nodes with both neighbours inside along every axis.
  std::vector<std::size_t> interior;
  std::vector<std::vector<std::size_t>> nb;
  for (std::size_t s = 0; s < rule.size(); ++s) {
    const std::size_t flat = rule.inside()[s];
    const auto m = rule.multi_index(flat);
    std::vector<std::size_t> ids;
    bool ok = true;
    for (int a = 0; a < n && ok; ++a) {
      if (m[a] == 0 || m[a] == rule.counts()[a] - 1) {
        ok = false;
        break;
      }
      const std::size_t lo = rule.slot(flat - rule.stride(a));
      const std::size_t hi = rule.slot(flat + rule.stride(a));
      if (lo == GridRule::npos || hi == GridRule::npos) ok = false;
      ids.push_back(lo);
      ids.push_back(hi);
    }
    if (ok) {
      interior.push_back(s);
      nb.push_back(std::move(ids));
    }
  }
  HJResidual out;
  std::vector<double> all;
  std::size_t above = 0;
  for (std::size_t k = 1; k + 1 < run.slices.size(); ++k) {
    ResidualSlice slice;
    slice.t = run.times[k];
    const auto& qm = run.slices[k - 1].values;
    const auto& q0 = run.slices[k].values;
    const auto& qp = run.slices[k + 1].values;
    for (std::size_t j = 0; j < interior.size(); ++j) {
      const std::size_t s = interior[j];
      double g2 = 0.0;
      for (int a = 0; a < n; ++a) {
        const double d = (q0[nb[j][2 * a + 1]] - q0[nb[j][2 * a]]) / (2.0 * rule.spacing(a));
        g2 += d * d;
      }
      const double r = (qp[s] - qm[s]) / (2.0 * dt) + std::pow(g2, 0.5 * run.p) / run.p;
      slice.slots.push_back(s);
      slice.values.push_back(r);
      all.push_back(std::abs(r));
      if (std::abs(r) > tol) ++above;
    }
    out.slices.push_back(std::move(slice));
  }
  out.count = all.size();
  out.median = quantile(all, 0.5);
  out.p90 = quantile(all, 0.9);
  out.fraction_above = all.empty() ? 0.0 : static_cast<double>(above) / static_cast<double>(all.size());
  return out;
}

std::string_view to_string(Membership m) noexcept {
  switch (m) {
    case Membership::True: return "true";
    case Membership::False: return "false";
    case Membership::Indeterminate: return "indeterminate";
  }
  return "unknown";
}

MembershipReport membership_F_t0(const TestFunction& g, double t0, double p, PointView x0,
                                 std::shared_ptr<const GridRule> rule, std::uint64_t seed) {
  if (!(t0 > 0.0)) fail(ErrorKind::DomainError, "membership needs t0 > 0");
  const Cost cost(p, t0);
  const GridRule& r = *rule;
  MembershipReport rep;

  auto probe = [&](PointView y) {
    double d2 = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) d2 += (y[i] - x0[i]) * (y[i] - x0[i]);
    return g(y) + cost(d2);
  };

  rep.grid_min = kInf;
  double grid_max = -kInf;
  std::size_t arg = 0;
  Point y(static_cast<std::size_t>(r.dimension()));
  for (std::size_t k = 0; k < r.size(); ++k) {
    r.node(r.inside()[k], y);
    const double v = probe(y);
    grid_max = std::max(grid_max, g(y));
    if (v < rep.grid_min) {
      rep.grid_min = v;
      arg = k;
    }
  }
  rep.argmin_on_boundary = on_truncation_boundary(r, arg);

  // Ray shells R0 2^k beyond the box, with unit directions sampled in E.
  double r0 = 0.0;
  for (int a = 0; a < r.dimension(); ++a) r0 = std::max({r0, std::abs(r.lo()[a]), std::abs(r.hi()[a])});
  const auto dirs = sample_cone(r.cone(), 64, seed, 1.0, 1.0, 1e-3);
  const int shells = 24;
  std::vector<double> shell_max;
  for (int k = 0; k < shells; ++k) {
    const double rad = r0 * std::pow(2.0, k);
    double lo = kInf, hi = -kInf;
    for (const auto& d : dirs) {
      for (std::size_t i = 0; i < y.size(); ++i) y[i] = rad * d[i];
      const double gv = g(y);
      hi = std::max(hi, gv);
      lo = std::min(lo, probe(y));
    }
    rep.shell_min.push_back(lo);
    shell_max.push_back(hi);
  }

  // Bounded above: the outer third of the shells never exceeds what was
  // already seen closer in.
  double seen = grid_max;
  for (int k = 0; k < 2 * shells / 3; ++k) seen = std::max(seen, shell_max[k]);
  rep.bounded_above = std::isfinite(seen);
  for (int k = 2 * shells / 3; k < shells; ++k) {
    if (!std::isfinite(shell_max[k]) || shell_max[k] > seen + 1e-9 * std::max(1.0, std::abs(seen))) {
      rep.bounded_above = false;
    }
  }

  // Unbounded below: the outer shells decrease steadily far below the grid minimum.
  bool diverging = true;
  for (int k = shells - 4; k < shells; ++k) {
    if (!(rep.shell_min[k] < rep.shell_min[k - 1])) diverging = false;
  }
  const double floor = std::min(rep.grid_min, rep.shell_min.front());
  if (rep.shell_min.back() > floor - 1e6 * (1.0 + std::abs(floor))) diverging = false;

  if (!rep.bounded_above || diverging) {
    rep.result = Membership::False;
  } else if (rep.argmin_on_boundary) {
    rep.result = Membership::Indeterminate;
  } else {
    rep.result = Membership::True;
  }
  return rep;
}

InvolutionReport c_transform_involution(const TestFunction& g, double t, double p,
                                        std::shared_ptr<const GridRule> rule, HopfLaxMethod method) {
  const GridField g0 = sample_field(g, rule);
  const auto q1 = inf_convolve(g0, t, p, method);
  GridField neg = q1.field;
  for (double& v : neg.values) v = -v;
  const auto q2 = inf_convolve(neg, t, p, method);

  InvolutionReport rep;
  rep.min_gap = kInf;
  rep.max_gap = -kInf;
  for (std::size_t i = 0; i < g0.values.size(); ++i) {
    if (on_box_edge(*rule, i)) continue;
    const std::size_t a2 = q2.argmin[i];
    if (on_truncation_boundary(*rule, a2) || on_truncation_boundary(*rule, q1.argmin[a2])) continue;
    const double gap = q2.field.values[i] + g0.values[i];
    rep.max_abs_deviation = std::max(rep.max_abs_deviation, std::abs(gap));
    rep.min_gap = std::min(rep.min_gap, gap);
    rep.max_gap = std::max(rep.max_gap, gap);
    ++rep.nodes_used;
  }
  if (rep.nodes_used == 0) fail(ErrorKind::EmptyDomain, "no reliable interior node for the involution check");
  return rep;
}

}  // namespace conelab
