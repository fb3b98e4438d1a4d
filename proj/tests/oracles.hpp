#pragma once

// Independent reference integrators for the tests. Deliberately simple
// (composite Gauss-Legendre on fixed panels, plain Riemann sums) and
// sharing no code with the library's quadrature.

#include <array>
#include <cmath>
#include <functional>
#include <numbers>

namespace oracle {

// 10-point Gauss-Legendre on [-1, 1].
inline constexpr std::array<double, 5> kGLx = {0.1488743389816312, 0.4333953941292472, 0.6794095682990244,
                                               0.8650633666889845, 0.9739065285171717};
inline constexpr std::array<double, 5> kGLw = {0.2955242247147529, 0.2692667193099963, 0.2190863625159820,
                                               0.1494513491505806, 0.0666713443086881};

inline double gauss_legendre(const std::function<double(double)>& f, double a, double b, int panels) {
  double total = 0.0;
  const double h = (b - a) / panels;
  for (int k = 0; k < panels; ++k) {
    const double c = a + (k + 0.5) * h;
    double s = 0.0;
    for (std::size_t i = 0; i < kGLx.size(); ++i) {
      s += kGLw[i] * (f(c - 0.5 * h * kGLx[i]) + f(c + 0.5 * h * kGLx[i]));
    }
    total += 0.5 * h * s;
  }
  return total;
}

// int_0^R f(r) r^{m-1} dr with a graded substitution r = R s^k that tames
// the algebraic behaviour at the origin.
inline double radial(const std::function<double(double)>& f, double m, double R, int panels = 4000) {
  const double k = 4.0;
  return gauss_legendre(
      [&](double s) {
        if (s <= 0.0) return 0.0;
        const double r = R * std::pow(s, k);
        return f(r) * std::pow(r, m - 1.0) * R * k * std::pow(s, k - 1.0);
      },
      0.0, 1.0, panels);
}

// Midpoint rule over [lo, hi]^2 with an indicator.
inline double riemann2d(const std::function<double(double, double)>& f, double lo0, double hi0, double lo1,
                        double hi1, int n) {
  const double h0 = (hi0 - lo0) / n;
  const double h1 = (hi1 - lo1) / n;
  double s = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) s += f(lo0 + (i + 0.5) * h0, lo1 + (j + 0.5) * h1);
  }
  return s * h0 * h1;
}

// 2D Gauss-Legendre tensor product on a box.
inline double gl2d(const std::function<double(double, double)>& f, double lo0, double hi0, double lo1, double hi1,
                   int panels) {
  return gauss_legendre(
      [&](double x) { return gauss_legendre([&](double y) { return f(x, y); }, lo1, hi1, panels); }, lo0, hi0,
      panels);
}

}  // namespace oracle
