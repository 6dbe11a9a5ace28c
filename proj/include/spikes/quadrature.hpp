#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace spikes::quad {

/// Full (symmetric) Gauss-Legendre rule on [-1, 1] with N points.
template <unsigned N>
struct GaussLegendre {
  std::array<double, N> x{};
  std::array<double, N> w{};

  GaussLegendre() {
    using rule = boost::math::quadrature::gauss<double, N>;
    const auto& a = rule::abscissa();
    const auto& wt = rule::weights();
    unsigned k = 0;
    // boost stores the nonnegative half; index 0 is the centre when N is odd.
    for (unsigned i = 0; i < a.size(); ++i) {
      if (a[i] == 0.0) {
        x[k] = 0.0;
        w[k++] = wt[i];
      } else {
        x[k] = -a[i];
        w[k++] = wt[i];
        x[k] = a[i];
        w[k++] = wt[i];
      }
    }
  }

  static const GaussLegendre& instance() {
    static const GaussLegendre rule;
    return rule;
  }
};

template <unsigned N = 16, class F>
double gauss_legendre(F&& f, double a, double b) {
  if (!(b > a)) return 0.0;
  const auto& rule = GaussLegendre<N>::instance();
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  double s = 0.0;
  for (unsigned i = 0; i < N; ++i) s += rule.w[i] * f(mid + half * rule.x[i]);
  return s * half;
}

/// Adaptive Gauss-Kronrod (15/31) over [a, b], split beforehand at the
/// given breakpoints so each call sees a smooth integrand.
template <class F>
double adaptive(F&& f, double a, double b, const std::vector<double>& breaks, double tol = 1e-10) {
  if (!(b > a)) return 0.0;
  std::vector<double> cuts{a};
  for (double c : breaks)
    if (c > a && c < b) cuts.push_back(c);
  cuts.push_back(b);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    total += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, cuts[i], cuts[i + 1], 20,
                                                                           tol);
  }
  return total;
}

}  // namespace spikes::quad
