#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "spikes/error.hpp"
#include "spikes/intensity.hpp"
#include "spikes/quadrature.hpp"

namespace spikes {

/// Spike-occurrence density xi on the uniform grid t_k = k * step,
/// k = 0..K with K * step = T.
struct XiGrid {
  double step = 0.0;
  std::vector<double> values;

  double horizon() const { return step * static_cast<double>(values.size() - 1); }

  /// Trapezoid integral over [0, T].
  double integral() const {
    double s = 0.0;
    for (std::size_t k = 0; k + 1 < values.size(); ++k) s += 0.5 * (values[k] + values[k + 1]);
    return s * step;
  }

  /// Linear interpolation, clamped to the grid.
  double operator()(double t) const {
    if (t <= 0.0) return values.front();
    const double x = t / step;
    const std::size_t k = static_cast<std::size_t>(x);
    if (k + 1 >= values.size()) return values.back();
    const double f = x - static_cast<double>(k);
    return (1.0 - f) * values[k] + f * values[k + 1];
  }
};

namespace detail {

/// Time-stepping solver for the renewal identity
///   xi(t) = s(t) e^{-int_0^t s} + int_0^t xi(t-u) s(t) r(u) e^{-E(t,u)} du,
///   E(t,u) = int_{t-u}^t s(v) r(v-t+u) dv,
/// trapezoid in u, exposures E accumulated cell by cell with Gauss-Legendre.
/// `visit(k, t_k, free_survival, terms)` is called after xi_k is known, where
/// terms[m] = xi_m e^{-E(t_k, t_k - t_m)} for m <= k.
class RenewalSweep {
 public:
  RenewalSweep(const IntensityPair& model, double step) : model_(model) {
    require(step > 0.0 && std::isfinite(step), Errc::invalid_parameter, "xi step must be > 0");
    const double T = model.horizon();
    require(T > 0.0, Errc::invalid_parameter, "model horizon must be > 0");
    K_ = static_cast<std::size_t>(std::ceil(T / step - 1e-9));
    if (K_ == 0) K_ = 1;
    h_ = T / static_cast<double>(K_);
  }

  double step() const noexcept { return h_; }
  std::size_t cells() const noexcept { return K_; }

  template <class Visit>
  std::vector<double> run(Visit&& visit) {
    const double h = h_;
    std::vector<double> xi(K_ + 1, 0.0), exposure(K_ + 1, 0.0), terms(K_ + 1, 0.0);
    // r breakpoints grouped by the lag cell they fall into
    std::vector<std::vector<double>> lag_breaks(K_ + 1);
    for (double b : model_.recovery_breaks()) {
      if (b <= 0.0) continue;
      const auto j = static_cast<std::size_t>(std::ceil(b / h - 1e-12));
      if (j >= 1 && j <= K_ && b < static_cast<double>(j) * h) lag_breaks[j].push_back(b);
    }
    const auto& s_breaks = model_.s().breakpoints();
    double free_cum = 0.0;
    std::vector<double> cuts;
    for (std::size_t k = 0; k <= K_; ++k) {
      const double tk = static_cast<double>(k) * h;
      const double sk = model_.free_rate(tk);
      if (k > 0) {
        const double a = tk - h;
        std::vector<double> sc;
        for (double b : s_breaks)
          if (b > a && b < tk) sc.push_back(b);
        free_cum += piecewise_gl(a, tk, sc, [&](double v) { return model_.free_rate(v); });
        for (std::size_t m = 0; m < k; ++m) {
          const double tm = static_cast<double>(m) * h;
          const std::size_t j = k - m;
          cuts = sc;
          for (double b : lag_breaks[j]) cuts.push_back(tm + b);
          exposure[m] += piecewise_gl(a, tk, cuts, [&](double v) {
            return model_.free_rate(v) * model_.recovery(v - tm);
          });
        }
      }
      const double free_survival = std::exp(-free_cum);
      if (k == 0) {
        xi[0] = sk;
      } else {
        // xi_k = s_k A_k / M_k where M_k, the discrete mass of the age
        // distribution at t_k, is exactly 1 in the continuum; both contain
        // the implicit m = k term, giving a quadratic in xi_k.
        double acc = 0.0, mass = 0.0;
        for (std::size_t m = 0; m < k; ++m) {
          const double u = tk - static_cast<double>(m) * h;
          const double r = 0.5 * (model_.recovery_left(u) + model_.recovery_right(u));
          const double w = (m == 0) ? 0.5 : 1.0;
          const double e = w * xi[m] * std::exp(-exposure[m]);
          acc += e * r;
          mass += e;
        }
        const double A = free_survival + h * acc;
        const double B = free_survival + h * mass - 0.5 * h * sk * model_.recovery_right(0.0);
        const double disc = B * B + 2.0 * h * sk * A;
        xi[k] = sk * A > 0.0 ? 2.0 * sk * A / (B + std::sqrt(disc)) : 0.0;
      }
      for (std::size_t m = 0; m <= k; ++m) terms[m] = xi[m] * std::exp(-exposure[m]);
      visit(k, tk, free_survival, std::span<const double>(terms.data(), k + 1));
    }
    return xi;
  }

 private:
  template <class F>
  static double piecewise_gl(double a, double b, std::vector<double>& cuts, F&& f) {
    if (cuts.empty()) return quad::gauss_legendre<4>(f, a, b);
    std::sort(cuts.begin(), cuts.end());
    double total = 0.0;
    double lo = a;
    for (double c : cuts) {
      total += quad::gauss_legendre<4>(f, lo, c);
      lo = c;
    }
    return total + quad::gauss_legendre<4>(f, lo, b);
  }

  const IntensityPair& model_;
  std::size_t K_ = 0;
  double h_ = 0.0;
};

/// lambda1 - lambda - lambda log(lambda1/lambda), the pointwise KL integrand.
inline double kl_integrand(double lambda, double lambda1) {
  if (lambda <= 0.0) return lambda1;
  if (lambda1 <= 0.0) return std::numeric_limits<double>::infinity();
  return lambda1 - lambda - lambda * std::log(lambda1 / lambda);
}

}  // namespace detail

/// Solves for xi(t) = lim P[N(t+d) - N(t) = 1]/d on [0, T] with step ~h
/// (adjusted so the grid ends exactly at T). First order in h.
inline XiGrid solve_xi(const IntensityPair& model, double step) {
  detail::RenewalSweep sweep(model, step);
  XiGrid grid;
  grid.step = sweep.step();
  grid.values = sweep.run([](std::size_t, double, double, std::span<const double>) {});
  return grid;
}

/// KL divergence between the process laws of `truth` and `candidate` on
/// [0, T): the first-spike term weighted by s(t)e^{-int_0^t s} plus the
/// post-spike double integral weighted by xi(t-u) and the survival factor.
/// Returns +inf when the candidate intensity vanishes where the truth does not.
inline double kl_divergence(const IntensityPair& truth, const IntensityPair& candidate, double step = 0.05) {
  detail::RenewalSweep sweep(truth, step);
  const double h = sweep.step();
  std::vector<double> first(sweep.cells() + 1), second(sweep.cells() + 1);
  bool infinite = false;
  sweep.run([&](std::size_t k, double tk, double free_survival, std::span<const double> terms) {
    const double s = truth.free_rate(tk);
    const double s1 = candidate.free_rate(tk);
    const double d0 = detail::kl_integrand(s, s1);
    if (std::isinf(d0) && s * free_survival > 0.0) infinite = true;
    first[k] = std::isinf(d0) ? 0.0 : d0 * free_survival;
    double acc = 0.0, mass = 0.0;
    for (std::size_t m = 0; m <= k; ++m) {
      const double u = tk - static_cast<double>(m) * h;
      const double dl = detail::kl_integrand(s * truth.recovery_left(u), s1 * candidate.recovery_left(u));
      const double dr = detail::kl_integrand(s * truth.recovery_right(u), s1 * candidate.recovery_right(u));
      if ((std::isinf(dl) || std::isinf(dr)) && terms[m] > 0.0) infinite = true;
      const double d = 0.5 * ((std::isinf(dl) ? 0.0 : dl) + (std::isinf(dr) ? 0.0 : dr));
      const double w = (m == 0 || m == k) ? 0.5 : 1.0;
      acc += w * terms[m] * d;
      mass += w * terms[m];
    }
    // weights of the age distribution renormalized to their exact total 1
    const double total = k == 0 ? free_survival : free_survival + h * mass;
    first[k] /= total;
    second[k] = k == 0 ? 0.0 : acc * h / total;
  });
  if (infinite) return std::numeric_limits<double>::infinity();
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < first.size(); ++k) {
    total += 0.5 * h * (first[k] + first[k + 1] + second[k] + second[k + 1]);
  }
  return std::max(total, 0.0);
}

}  // namespace spikes
