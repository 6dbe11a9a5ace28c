#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include "spikes/error.hpp"
#include "spikes/quadrature.hpp"

namespace spikes {

inline constexpr int kMaxSplineDegree = 5;

/// Clamped B-spline on [lo, hi] given by its breakpoints (distinct knots,
/// ends included), polynomial degree and coefficient vector.
/// Number of coefficients = breakpoints - 1 + degree.
class BSpline {
 public:
  BSpline() = default;
  BSpline(int degree, std::vector<double> breakpoints, std::vector<double> coefs)
      : degree_(degree), breaks_(std::move(breakpoints)), coefs_(std::move(coefs)) {
    require(degree_ >= 0 && degree_ <= kMaxSplineDegree, Errc::invalid_parameter,
            "spline degree out of range");
    require(breaks_.size() >= 2, Errc::invalid_parameter, "spline needs at least two breakpoints");
    for (std::size_t i = 1; i < breaks_.size(); ++i)
      require(breaks_[i] > breaks_[i - 1], Errc::invalid_parameter, "spline breakpoints must increase");
    require(coefs_.size() == breaks_.size() - 1 + static_cast<std::size_t>(degree_),
            Errc::invalid_parameter, "spline coefficient count does not match knots");
    knots_.assign(static_cast<std::size_t>(degree_), breaks_.front());
    knots_.insert(knots_.end(), breaks_.begin(), breaks_.end());
    knots_.insert(knots_.end(), static_cast<std::size_t>(degree_), breaks_.back());
  }

  /// Uniform breakpoints on [lo, hi] with `ncoef` basis functions.
  static BSpline uniform(double lo, double hi, int degree, std::vector<double> coefs) {
    const int pieces = static_cast<int>(coefs.size()) - degree;
    require(pieces >= 1, Errc::invalid_parameter, "too few coefficients for the spline degree");
    require(hi > lo, Errc::invalid_parameter, "spline interval must have positive length");
    std::vector<double> br(static_cast<std::size_t>(pieces) + 1);
    for (int j = 0; j <= pieces; ++j) br[j] = lo + (hi - lo) * j / pieces;
    br.back() = hi;
    return BSpline(degree, std::move(br), std::move(coefs));
  }

  int degree() const noexcept { return degree_; }
  double lo() const noexcept { return breaks_.front(); }
  double hi() const noexcept { return breaks_.back(); }
  const std::vector<double>& breakpoints() const noexcept { return breaks_; }
  const std::vector<double>& coefs() const noexcept { return coefs_; }
  std::vector<double>& coefs() noexcept { return coefs_; }
  std::size_t size() const noexcept { return coefs_.size(); }

  /// Index of the first nonzero basis function at t and the degree+1
  /// basis values. t is clamped to [lo, hi].
  std::size_t basis(double t, std::span<double> out) const {
    const int p = degree_;
    t = std::clamp(t, lo(), hi());
    // span: piece j with breaks_[j] <= t < breaks_[j+1] (last piece closed)
    auto it = std::upper_bound(breaks_.begin(), breaks_.end(), t);
    std::size_t j = static_cast<std::size_t>(it - breaks_.begin());
    j = j == 0 ? 0 : j - 1;
    if (j >= breaks_.size() - 1) j = breaks_.size() - 2;
    const std::size_t span = j + static_cast<std::size_t>(p);  // index into knots_
    std::array<double, kMaxSplineDegree + 1> left{}, right{};
    out[0] = 1.0;
    for (int r = 1; r <= p; ++r) {
      left[r] = t - knots_[span + 1 - r];
      right[r] = knots_[span + r] - t;
      double saved = 0.0;
      for (int k = 0; k < r; ++k) {
        const double tmp = out[k] / (right[k + 1] + left[r - k]);
        out[k] = saved + right[k + 1] * tmp;
        saved = left[r - k] * tmp;
      }
      out[r] = saved;
    }
    return j;
  }

  double operator()(double t) const {
    std::array<double, kMaxSplineDegree + 1> b{};
    const std::size_t first = basis(t, b);
    double v = 0.0;
    for (int k = 0; k <= degree_; ++k) v += coefs_[first + k] * b[k];
    return v;
  }

  /// Convex-hull bound: |g| <= max |coef| everywhere.
  double abs_bound() const {
    double m = 0.0;
    for (double c : coefs_) m = std::max(m, std::abs(c));
    return m;
  }

 private:
  int degree_ = 0;
  std::vector<double> breaks_;
  std::vector<double> knots_;
  std::vector<double> coefs_;
};

/// Smoothness metadata of the q-smooth class: q = q0 + q1.
struct Smoothness {
  int q0 = 1;
  double q1 = 1.0;
  double q() const noexcept { return q0 + q1; }
};

/// Nonnegative function f(t) = (max(g(t), floor))^2 with g a B-spline.
class SmoothNonneg {
 public:
  SmoothNonneg() = default;
  SmoothNonneg(BSpline g, double floor, Smoothness smooth = {}, std::vector<double> kappa = {})
      : g_(std::move(g)), floor_(floor), smooth_(smooth), kappa_(std::move(kappa)) {
    require(floor_ >= 0.0 && std::isfinite(floor_), Errc::invalid_parameter, "floor must be >= 0");
    if (!kappa_.empty()) {
      const auto& br = g_.breakpoints();
      for (std::size_t i = 0; i + 1 < br.size(); ++i) {
        const double mid = 0.5 * (br[i] + br[i + 1]);
        require(std::abs(g_(mid)) <= kappa_.front(), Errc::invalid_parameter,
                "|g| exceeds kappa_0 at a knot midpoint");
      }
    }
  }

  /// Constant function equal to `value` on [lo, hi].
  static SmoothNonneg constant(double value, double lo, double hi) {
    require(value >= 0.0, Errc::invalid_parameter, "constant intensity must be >= 0");
    return SmoothNonneg(BSpline(0, {lo, hi}, {std::sqrt(value)}), 0.0);
  }

  /// Piecewise-constant function with the given levels on consecutive pieces.
  static SmoothNonneg piecewise_constant(std::vector<double> breakpoints, const std::vector<double>& levels) {
    std::vector<double> c;
    for (double v : levels) {
      require(v >= 0.0, Errc::invalid_parameter, "piecewise levels must be >= 0");
      c.push_back(std::sqrt(v));
    }
    return SmoothNonneg(BSpline(0, std::move(breakpoints), std::move(c)), 0.0);
  }

  double operator()(double t) const {
    const double v = std::max(g_(t), floor_);
    return v * v;
  }
  double root(double t) const { return std::max(g_(t), floor_); }

  const BSpline& spline() const noexcept { return g_; }
  BSpline& spline() noexcept { return g_; }
  double floor() const noexcept { return floor_; }
  const Smoothness& smoothness() const noexcept { return smooth_; }
  const std::vector<double>& kappa() const noexcept { return kappa_; }
  double lo() const noexcept { return g_.lo(); }
  double hi() const noexcept { return g_.hi(); }
  const std::vector<double>& breakpoints() const noexcept { return g_.breakpoints(); }

  /// Upper bound on sup f, exact for the representation.
  double sup_bound() const {
    const double m = std::max(g_.abs_bound(), floor_);
    return m * m;
  }

 private:
  BSpline g_;
  double floor_ = 0.0;
  Smoothness smooth_;
  std::vector<double> kappa_;
};

/// The (s, r) model: conditional intensity s(t) before the first spike and
/// s(t) r(t - last spike) afterwards; r vanishes on [0, deadtime].
class IntensityPair {
 public:
  IntensityPair() = default;
  IntensityPair(SmoothNonneg s, SmoothNonneg r, double deadtime = 0.0)
      : s_(std::move(s)), r_(std::move(r)), deadtime_(deadtime) {
    require(deadtime_ >= 0.0 && std::isfinite(deadtime_), Errc::invalid_parameter,
            "dead time must be >= 0");
  }

  const SmoothNonneg& s() const noexcept { return s_; }
  const SmoothNonneg& r() const noexcept { return r_; }
  double deadtime() const noexcept { return deadtime_; }
  double horizon() const noexcept { return s_.hi(); }

  double free_rate(double t) const { return s_(t); }
  /// Recovery at lag u >= 0; zero on the closed dead-time interval.
  double recovery(double u) const {
    if (deadtime_ > 0.0 && u <= deadtime_) return 0.0;
    return r_(u);
  }
  double recovery_left(double u) const { return recovery(u); }
  double recovery_right(double u) const {
    if (deadtime_ > 0.0 && u < deadtime_) return 0.0;
    return r_(u);
  }

  /// Breakpoints of the recovery function (lags), including the dead time.
  std::vector<double> recovery_breaks() const {
    std::vector<double> b = r_.breakpoints();
    if (deadtime_ > 0.0) b.push_back(deadtime_);
    std::sort(b.begin(), b.end());
    return b;
  }

  double sup_free() const { return s_.sup_bound(); }
  double sup_recovery() const { return r_.sup_bound(); }

 private:
  SmoothNonneg s_;
  SmoothNonneg r_;
  double deadtime_ = 0.0;
};

/// L1 distance of two functions on [a, b] by adaptive quadrature split at
/// the supplied breakpoints.
template <class F1, class F2>
double l1_distance(F1&& f1, F2&& f2, double a, double b, const std::vector<double>& breaks,
                   double rel_tol = 1e-8) {
  auto diff = [&](double t) { return std::abs(f1(t) - f2(t)); };
  return quad::adaptive(diff, a, b, breaks, rel_tol * 1e-2);
}

inline double l1_distance(const SmoothNonneg& f1, const SmoothNonneg& f2, double a, double b) {
  require(b >= a, Errc::invalid_parameter, "l1 interval reversed");
  std::vector<double> br = f1.breakpoints();
  br.insert(br.end(), f2.breakpoints().begin(), f2.breakpoints().end());
  return l1_distance([&](double t) { return f1(t); }, [&](double t) { return f2(t); }, a, b, br);
}

}  // namespace spikes
