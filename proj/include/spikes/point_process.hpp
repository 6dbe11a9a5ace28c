#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "spikes/error.hpp"
#include "spikes/intensity.hpp"
#include "spikes/quadrature.hpp"
#include "spikes/rng.hpp"
#include "spikes/spike_train.hpp"

namespace spikes {

/// Homogeneous Poisson process with the given rate (per ms) on [0, length).
inline SpikeTrain simulate_poisson(double rate, double length, RngStream& rng) {
  require(rate >= 0.0 && std::isfinite(rate), Errc::invalid_parameter, "rate must be >= 0");
  require(length > 0.0 && std::isfinite(length), Errc::invalid_parameter, "length must be > 0");
  std::vector<double> times;
  if (rate > 0.0) {
    times.reserve(static_cast<std::size_t>(rate * length * 1.1) + 8);
    for (double t = rng.exponential(rate); t < length; t += rng.exponential(rate)) times.push_back(t);
  }
  return SpikeTrain(std::move(times), {0.0, length});
}

/// Renewal process whose gaps are deadtime + Exponential(mean = scale).
/// The first event is one gap after time 0.
inline SpikeTrain simulate_renewal_deadtime(double scale, double deadtime, double length, RngStream& rng) {
  require(scale > 0.0 && std::isfinite(scale), Errc::invalid_parameter, "scale must be > 0");
  require(deadtime >= 0.0 && std::isfinite(deadtime), Errc::invalid_parameter, "deadtime must be >= 0");
  require(length > 0.0 && std::isfinite(length), Errc::invalid_parameter, "length must be > 0");
  std::vector<double> times;
  const double rate = 1.0 / scale;
  for (double t = deadtime + rng.exponential(rate); t < length; t += deadtime + rng.exponential(rate)) {
    times.push_back(t);
  }
  return SpikeTrain(std::move(times), {0.0, length});
}

/// d independent dead-time renewal trains on [0, length).
inline MultiTrain simulate_renewal_template(std::size_t d, double scale, double deadtime, double length,
                                            const RngStream& rng) {
  std::vector<SpikeTrain> trains;
  for (std::size_t i = 0; i < d; ++i) {
    RngStream sub = rng.substream(i);
    trains.push_back(simulate_renewal_deadtime(scale, deadtime, length, sub));
  }
  return MultiTrain(std::move(trains));
}

/// Counting process with conditional intensity s(t) before the first spike
/// and s(t) r(t - last) afterwards, by thinning against the constant bound
/// sup s * max(1, sup r).
inline SpikeTrain simulate_modulated(const IntensityPair& model, double length, RngStream& rng) {
  require(length > 0.0 && std::isfinite(length), Errc::invalid_parameter, "length must be > 0");
  const double bound = model.sup_free() * std::max(1.0, model.sup_recovery());
  require(std::isfinite(bound), Errc::model_error, "intensity is unbounded");
  std::vector<double> times;
  if (bound <= 0.0) return SpikeTrain({}, {0.0, length});
  double last = std::numeric_limits<double>::quiet_NaN();
  for (double t = rng.exponential(bound); t < length; t += rng.exponential(bound)) {
    const double s = model.free_rate(t);
    const double r = std::isnan(last) ? 1.0 : model.recovery(t - last);
    const double lambda = s * r;
    require(lambda >= 0.0 && lambda <= bound * (1.0 + 1e-12), Errc::model_error,
            "intensity evaluation negative or above its bound");
    if (rng.uniform() * bound < lambda) {
      times.push_back(t);
      last = t;
    }
  }
  return SpikeTrain(std::move(times), {0.0, length});
}

namespace detail {

/// Sorted cut points of [a, b] at which the integrand s(t) r(t - last) may
/// lose smoothness.
inline void segment_cuts(const IntensityPair& model, double a, double b, double last,
                         std::vector<double>& cuts) {
  cuts.clear();
  cuts.push_back(a);
  for (double k : model.s().breakpoints())
    if (k > a && k < b) cuts.push_back(k);
  if (!std::isnan(last)) {
    for (double k : model.recovery_breaks()) {
      const double t = last + k;
      if (t > a && t < b) cuts.push_back(t);
    }
  }
  cuts.push_back(b);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
}

}  // namespace detail

/// Integral of the conditional intensity over [a, b] given the last spike
/// (NaN = no spike yet), Gauss-Legendre order 16 per smooth sub-segment.
inline double integrated_intensity(const IntensityPair& model, double a, double b, double last) {
  if (!(b > a)) return 0.0;
  thread_local std::vector<double> cuts;
  detail::segment_cuts(model, a, b, last, cuts);
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    total += quad::gauss_legendre<16>(
        [&](double t) {
          const double r = std::isnan(last) ? 1.0 : model.recovery(t - last);
          return model.free_rate(t) * r;
        },
        cuts[i], cuts[i + 1]);
  }
  return total;
}

/// Log Janossy density of one realization on its horizon [0, T):
///   -int_0^T s(t) r(t - w_N(t)) dt + sum_j log[s(w_j) r(w_j - w_{j-1})],
/// with r = 1 before the first spike. Returns -inf for impossible data.
inline double janossy_log_density(const IntensityPair& model, const SpikeTrain& train) {
  const Horizon h = train.horizon();
  double ll = 0.0;
  double prev = h.begin;
  double last = std::numeric_limits<double>::quiet_NaN();
  for (double w : train.times()) {
    ll -= integrated_intensity(model, prev, w, last);
    const double lambda = model.free_rate(w) * (std::isnan(last) ? 1.0 : model.recovery(w - last));
    if (!(lambda > 0.0)) return -std::numeric_limits<double>::infinity();
    ll += std::log(lambda);
    prev = w;
    last = w;
  }
  ll -= integrated_intensity(model, prev, h.end, last);
  return ll;
}

}  // namespace spikes
