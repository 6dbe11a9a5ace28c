#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "spikes/error.hpp"
#include "spikes/kernel.hpp"
#include "spikes/parallel.hpp"
#include "spikes/point_process.hpp"
#include "spikes/rng.hpp"
#include "spikes/scoring.hpp"
#include "spikes/tilt.hpp"

namespace spikes {

struct McConfig {
  std::size_t runs = 2000;
  std::uint64_t seed = 1;
  double step = 0.2;  // anchor spacing Delta (ms); J = a / Delta
  unsigned threads = 1;

  void validate() const {
    require(runs >= 1, Errc::invalid_config, "runs must be >= 1");
    require(step > 0.0 && std::isfinite(step), Errc::invalid_config, "anchor spacing must be > 0");
  }
};

struct Estimate {
  std::string method;
  double c = 0.0;
  double p = 0.0;
  double se = 0.0;
  std::size_t runs = 0;
  std::uint64_t seed = 0;
};

inline nlohmann::json to_json(const Estimate& e) {
  return {{"method", e.method}, {"c", e.c}, {"p_hat", e.p}, {"se", e.se}, {"runs", e.runs}, {"seed", e.seed}};
}

/// Data under P_{theta,t}: Poisson with intensity lambda_i e^{theta g^{(i)}(v - t)}
/// on [t, t + T) (thinning against lambda_i e^{theta max g}) and lambda_i
/// elsewhere on [0, length).
inline MultiTrain tilted_generate(const TemplateKernel& gk, const std::vector<double>& rates, double theta,
                                  double anchor, double length, RngStream& rng) {
  require(theta >= 0.0 && std::isfinite(theta), Errc::invalid_parameter, "tilt must be >= 0");
  require(rates.size() == gk.dim(), Errc::invalid_parameter, "one rate per template train is required");
  require(length > 0.0, Errc::invalid_parameter, "length must be > 0");
  const double T = gk.horizon();
  const double t0 = std::clamp(anchor, 0.0, length);
  const double t1 = std::min(anchor + T, length);
  std::vector<SpikeTrain> trains;
  trains.reserve(gk.dim());
  for (std::size_t i = 0; i < gk.dim(); ++i) {
    const double lam = rates[i];
    require(lam > 0.0, Errc::invalid_parameter, "rates must be > 0");
    const double top = gk[i].spikes ? gk.score_function().at_zero() : 0.0;
    std::vector<double> times;
    times.reserve(static_cast<std::size_t>(lam * length * 1.2) + 16);
    for (double t = rng.exponential(lam); t < t0; t += rng.exponential(lam)) times.push_back(t);
    const double bound = lam * std::exp(theta * top);
    for (double t = t0 + rng.exponential(bound); t < t1; t += rng.exponential(bound)) {
      const double accept = std::exp(theta * (gk[i](t - anchor) - top));
      if (rng.uniform() <= accept) times.push_back(t);
    }
    for (double t = t1 + rng.exponential(lam); t < length; t += rng.exponential(lam)) times.push_back(t);
    trains.emplace_back(std::move(times), Horizon{0.0, length});
  }
  return MultiTrain(std::move(trains), rates);
}

/// Independent homogeneous Poisson trains on [0, length).
inline MultiTrain simulate_background(const std::vector<double>& rates, double length, RngStream& rng) {
  std::vector<SpikeTrain> trains;
  for (double lam : rates) trains.push_back(simulate_poisson(lam, length, rng));
  return MultiTrain(std::move(trains), rates);
}

namespace detail {

/// Per-run summary of M_a in value and (if on a lattice) integer units.
struct RunMax {
  double value;
  std::int64_t units;
};

inline bool reaches(const ScoreSeries& proto, const RunMax& m, double c) {
  const Threshold th = Threshold::on(proto, c);
  return th.lattice ? m.units >= th.units : m.value >= c;
}

inline ScoreSeries prototype(const ScoreEngine& engine, const ScoreSeries& s) {
  ScoreSeries p;
  p.window = s.window;
  p.horizon = engine.horizon();
  p.quantum = s.quantum;
  return p;
}

inline RunMax run_max(const ScoreSeries& s) {
  RunMax m{-std::numeric_limits<double>::infinity(), std::numeric_limits<std::int64_t>::min()};
  for (std::size_t k = 0; k < s.size(); ++k) {
    m.value = std::max(m.value, s.values[k]);
    if (s.lattice()) m.units = std::max(m.units, s.units[k]);
  }
  return m;
}

inline void mean_se(const std::vector<double>& x, double& mean, double& se) {
  const auto n = static_cast<double>(x.size());
  mean = 0.0;
  for (double v : x) mean += v;
  mean /= n;
  double ss = 0.0;
  for (double v : x) ss += (v - mean) * (v - mean);
  se = x.size() > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0;
}

}  // namespace detail

/// Direct Monte Carlo of P{M_a >= c} for several thresholds from one set of
/// simulated recordings; SE = sqrt(p(1-p)/runs).
inline std::vector<Estimate> direct_mc_pvalues(const TemplateKernel& gk, const std::vector<double>& rates, double a,
                                               const std::vector<double>& cs, const McConfig& mc) {
  mc.validate();
  const ScoreEngine engine(gk, a, mc.step);
  const double length = a + gk.horizon();
  std::vector<detail::RunMax> maxima(mc.runs);
  ScoreSeries proto;
  parallel_for(mc.runs, mc.threads, [&](std::size_t run) {
    RngStream rng(mc.seed, run);
    const MultiTrain y = simulate_background(rates, length, rng);
    const ScoreSeries s = engine.series(y);
    maxima[run] = detail::run_max(s);
    if (run == 0) proto = detail::prototype(engine, s);
  });
  std::vector<Estimate> out;
  for (double c : cs) {
    std::size_t hits = 0;
    for (const auto& m : maxima) hits += detail::reaches(proto, m, c) ? 1 : 0;
    Estimate e;
    e.method = "direct";
    e.c = c;
    e.runs = mc.runs;
    e.seed = mc.seed;
    e.p = static_cast<double>(hits) / static_cast<double>(mc.runs);
    e.se = std::sqrt(e.p * (1.0 - e.p) / static_cast<double>(mc.runs));
    out.push_back(e);
  }
  return out;
}

inline Estimate direct_mc_pvalue(const TemplateKernel& gk, const std::vector<double>& rates, const MatchConfig& cfg,
                                 const McConfig& mc) {
  cfg.validate();
  require(std::abs(cfg.window - gk.horizon()) <= 1e-9 * gk.horizon(), Errc::invalid_config,
          "match window must equal the template horizon");
  return direct_mc_pvalues(gk, rates, cfg.horizon, {cfg.c}, mc).front();
}

/// Importance-sampling estimate of P{M_a >= c}: per run an anchor j is drawn
/// uniformly from {0..J}, the data are tilted at j * Delta, and the run
/// contributes (J+1) e^{T m0(theta)} / sum_k e^{theta T S_{k Delta}} when
/// M_a >= c (all in log space).
inline Estimate importance_sampling_pvalue(const TemplateKernel& gk, const std::vector<double>& rates, double a,
                                           double c, double theta, const McConfig& mc) {
  mc.validate();
  require(theta > 0.0 && std::isfinite(theta), Errc::invalid_parameter, "tilt must be > 0");
  const ScoreEngine engine(gk, a, mc.step);
  const double T = gk.horizon();
  const double length = a + T;
  const std::size_t J1 = engine.grid_size();
  const double log_norm = std::log(static_cast<double>(J1)) + T * tilted_moments(gk, rates, theta).m0;
  std::vector<double> contrib(mc.runs, 0.0);
  parallel_for(mc.runs, mc.threads, [&](std::size_t run) {
    RngStream rng(mc.seed, run);
    const std::size_t j = static_cast<std::size_t>(rng.below(J1));
    const MultiTrain y = tilted_generate(gk, rates, theta, engine.grid_time(j), length, rng);
    const ScoreSeries grid = engine.grid_series(y);
    bool hit;
    if (engine.exact()) {
      const ScoreSeries ex = engine.exact_series(y);
      hit = detail::reaches(ex, detail::run_max(ex), c);
    } else {
      hit = detail::reaches(grid, detail::run_max(grid), c);
    }
    if (!hit) return;
    double top = -std::numeric_limits<double>::infinity();
    for (double v : grid.values) top = std::max(top, theta * T * v);
    double sum = 0.0;
    for (double v : grid.values) sum += std::exp(theta * T * v - top);
    contrib[run] = std::exp(log_norm - top - std::log(sum));
  });
  Estimate e;
  e.method = "importance";
  e.c = c;
  e.runs = mc.runs;
  e.seed = mc.seed;
  detail::mean_se(contrib, e.p, e.se);
  return e;
}

struct MatchCountEstimate {
  std::vector<double> pmf;  // k = 0..kmax-1, last entry P{U >= kmax}
  std::vector<double> se;
  double mean = 0.0;
  double mean_se = 0.0;
  std::size_t runs = 0;
  std::vector<std::size_t> counts;  // U_a per run
};

/// Empirical law of U_a over direct Monte Carlo runs.
inline MatchCountEstimate mc_match_count(const TemplateKernel& gk, const std::vector<double>& rates,
                                         const MatchConfig& cfg, const McConfig& mc, std::size_t kmax = 6) {
  cfg.validate();
  mc.validate();
  require(std::abs(cfg.window - gk.horizon()) <= 1e-9 * gk.horizon(), Errc::invalid_config,
          "match window must equal the template horizon");
  const ScoreEngine engine(gk, cfg.horizon, mc.step);
  const double length = cfg.horizon + gk.horizon();
  MatchCountEstimate out;
  out.runs = mc.runs;
  out.counts.assign(mc.runs, 0);
  parallel_for(mc.runs, mc.threads, [&](std::size_t run) {
    RngStream rng(mc.seed, run);
    const MultiTrain y = simulate_background(rates, length, rng);
    out.counts[run] = count_matches(engine.series(y), cfg).count;
  });
  out.pmf.assign(kmax + 1, 0.0);
  std::vector<double> u(mc.runs);
  for (std::size_t r = 0; r < mc.runs; ++r) {
    out.pmf[std::min(out.counts[r], kmax)] += 1.0;
    u[r] = static_cast<double>(out.counts[r]);
  }
  const auto n = static_cast<double>(mc.runs);
  for (double& p : out.pmf) {
    p /= n;
    out.se.push_back(std::sqrt(p * (1.0 - p) / n));
  }
  detail::mean_se(u, out.mean, out.mean_se);
  return out;
}

}  // namespace spikes
