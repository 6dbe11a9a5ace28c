#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <numeric>
#include <optional>
#include <vector>

#include <ceres/ceres.h>

#include "spikes/error.hpp"
#include "spikes/intensity.hpp"
#include "spikes/parallel.hpp"
#include "spikes/point_process.hpp"
#include "spikes/quadrature.hpp"
#include "spikes/rng.hpp"
#include "spikes/spike_train.hpp"

namespace spikes {

/// Sieve settings: floor delta_n = n^-alpha on g, m(n) = ceil(C n^{1/(2q+1)})
/// spline coefficients per function, multistart quasi-Newton.
struct SievePolicy {
  double alpha = 0.9;
  double basis_constant = 2.0;
  int degree = 3;
  Smoothness smoothness{1, 1.0};
  double eta_tol = 1e-8;
  int multistarts = 8;
  int max_iterations = 500;
  double start_spread = 0.3;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  std::optional<std::size_t> s_dim;  // overrides m(n) when set
  std::optional<std::size_t> r_dim;

  void validate() const {
    const double q = smoothness.q();
    require(q > 0.0, Errc::invalid_parameter, "smoothness q must be > 0");
    require(alpha > 2.0 * q / (2.0 * q + 1.0) && alpha < 1.0, Errc::invalid_parameter,
            "sieve exponent alpha must lie in (2q/(2q+1), 1)");
    require(basis_constant > 0.0, Errc::invalid_parameter, "basis constant must be > 0");
    require(degree >= 0 && degree <= 3, Errc::invalid_parameter, "sieve spline degree must be in [0, 3]");
    require(eta_tol > 0.0, Errc::invalid_parameter, "eta_tol must be > 0");
    require(multistarts >= 1, Errc::invalid_parameter, "need at least one start");
  }

  double floor_for(std::size_t n) const { return std::pow(static_cast<double>(n), -alpha); }
  std::size_t dim_for(std::size_t n) const {
    const double q = smoothness.q();
    const auto m = static_cast<std::size_t>(
        std::ceil(basis_constant * std::pow(static_cast<double>(n), 1.0 / (2.0 * q + 1.0)) - 1e-12));
    return std::max<std::size_t>(m, static_cast<std::size_t>(degree) + 1);
  }
};

struct FitReport {
  IntensityPair fitted;
  double mean_loglik = 0.0;
  double initial_loglik = 0.0;
  int iterations = 0;
  int best_start = 0;
  std::vector<double> start_logliks;
};

namespace detail {

/// Log-likelihood of spline coefficients with all basis evaluations
/// precomputed: quadrature nodes and spike positions do not move with the
/// parameters, so each evaluation is a pass over fixed design rows.
class SieveObjective {
 public:
  static constexpr int kWidth = 4;
  struct Row {
    double weight;        // quadrature weight (integral rows) or unused
    std::uint32_t s_first;
    std::int32_t r_first;  // -1: r = 1 (before the first spike)
    std::array<double, kWidth> s_basis;
    std::array<double, kWidth> r_basis;
  };

  SieveObjective(const std::vector<SpikeTrain>& data, BSpline s_template, BSpline r_template,
                 double deadtime, double floor)
      : s_(std::move(s_template)), r_(std::move(r_template)), deadtime_(deadtime), floor_(floor),
        n_(data.size()) {
    const auto& rule = quad::GaussLegendre<16>::instance();
    std::vector<double> cuts;
    for (const auto& tr : data) {
      double prev = tr.horizon().begin;
      double last = std::numeric_limits<double>::quiet_NaN();
      auto add_segment = [&](double a, double b) {
        if (!(b > a)) return;
        double lo = a;
        if (!std::isnan(last)) lo = std::max(a, last + deadtime_);  // r = 0 inside the dead time
        if (!(b > lo)) return;
        cuts.assign({lo, b});
        for (double k : s_.breakpoints())
          if (k > lo && k < b) cuts.push_back(k);
        if (!std::isnan(last))
          for (double k : r_.breakpoints())
            if (last + k > lo && last + k < b) cuts.push_back(last + k);
        std::sort(cuts.begin(), cuts.end());
        for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
          const double half = 0.5 * (cuts[i + 1] - cuts[i]);
          const double mid = 0.5 * (cuts[i + 1] + cuts[i]);
          if (!(half > 0.0)) continue;
          for (unsigned q = 0; q < 16; ++q) {
            const double t = mid + half * rule.x[q];
            integral_.push_back(make_row(t, last, half * rule.w[q]));
          }
        }
      };
      for (double w : tr.times()) {
        add_segment(prev, w);
        if (!std::isnan(last)) {
          require(w - last > deadtime_, Errc::fit_failure,
                  "data violate the dead time of every sieve candidate");
        }
        points_.push_back(make_row(w, last, 1.0));
        prev = w;
        last = w;
      }
      add_segment(prev, tr.horizon().end);
    }
  }

  std::size_t s_size() const { return s_.size(); }
  std::size_t r_size() const { return r_.size(); }
  std::size_t size() const { return s_.size() + r_.size(); }

  /// Mean log-likelihood; gradient (w.r.t. coefficients) if grad != nullptr.
  double evaluate(const double* x, double* grad) const {
    const double* cs = x;
    const double* cr = x + s_.size();
    if (grad) std::fill(grad, grad + size(), 0.0);
    double* gs = grad;
    double* gr = grad ? grad + s_.size() : nullptr;
    double total = 0.0;
    const int ws = s_.degree() + 1;
    const int wr = r_.degree() + 1;
    for (const Row& row : integral_) {
      double g = 0.0;
      for (int k = 0; k < ws; ++k) g += cs[row.s_first + k] * row.s_basis[k];
      const bool s_active = g > floor_;
      const double sv = s_active ? g : floor_;
      const double S = sv * sv;
      double R = 1.0, rv = 1.0;
      bool r_active = false;
      if (row.r_first >= 0) {
        double h = 0.0;
        for (int k = 0; k < wr; ++k) h += cr[row.r_first + k] * row.r_basis[k];
        r_active = h > floor_;
        rv = r_active ? h : floor_;
        R = rv * rv;
      }
      total -= row.weight * S * R;
      if (grad) {
        if (s_active) {
          const double c = -row.weight * 2.0 * sv * R;
          for (int k = 0; k < ws; ++k) gs[row.s_first + k] += c * row.s_basis[k];
        }
        if (r_active) {
          const double c = -row.weight * 2.0 * rv * S;
          for (int k = 0; k < wr; ++k) gr[row.r_first + k] += c * row.r_basis[k];
        }
      }
    }
    for (const Row& row : points_) {
      double g = 0.0;
      for (int k = 0; k < ws; ++k) g += cs[row.s_first + k] * row.s_basis[k];
      const bool s_active = g > floor_;
      const double sv = s_active ? g : floor_;
      total += 2.0 * std::log(sv);
      if (grad && s_active)
        for (int k = 0; k < ws; ++k) gs[row.s_first + k] += 2.0 / sv * row.s_basis[k];
      if (row.r_first >= 0) {
        double h = 0.0;
        for (int k = 0; k < wr; ++k) h += cr[row.r_first + k] * row.r_basis[k];
        const bool r_active = h > floor_;
        const double rv = r_active ? h : floor_;
        total += 2.0 * std::log(rv);
        if (grad && r_active)
          for (int k = 0; k < wr; ++k) gr[row.r_first + k] += 2.0 / rv * row.r_basis[k];
      }
    }
    const double inv_n = 1.0 / static_cast<double>(n_);
    if (grad)
      for (std::size_t i = 0; i < size(); ++i) grad[i] *= inv_n;
    return total * inv_n;
  }

 private:
  Row make_row(double t, double last, double weight) const {
    Row row{};
    row.weight = weight;
    row.s_first = static_cast<std::uint32_t>(s_.basis(t, row.s_basis));
    if (std::isnan(last)) {
      row.r_first = -1;
    } else {
      row.r_first = static_cast<std::int32_t>(r_.basis(t - last, row.r_basis));
    }
    return row;
  }

  BSpline s_;
  BSpline r_;
  double deadtime_;
  double floor_;
  std::size_t n_;
  std::vector<Row> integral_;
  std::vector<Row> points_;
};

class NegatedSieveObjective : public ceres::FirstOrderFunction {
 public:
  explicit NegatedSieveObjective(const SieveObjective& obj) : obj_(obj) {}
  bool Evaluate(const double* x, double* cost, double* grad) const override {
    *cost = -obj_.evaluate(x, grad);
    if (grad)
      for (std::size_t i = 0; i < obj_.size(); ++i) grad[i] = -grad[i];
    return std::isfinite(*cost);
  }
  int NumParameters() const override { return static_cast<int>(obj_.size()); }

 private:
  const SieveObjective& obj_;
};

}  // namespace detail

/// eta-sieve MLE of (s, r) from n i.i.d. trains on a common horizon [0, T).
/// The dead time is known model metadata; s is a spline on [0, T] and r a
/// spline on [deadtime, T], both squared with the floor delta_n on g.
inline FitReport fit_sieve_mle(const std::vector<SpikeTrain>& data, const SievePolicy& policy,
                               double deadtime = 0.0) {
  policy.validate();
  require(!data.empty(), Errc::invalid_parameter, "sieve MLE needs at least one train");
  const Horizon h = data.front().horizon();
  for (const auto& tr : data)
    require(tr.horizon() == h, Errc::invalid_parameter, "all trains must share one horizon");
  require(h.begin == 0.0, Errc::invalid_parameter, "training horizon must start at 0");
  const double T = h.end;
  require(deadtime >= 0.0 && deadtime < T, Errc::invalid_parameter, "dead time must lie in [0, T)");

  const std::size_t n = data.size();
  const double floor = policy.floor_for(n);
  const std::size_t ms = policy.s_dim.value_or(policy.dim_for(n));
  const std::size_t mr = policy.r_dim.value_or(policy.dim_for(n));
  const int ds = std::min<int>(policy.degree, static_cast<int>(ms) - 1);
  const int dr = std::min<int>(policy.degree, static_cast<int>(mr) - 1);
  BSpline s_spline = BSpline::uniform(0.0, T, ds, std::vector<double>(ms, 0.0));
  BSpline r_spline = BSpline::uniform(deadtime, T, dr, std::vector<double>(mr, 0.0));

  const detail::SieveObjective objective(data, s_spline, r_spline, deadtime, floor);

  std::size_t spikes = 0;
  for (const auto& tr : data) spikes += tr.size();
  const double base_s = std::max(std::sqrt(static_cast<double>(spikes) / (static_cast<double>(n) * T)), 2.0 * floor);
  const double base_r = std::max(1.0, 2.0 * floor);

  const auto starts = static_cast<std::size_t>(policy.multistarts);
  std::vector<std::vector<double>> params(starts);
  std::vector<double> init_values(starts), final_values(starts);
  std::vector<int> iterations(starts);
  RngStream start_rng(policy.seed, 0x51e7e);
  for (std::size_t k = 0; k < starts; ++k) {
    auto& x = params[k];
    x.resize(objective.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double base = i < ms ? base_s : base_r;
      const double jitter = k == 0 ? 0.0 : policy.start_spread * (2.0 * start_rng.uniform() - 1.0);
      x[i] = base * (1.0 + jitter);
    }
  }
  parallel_for(starts, policy.threads, [&](std::size_t k) {
    auto& x = params[k];
    init_values[k] = objective.evaluate(x.data(), nullptr);
    ceres::GradientProblem problem(new detail::NegatedSieveObjective(objective));
    ceres::GradientProblemSolver::Options options;
    options.line_search_direction_type = ceres::LBFGS;
    options.function_tolerance = policy.eta_tol;
    options.gradient_tolerance = 1e-12;
    options.parameter_tolerance = 1e-12;
    options.max_num_iterations = policy.max_iterations;
    options.logging_type = ceres::SILENT;
    ceres::GradientProblemSolver::Summary summary;
    std::vector<double> trial = x;
    ceres::Solve(options, problem, trial.data(), &summary);
    const double v = objective.evaluate(trial.data(), nullptr);
    if (std::isfinite(v) && v >= init_values[k]) {
      x = trial;
      final_values[k] = v;
    } else {
      final_values[k] = init_values[k];
    }
    iterations[k] = static_cast<int>(summary.iterations.size());
  });

  FitReport report;
  report.best_start = static_cast<int>(std::max_element(final_values.begin(), final_values.end()) -
                                       final_values.begin());
  require(std::isfinite(final_values[report.best_start]), Errc::fit_failure,
          "every start yielded an infinite objective");
  const auto& best = params[report.best_start];
  s_spline.coefs().assign(best.begin(), best.begin() + static_cast<std::ptrdiff_t>(ms));
  r_spline.coefs().assign(best.begin() + static_cast<std::ptrdiff_t>(ms), best.end());
  report.fitted = IntensityPair(SmoothNonneg(s_spline, floor, policy.smoothness),
                                SmoothNonneg(r_spline, floor, policy.smoothness), deadtime);
  report.mean_loglik = final_values[report.best_start];
  report.initial_loglik = init_values[0];
  report.iterations = std::accumulate(iterations.begin(), iterations.end(), 0);
  report.start_logliks = final_values;
  return report;
}

/// Mean Janossy log-likelihood of a model over a sample.
inline double mean_log_likelihood(const IntensityPair& model, const std::vector<SpikeTrain>& data) {
  double s = 0.0;
  for (const auto& tr : data) s += janossy_log_density(model, tr);
  return s / static_cast<double>(data.size());
}

/// L1 distances of a fitted pair to the truth: s over [0, T] and r over
/// [0, tstar] (r taken as zero inside each model's dead time).
inline std::pair<double, double> l1_errors(const IntensityPair& fitted, const IntensityPair& truth,
                                           double tstar) {
  const double T = truth.horizon();
  std::vector<double> sb = truth.s().breakpoints();
  sb.insert(sb.end(), fitted.s().breakpoints().begin(), fitted.s().breakpoints().end());
  const double ls = l1_distance([&](double t) { return fitted.free_rate(t); },
                                [&](double t) { return truth.free_rate(t); }, 0.0, T, sb);
  std::vector<double> rb = truth.recovery_breaks();
  const auto fb = fitted.recovery_breaks();
  rb.insert(rb.end(), fb.begin(), fb.end());
  const double lr = l1_distance([&](double u) { return fitted.recovery(u); },
                                [&](double u) { return truth.recovery(u); }, 0.0, tstar, rb);
  return {ls, lr};
}

struct RateStudyConfig {
  std::vector<std::size_t> n_grid;
  std::size_t replicates = 20;
  IntensityPair truth;
  SievePolicy policy;
  std::uint64_t seed = 1;
  double tstar_fraction = 0.9;
  unsigned threads = 1;
};

struct RateStudyRow {
  std::size_t n = 0;
  std::size_t replicate = 0;
  double l1_s = 0.0;
  double l1_r = 0.0;
};

struct RateStudyResult {
  std::vector<RateStudyRow> rows;
  std::vector<std::size_t> n_grid;
  std::vector<double> median_l1_s;
  std::vector<double> median_l1_r;
  double slope_s = 0.0;
  double slope_r = 0.0;
};

inline double median(std::vector<double> v) {
  require(!v.empty(), Errc::invalid_parameter, "median of empty sample");
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

/// Least-squares slope of log(y) against log(x).
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t k = x.size();
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= static_cast<double>(k);
  my /= static_cast<double>(k);
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

/// Empirical convergence study of the sieve MLE. Each replicate simulates
/// max(n_grid) trains once; smaller n use the leading prefix of that sample.
inline RateStudyResult rate_study(const RateStudyConfig& cfg) {
  require(cfg.replicates >= 1, Errc::invalid_config, "rate study needs at least one replicate");
  require(cfg.n_grid.size() >= 3, Errc::invalid_config, "rate study needs at least three sample sizes");
  for (std::size_t i = 0; i < cfg.n_grid.size(); ++i) {
    require(cfg.n_grid[i] >= 1, Errc::invalid_config, "sample sizes must be >= 1");
    require(i == 0 || cfg.n_grid[i] > cfg.n_grid[i - 1], Errc::invalid_config,
            "sample sizes must be strictly increasing");
  }
  require(cfg.tstar_fraction > 0.0 && cfg.tstar_fraction < 1.0, Errc::invalid_config,
          "T* fraction must lie in (0, 1)");
  cfg.policy.validate();
  const double T = cfg.truth.horizon();
  const std::size_t n_max = cfg.n_grid.back();
  const std::size_t jobs = cfg.replicates * cfg.n_grid.size();
  std::vector<RateStudyRow> rows(jobs);
  std::vector<std::vector<SpikeTrain>> samples(cfg.replicates);
  for (std::size_t rep = 0; rep < cfg.replicates; ++rep) {
    RngStream rng(cfg.seed, rep);
    for (std::size_t i = 0; i < n_max; ++i) {
      RngStream sub = rng.substream(i);
      samples[rep].push_back(simulate_modulated(cfg.truth, T, sub));
    }
  }
  parallel_for(jobs, cfg.threads, [&](std::size_t job) {
    const std::size_t rep = job / cfg.n_grid.size();
    const std::size_t n = cfg.n_grid[job % cfg.n_grid.size()];
    std::vector<SpikeTrain> data(samples[rep].begin(), samples[rep].begin() + static_cast<std::ptrdiff_t>(n));
    SievePolicy policy = cfg.policy;
    policy.threads = 1;
    policy.seed = detail::splitmix64(cfg.seed ^ (job * 0x9e3779b97f4a7c15ULL));
    const FitReport fit = fit_sieve_mle(data, policy, cfg.truth.deadtime());
    const auto [ls, lr] = l1_errors(fit.fitted, cfg.truth, cfg.tstar_fraction * T);
    rows[job] = {n, rep, ls, lr};
  });
  RateStudyResult out;
  out.n_grid = cfg.n_grid;
  for (std::size_t g = 0; g < cfg.n_grid.size(); ++g) {
    std::vector<double> es, er;
    for (const auto& row : rows)
      if (row.n == cfg.n_grid[g]) {
        es.push_back(row.l1_s);
        er.push_back(row.l1_r);
      }
    out.median_l1_s.push_back(median(es));
    out.median_l1_r.push_back(median(er));
  }
  std::vector<double> xs(cfg.n_grid.begin(), cfg.n_grid.end());
  out.slope_s = loglog_slope(xs, out.median_l1_s);
  out.slope_r = loglog_slope(xs, out.median_l1_r);
  std::sort(rows.begin(), rows.end(), [](const RateStudyRow& a, const RateStudyRow& b) {
    return a.n != b.n ? a.n < b.n : a.replicate < b.replicate;
  });
  out.rows = std::move(rows);
  return out;
}

}  // namespace spikes
