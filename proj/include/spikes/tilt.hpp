#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <vector>

#include <boost/math/tools/roots.hpp>

#include "spikes/error.hpp"
#include "spikes/kernel.hpp"
#include "spikes/parallel.hpp"
#include "spikes/rational.hpp"
#include "spikes/rng.hpp"

namespace spikes {

/// Aggregated tilted integrals T^{-1} sum_i lambda_i I_k^{(i)}(theta).
struct TiltedMoments {
  double m0 = 0.0;  // T^{-1} sum lambda_i int (e^{theta g} - 1)
  double m1 = 0.0;  // tilted mean of S
  double m2 = 0.0;  // v
  double m3 = 0.0;  // tau
};

inline TiltedMoments tilted_moments(const TemplateKernel& gk, const std::vector<double>& rates, double theta) {
  require(rates.size() == gk.dim(), Errc::invalid_parameter, "one rate per template train is required");
  const double T = gk.horizon();
  TiltedMoments m;
  for (std::size_t i = 0; i < gk.dim(); ++i) {
    require(rates[i] > 0.0, Errc::invalid_parameter, "rates must be > 0");
    const KernelIntegrals k = gk.integrals(i, theta);
    m.m0 += rates[i] * (k.i0 - T);
    m.m1 += rates[i] * k.i1;
    m.m2 += rates[i] * k.i2;
    m.m3 += rates[i] * k.i3;
  }
  m.m0 /= T;
  m.m1 /= T;
  m.m2 /= T;
  m.m3 /= T;
  return m;
}

/// mu_w = T^{-1} sum_i lambda_i int g^{(i)}: the untilted mean of S_t.
inline double mean_score(const TemplateKernel& gk, const std::vector<double>& rates) {
  return tilted_moments(gk, rates, 0.0).m1;
}

/// Probability mass function on jump sizes.
struct JumpDistribution {
  std::vector<double> support;
  std::vector<double> tilted;   // h_w*: weights e^{theta g(u-)}
  std::vector<double> plain;    // h_w: weights e^{theta g(u+)}
  double z_tilted = 0.0;        // sum lambda e^{theta g(u-)}
  double z_plain = 0.0;         // sum lambda e^{theta g(u+)}
  double gamma = 1.0;           // z_plain / z_tilted: h* = gamma e^{theta x} h
  Span span;                    // chi

  double tilted_mean() const {
    double m = 0.0;
    for (std::size_t k = 0; k < support.size(); ++k) m += support[k] * tilted[k];
    return m;
  }
};

inline JumpDistribution jump_distribution(const TemplateKernel& gk, double theta, const std::vector<double>& rates) {
  require(gk.has_jumps(), Errc::wrong_branch, "jump distribution needs a kernel with jumps");
  require(rates.size() == gk.dim(), Errc::invalid_parameter, "one rate per template train is required");
  JumpDistribution jd;
  jd.span = jump_span(gk);
  struct Atom {
    double x;
    std::optional<Rational> exact;
    double wt, wp;
  };
  std::vector<Atom> atoms;
  for (std::size_t i = 0; i < gk.dim(); ++i)
    for (const auto& j : gk[i].jumps) {
      const double wt = rates[i] * std::exp(theta * j.left);
      const double wp = rates[i] * std::exp(theta * j.right);
      jd.z_tilted += wt;
      jd.z_plain += wp;
      auto same = [&](const Atom& a) {
        if (a.exact && j.exact_delta) return *a.exact == *j.exact_delta;
        return a.x == j.delta;
      };
      auto it = std::find_if(atoms.begin(), atoms.end(), same);
      if (it == atoms.end()) {
        atoms.push_back({j.delta, j.exact_delta, wt, wp});
      } else {
        it->wt += wt;
        it->wp += wp;
      }
    }
  std::sort(atoms.begin(), atoms.end(), [](const Atom& a, const Atom& b) { return a.x < b.x; });
  for (const auto& a : atoms) {
    jd.support.push_back(a.x);
    jd.tilted.push_back(a.wt / jd.z_tilted);
    jd.plain.push_back(a.wp / jd.z_plain);
  }
  jd.gamma = jd.z_plain / jd.z_tilted;
  return jd;
}

struct Overshoot {
  double nu = 1.0;
  double se = 0.0;
  bool exact = false;
  std::size_t walks = 0;
};

struct OvershootConfig {
  std::size_t walks_per_level = 100000;
  std::uint64_t seed = 1;
  unsigned threads = 1;
};

/// nu_w = lim_b E_* e^{-theta (R_b - b)} for the walk with steps ~ h_w*.
/// When the only positive step is the span chi itself, the walk (on chi Z)
/// meets every level exactly and nu = 1. Otherwise a Monte Carlo average
/// over b in {10, 20, ..., 50} chi (arithmetic) or uniform b in
/// [10, 50] x max step (nonarithmetic).
inline Overshoot overshoot_nu(const JumpDistribution& jd, double theta, const OvershootConfig& cfg = {}) {
  require(!jd.support.empty(), Errc::wrong_branch, "empty jump distribution");
  const double drift = jd.tilted_mean();
  require(drift > 0.0, Errc::divergence, "nonpositive drift under the tilted jump law");
  std::vector<double> positive;
  for (std::size_t k = 0; k < jd.support.size(); ++k)
    if (jd.support[k] > 0.0 && jd.tilted[k] > 0.0) positive.push_back(jd.support[k]);
  Overshoot out;
  if (jd.span.arithmetic && positive.size() == 1 && positive.front() == jd.span.value) {
    out.exact = true;
    return out;
  }
  // alias-free sampling by cumulative table
  std::vector<double> cdf(jd.tilted.size());
  std::partial_sum(jd.tilted.begin(), jd.tilted.end(), cdf.begin());
  cdf.back() = 1.0;
  const double top = *std::max_element(jd.support.begin(), jd.support.end());
  constexpr std::size_t kLevels = 5;
  const std::size_t total = cfg.walks_per_level * kLevels;
  require(total >= 2, Errc::invalid_config, "overshoot needs at least two walks");
  std::vector<double> result(total);
  constexpr std::size_t kBlock = 4096;
  const std::size_t blocks = (total + kBlock - 1) / kBlock;
  parallel_for(blocks, cfg.threads, [&](std::size_t blk) {
    RngStream rng(cfg.seed, blk);
    for (std::size_t w = blk * kBlock; w < std::min(total, (blk + 1) * kBlock); ++w) {
      double b;
      if (jd.span.arithmetic) {
        b = static_cast<double>(10 * (w % kLevels + 1)) * jd.span.value;
      } else {
        b = top * (10.0 + 40.0 * rng.uniform());
      }
      double s = 0.0;
      // lattice levels compared with a relative guard against float drift
      const double guard = jd.span.arithmetic ? 1e-9 * jd.span.value : 0.0;
      while (s < b - guard) {
        const double u = rng.uniform();
        const auto k = static_cast<std::size_t>(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
        s += jd.support[std::min(k, jd.support.size() - 1)];
      }
      const double over = std::max(0.0, s - b);
      result[w] = std::exp(-theta * (jd.span.arithmetic && over < guard ? 0.0 : over));
    }
  });
  double mean = 0.0;
  for (double r : result) mean += r;
  mean /= static_cast<double>(total);
  double ss = 0.0;
  for (double r : result) ss += (r - mean) * (r - mean);
  out.nu = mean;
  out.se = std::sqrt(ss / static_cast<double>(total - 1) / static_cast<double>(total));
  out.walks = total;
  return out;
}

/// Lattice correction K_w given the span q of f and chi of h_w*.
inline double k_factor(const Span& f_span, const Span& chi, double theta) {
  if (!chi.arithmetic) return 1.0;
  const double x = theta * chi.value;
  if (!f_span.arithmetic) return x == 0.0 ? 1.0 : -std::expm1(-x) / x;
  if (f_span.exact && chi.exact) {
    require((*chi.exact / *f_span.exact).is_integer(), Errc::inconsistent_span, "chi / q is not a positive integer");
  } else {
    const double r = chi.value / f_span.value;
    require(std::abs(r - std::round(r)) <= 1e-9 * r && std::round(r) >= 1.0, Errc::inconsistent_span,
            "chi / q is not a positive integer");
  }
  const double q = f_span.value;
  if (theta == 0.0) return 1.0;
  return (q / chi.value) * std::expm1(-x) / std::expm1(-theta * q);
}

enum class Branch { continuous, discontinuous };

struct TiltSummary {
  double c = 0.0;
  double T = 0.0;
  std::vector<double> rates;
  double mu = 0.0;
  double theta = 0.0;
  double phi = 0.0;
  double v = 0.0;
  double tau = 0.0;
  Branch branch = Branch::continuous;
  double zeta = 0.0;  // zeta_w or zeta'_w by branch
  // discontinuous branch
  std::optional<JumpDistribution> jumps;
  Span f_span;
  Overshoot nu;
  double K = 1.0;
  double jump_sum = 0.0;  // sum lambda_i sum_u delta_i(u) e^{theta g(u-)}
  int solver_iterations = 0;
  double tilted_mean_residual = 0.0;
};

struct TiltOptions {
  OvershootConfig overshoot;
};

namespace detail {

/// theta > 0 with tilted mean = c; bracket grown geometrically.
inline double solve_theta(const TemplateKernel& gk, const std::vector<double>& rates, double c, int& iters) {
  auto mean_at = [&](double th) { return tilted_moments(gk, rates, th).m1; };
  double hi = 1.0;
  while (mean_at(hi) < c) {
    hi *= 2.0;
    require(hi < 1e8, Errc::divergence, "tilt parameter diverges; threshold unreachable");
  }
  double lo = hi > 1.0 ? hi / 2.0 : 0.0;
  std::uintmax_t max_iter = 200;
  const double guess = 0.5 * (lo + hi);
  const double root = boost::math::tools::newton_raphson_iterate(
      [&](double th) {
        const TiltedMoments m = tilted_moments(gk, rates, th);
        return std::make_pair(m.m1 - c, m.m2);
      },
      guess, lo, hi, 52, max_iter);
  iters = static_cast<int>(max_iter);
  return root;
}

}  // namespace detail

/// All large-deviation constants for one (kernel, rates, threshold).
inline TiltSummary tilt_summary(const TemplateKernel& gk, const std::vector<double>& rates, double c,
                                const TiltOptions& opt = {}) {
  TiltSummary s;
  s.c = c;
  s.T = gk.horizon();
  s.rates = rates;
  s.mu = mean_score(gk, rates);
  require(std::isfinite(c) && c > s.mu, Errc::subcritical_threshold,
          "subcritical threshold: c must exceed the mean score mu_w = " + format_double(s.mu));
  s.theta = detail::solve_theta(gk, rates, c, s.solver_iterations);
  const TiltedMoments m = tilted_moments(gk, rates, s.theta);
  s.tilted_mean_residual = m.m1 - c;
  s.phi = s.theta * c - m.m0;
  s.v = m.m2;
  s.tau = m.m3;
  if (!gk.has_jumps()) {
    s.branch = Branch::continuous;
    require(s.tau > 0.0, Errc::wrong_branch, "continuous kernel with vanishing derivative");
    s.zeta = std::sqrt(s.tau / s.v) / (2.0 * std::numbers::pi);
    return s;
  }
  s.branch = Branch::discontinuous;
  s.jumps = jump_distribution(gk, s.theta, rates);
  s.f_span = detect_arithmetic(gk.score_function());
  s.nu = overshoot_nu(*s.jumps, s.theta, opt.overshoot);
  s.K = k_factor(s.f_span, s.jumps->span, s.theta);
  for (std::size_t i = 0; i < gk.dim(); ++i)
    for (const auto& j : gk[i].jumps) s.jump_sum += rates[i] * j.delta * std::exp(s.theta * j.left);
  s.zeta = s.nu.nu * s.K * s.jump_sum / std::sqrt(2.0 * std::numbers::pi * s.T * s.v);
  return s;
}

/// Analytic P{M_a >= c} = 1 - exp(-a zeta e^{-T phi}).
inline double pvalue_scan(const TiltSummary& s, double a) {
  require(a > 0.0, Errc::invalid_parameter, "horizon a must be > 0");
  const double eta = a * s.zeta * std::exp(-s.T * s.phi);
  return -std::expm1(-eta);
}

/// Gumbel tail 1 - exp(-e^{-z}).
inline double gumbel_pvalue(double z) { return -std::expm1(-std::exp(-z)); }

/// z = theta T (M - c_w) - log zeta from a summary computed at c_w.
inline double gumbel_z(const TiltSummary& at_cw, double max_score) {
  return at_cw.theta * at_cw.T * (max_score - at_cw.c) - std::log(at_cw.zeta);
}

/// c_w > mu_w with phi_w(c_w) = log(a) / T, solved in the tilt parameter
/// (phi along the tilt path has derivative theta * v > 0).
inline double solve_cw(const TemplateKernel& gk, const std::vector<double>& rates, double a) {
  const double T = gk.horizon();
  require(a > 1.0 && std::log(a) / T > 0.0, Errc::invalid_horizon, "log(a)/T must be > 0");
  const double target = std::log(a) / T;
  auto phi_at = [&](double th) {
    const TiltedMoments m = tilted_moments(gk, rates, th);
    return std::make_pair(th * m.m1 - m.m0 - target, th * m.m2);
  };
  double hi = 1.0;
  while (phi_at(hi).first < 0.0) {
    hi *= 2.0;
    require(hi < 1e8, Errc::divergence, "rate function never reaches log(a)/T");
  }
  const double lo = hi > 1.0 ? hi / 2.0 : 0.0;
  std::uintmax_t iters = 200;
  const double th = boost::math::tools::newton_raphson_iterate(phi_at, 0.5 * (lo + hi), lo, hi, 52, iters);
  return tilted_moments(gk, rates, th).m1;
}

struct MatchCountLaw {
  double eta = 0.0;
  std::vector<double> pmf;  // k = 0..kmax-1, then P{U >= kmax} last
};

/// Poisson law of U_a with eta = a zeta e^{-T phi}; the last entry is the
/// upper tail P{U >= kmax}.
inline MatchCountLaw match_count_law(const TiltSummary& s, double a, std::size_t kmax = 6) {
  MatchCountLaw law;
  law.eta = a * s.zeta * std::exp(-s.T * s.phi);
  double p = std::exp(-law.eta);
  double acc = 0.0;
  for (std::size_t k = 0; k < kmax; ++k) {
    law.pmf.push_back(p);
    acc += p;
    p *= law.eta / static_cast<double>(k + 1);
  }
  law.pmf.push_back(std::max(0.0, 1.0 - acc));
  return law;
}

/// Nearest c' with T c' in qZ (ties up); c is returned unchanged when it is
/// already on the lattice.
inline double round_threshold(double c, const Rational& q, double T) {
  require(q > Rational(0) && T > 0.0, Errc::invalid_parameter, "span and window must be > 0");
  const double x = T * c / q.to_double();
  const double n = std::round(x);
  if (std::abs(x - n) <= 1e-9 * std::max(1.0, std::abs(x))) return c;
  double k = std::floor(x);
  const double frac = x - k;
  if (frac >= 0.5 - 1e-9) k += 1.0;
  return k * static_cast<double>(q.num()) / (static_cast<double>(q.den()) * T);
}

inline nlohmann::json to_json(const TiltSummary& s) {
  nlohmann::json j;
  j["c"] = s.c;
  j["T"] = s.T;
  j["rates"] = s.rates;
  j["mu"] = s.mu;
  j["theta"] = s.theta;
  j["phi"] = s.phi;
  j["v"] = s.v;
  j["tau"] = s.tau;
  j["branch"] = s.branch == Branch::continuous ? "continuous" : "discontinuous";
  if (s.branch == Branch::continuous) {
    j["zeta"] = s.zeta;
  } else {
    j["zeta_prime"] = s.zeta;
    j["nu"] = s.nu.nu;
    j["nu_se"] = s.nu.se;
    j["nu_exact"] = s.nu.exact;
    j["K"] = s.K;
    j["chi"] = s.jumps->span.str();
    j["q"] = s.f_span.str();
    j["gamma"] = s.jumps->gamma;
    j["jump_sum"] = s.jump_sum;
    nlohmann::json h = nlohmann::json::array();
    for (std::size_t k = 0; k < s.jumps->support.size(); ++k)
      h.push_back({{"x", s.jumps->support[k]}, {"h_star", s.jumps->tilted[k]}, {"h", s.jumps->plain[k]}});
    j["jump_distribution"] = h;
  }
  j["solver"] = {{"iterations", s.solver_iterations}, {"tilted_mean_residual", s.tilted_mean_residual}};
  return j;
}

}  // namespace spikes
