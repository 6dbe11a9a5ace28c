#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "spikes/kernel.hpp"
#include "spikes/montecarlo.hpp"
#include "spikes/point_process.hpp"
#include "spikes/rng.hpp"
#include "spikes/scoring.hpp"
#include "spikes/tilt.hpp"

namespace spikes {

/// Benchmark protocol: d renewal template trains (gaps 1 ms + Exp(mean 24 ms))
/// on [0, 500) scanned in Poisson background of 0.04 per ms.
struct Protocol {
  int table = 1;
  std::size_t d = 4;
  double rate = 0.04;
  double window = 500.0;
  double length = 20000.0;  // a + T
  double step = 0.2;
  double overlap_alpha = 0.5;
  std::vector<double> cs;

  double horizon() const { return length - window; }
  ScoreFunction score_function() const {
    if (table == 1) return ScoreFunction::hamming(5.0, 0.4);
    return ScoreFunction::box(4.0, Rational::parse("0.3"));
  }

  static Protocol for_table(int table) {
    Protocol p;
    p.table = table;
    switch (table) {
      case 1: p.cs = {0.017, 0.018, 0.019, 0.020, 0.021, 0.022}; break;
      case 2: p.cs = {0.065, 0.066, 0.067, 0.068, 0.069, 0.070}; break;
      case 3:
        p.length = 200000.0;
        p.overlap_alpha = 0.8;
        p.cs = {0.0614};
        break;
      default: throw Error(Errc::invalid_config, "table must be 1, 2 or 3");
    }
    return p;
  }

  MultiTrain make_template(std::uint64_t seed) const {
    return simulate_renewal_template(d, 24.0, 1.0, window, RngStream(seed, 0));
  }
};

struct PvalueRow {
  double c = 0.0;
  Estimate direct;
  Estimate importance;
  double analytic = 0.0;
  TiltSummary tilt;
};

struct PvalueTable {
  Protocol protocol;
  std::uint64_t seed = 0;
  std::size_t template_spikes = 0;
  double mu = 0.0;
  std::vector<PvalueRow> rows;
};

/// Direct MC, importance sampling and the analytic approximation of
/// P{M_a >= c} for every c of the protocol, on a template drawn from `seed`.
inline PvalueTable run_pvalue_table(const Protocol& p, std::uint64_t seed, std::size_t runs, unsigned threads) {
  require(p.table == 1 || p.table == 2, Errc::invalid_config, "p-value tables are 1 and 2");
  const MultiTrain templ = p.make_template(seed);
  const TemplateKernel gk = build_template_kernel(templ, p.score_function());
  const std::vector<double> rates(p.d, p.rate);
  PvalueTable out;
  out.protocol = p;
  out.seed = seed;
  out.template_spikes = templ.total_spikes();
  out.mu = mean_score(gk, rates);
  std::vector<double> cs = p.cs;
  if (p.table == 2)
    for (double& c : cs) c = round_threshold(c, Rational(1, 10), p.window);
  McConfig mc;
  mc.runs = runs;
  mc.step = p.step;
  mc.threads = threads;
  mc.seed = detail::splitmix64(seed ^ 0xd1ec7ULL);
  const auto direct = direct_mc_pvalues(gk, rates, p.horizon(), cs, mc);
  TiltOptions opt;
  opt.overshoot.seed = detail::splitmix64(seed ^ 0x0e5ULL);
  opt.overshoot.threads = threads;
  for (std::size_t k = 0; k < cs.size(); ++k) {
    PvalueRow row;
    row.c = cs[k];
    row.direct = direct[k];
    row.tilt = tilt_summary(gk, rates, cs[k], opt);
    row.analytic = pvalue_scan(row.tilt, p.horizon());
    McConfig is = mc;
    is.seed = detail::splitmix64(seed ^ (0x15ULL + k));
    row.importance = importance_sampling_pvalue(gk, rates, p.horizon(), cs[k], row.tilt.theta, is);
    out.rows.push_back(std::move(row));
  }
  return out;
}

inline void write_pvalue_csv(std::ostream& os, const PvalueTable& t) {
  os << "c,direct,direct_se,importance,importance_se,analytic,theta,phi,zeta\n";
  for (const auto& r : t.rows) {
    os << format_double(r.c) << ',' << format_double(r.direct.p) << ',' << format_double(r.direct.se) << ','
       << format_double(r.importance.p) << ',' << format_double(r.importance.se) << ',' << format_double(r.analytic)
       << ',' << format_double(r.tilt.theta) << ',' << format_double(r.tilt.phi) << ',' << format_double(r.tilt.zeta)
       << '\n';
  }
}

struct CountTable {
  Protocol protocol;
  std::uint64_t seed = 0;
  std::size_t template_spikes = 0;
  double c = 0.0;
  MatchCountLaw law;
  MatchCountEstimate mc;
  double tv = 0.0;  // total variation between the two pmfs
};

/// Empirical law of the match count U_a against its Poisson approximation.
inline CountTable run_count_table(const Protocol& p, std::uint64_t seed, std::size_t runs, unsigned threads,
                                  std::size_t kmax = 6) {
  require(p.table == 3, Errc::invalid_config, "the match-count table is table 3");
  const MultiTrain templ = p.make_template(seed);
  const TemplateKernel gk = build_template_kernel(templ, p.score_function());
  const std::vector<double> rates(p.d, p.rate);
  CountTable out;
  out.protocol = p;
  out.seed = seed;
  out.template_spikes = templ.total_spikes();
  out.c = round_threshold(p.cs.front(), Rational(1, 10), p.window);
  const TiltSummary s = tilt_summary(gk, rates, out.c);
  out.law = match_count_law(s, p.horizon(), kmax);
  MatchConfig cfg{out.c, p.window, p.horizon(), p.overlap_alpha, p.step};
  McConfig mc;
  mc.runs = runs;
  mc.step = p.step;
  mc.threads = threads;
  mc.seed = detail::splitmix64(seed ^ 0xc0047ULL);
  out.mc = mc_match_count(gk, rates, cfg, mc, kmax);
  for (std::size_t k = 0; k < out.law.pmf.size(); ++k) out.tv += 0.5 * std::abs(out.law.pmf[k] - out.mc.pmf[k]);
  return out;
}

inline void write_count_csv(std::ostream& os, const CountTable& t) {
  os << "k,direct,direct_se,poisson\n";
  const std::size_t kmax = t.law.pmf.size() - 1;
  for (std::size_t k = 0; k <= kmax; ++k) {
    os << (k == kmax ? ">=" + std::to_string(k) : std::to_string(k)) << ',' << format_double(t.mc.pmf[k]) << ','
       << format_double(t.mc.se[k]) << ',' << format_double(t.law.pmf[k]) << '\n';
  }
  os << "mean," << format_double(t.mc.mean) << ',' << format_double(t.mc.mean_se) << ',' << format_double(t.law.eta)
     << '\n';
}

}  // namespace spikes
