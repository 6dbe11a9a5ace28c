// Acceptance harness: one PASS/FAIL line per criterion, artifacts written to
// the directory given as argv[1] (default ./acceptance_artifacts).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <initializer_list>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "spikes/spikes.hpp"

using namespace spikes;

namespace {

struct Scale {
  std::size_t table_runs = 2000;
  std::size_t templates = 3;
  std::size_t count_runs = 2000;
  std::size_t tilt_pairs = 20;
  std::size_t tilt_runs = 10000;
  std::size_t oracle_instances = 2000;
  std::size_t kl_pairs = 5;
  std::size_t kl_runs = 10000;
  std::size_t rate_replicates = 20;
  std::vector<std::size_t> rate_grid{25, 50, 100, 200, 400};
  unsigned threads = 1;

  static Scale quick(unsigned threads) {
    Scale s;
    s.table_runs = 40;
    s.templates = 1;
    s.count_runs = 30;
    s.tilt_pairs = 3;
    s.tilt_runs = 300;
    s.oracle_instances = 200;
    s.kl_pairs = 2;
    s.kl_runs = 300;
    s.rate_replicates = 2;
    s.rate_grid = {25, 50, 100};
    s.threads = threads;
    return s;
  }
};

struct Outcome {
  bool pass = false;
  std::string detail;
  std::string artifact;
};

std::string fmt(double x, int prec = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", prec, x);
  return buf;
}

// Criteria 1, 2 and 4 -------------------------------------------------------

struct TableRun {
  std::vector<PvalueTable> tables;
  std::string artifact;
};

TableRun run_tables(int table, const Scale& sc) {
  TableRun out;
  const Protocol p = Protocol::for_table(table);
  std::ostringstream os;
  for (std::size_t k = 0; k < sc.templates; ++k) {
    const std::uint64_t seed = 1 + k;
    out.tables.push_back(run_pvalue_table(p, seed, sc.table_runs, sc.threads));
    os << "# template seed " << seed << " spikes " << out.tables.back().template_spikes << " mu "
       << format_double(out.tables.back().mu) << '\n';
    write_pvalue_csv(os, out.tables.back());
  }
  out.artifact = os.str();
  return out;
}

bool row_agrees(const PvalueRow& r) {
  const double se_is = r.importance.se;
  const double joint = std::sqrt(r.direct.se * r.direct.se + se_is * se_is);
  return std::abs(r.analytic - r.importance.p) <= 3.0 * se_is && std::abs(r.direct.p - r.importance.p) <= 3.0 * joint;
}

Outcome judge_table(const TableRun& run, int table) {
  Outcome o;
  o.pass = true;
  std::ostringstream d;
  for (const auto& t : run.tables) {
    std::size_t good = 0;
    for (const auto& r : t.rows) good += row_agrees(r) ? 1 : 0;
    d << "template " << t.seed << ": " << good << "/6 rows agree; ";
    o.pass = o.pass && good >= 5;
  }
  if (table == 2) {
    bool exact = true;
    for (const auto& t : run.tables)
      for (const auto& r : t.rows) {
        const TiltSummary& s = r.tilt;
        const bool spans = s.f_span.exact && *s.f_span.exact == Rational(1, 10) && s.jumps &&
                           s.jumps->span.exact && *s.jumps->span.exact == Rational(13, 10);
        const double q = 0.1, chi = 1.3;
        const double k3 = (q / chi) * (1.0 - std::exp(-s.theta * chi)) / (1.0 - std::exp(-s.theta * q));
        exact = exact && spans && s.nu.exact && s.nu.nu == 1.0 && std::abs(s.K - k3) <= 1e-12 * k3;
      }
    d << (exact ? "nu = 1 exactly and K from the lattice formula in every row" : "nu/K pipeline mismatch");
    o.pass = o.pass && exact;
  }
  o.detail = d.str();
  o.artifact = run.artifact;
  return o;
}

Outcome judge_variance(const TableRun& t1, const TableRun& t2) {
  Outcome o;
  o.pass = true;
  std::ostringstream d, art;
  art << "table,template,c,direct_se,importance_se\n";
  for (const auto* run : {&t1, &t2}) {
    for (const auto& t : run->tables) {
      const PvalueRow& r = t.rows.back();
      const bool ok = r.importance.se <= r.direct.se / 2.0;
      o.pass = o.pass && ok;
      d << "T" << t.protocol.table << "/" << t.seed << " ratio " << fmt(r.direct.se / r.importance.se, 3) << "; ";
      art << t.protocol.table << ',' << t.seed << ',' << format_double(r.c) << ',' << format_double(r.direct.se)
          << ',' << format_double(r.importance.se) << '\n';
    }
  }
  o.detail = d.str();
  o.artifact = art.str();
  return o;
}

// Criterion 3 ---------------------------------------------------------------

Outcome criterion3(const Scale& sc) {
  Outcome o;
  const CountTable t = run_count_table(Protocol::for_table(3), 1, sc.count_runs, sc.threads);
  const bool tv_ok = t.tv <= 0.05;
  const bool mean_ok = std::abs(t.mc.mean - t.law.eta) <= 2.0 * t.mc.mean_se;
  o.pass = tv_ok && mean_ok;
  o.detail = "c " + fmt(t.c) + ", eta " + fmt(t.law.eta) + ", MC mean " + fmt(t.mc.mean) + " +- " +
             fmt(t.mc.mean_se, 2) + ", TV " + fmt(t.tv, 3);
  std::ostringstream os;
  os << "# template seed 1 spikes " << t.template_spikes << " c " << format_double(t.c) << '\n';
  write_count_csv(os, t);
  o.artifact = os.str();
  return o;
}

// Criterion 5 ---------------------------------------------------------------

Outcome criterion5(const Scale& sc) {
  Outcome o;
  o.pass = true;
  std::ostringstream art;
  art << "pair,kernel,d,T,c,theta,analytic_residual,empirical_mean,se\n";
  double worst_z = 0.0, worst_res = 0.0;
  for (std::size_t k = 0; k < sc.tilt_pairs; ++k) {
    RngStream rng(505, k);
    const std::size_t d = 1 + rng.below(4);
    const double T = std::round(100.0 + 400.0 * rng.uniform());
    const MultiTrain templ = simulate_renewal_template(d, 24.0, 1.0, T, rng.substream(1));
    const double eps = 2.0 + 4.0 * rng.uniform();
    static const char* betas[] = {"0", "1/10", "3/10", "1/2"};
    const ScoreFunction f = k % 2 == 0 ? ScoreFunction::hamming(eps, 0.5 * rng.uniform())
                                       : ScoreFunction::box(eps, Rational::parse(betas[rng.below(4)]));
    const TemplateKernel gk = build_template_kernel(templ, f);
    std::vector<double> rates(d);
    for (double& r : rates) r = 0.02 + 0.04 * rng.uniform();
    const TiltedMoments null = tilted_moments(gk, rates, 0.0);
    const double c = null.m1 + (1.0 + 3.0 * rng.uniform()) * std::sqrt(null.m2 / T);
    int iters = 0;
    const double theta = detail::solve_theta(gk, rates, c, iters);
    const double residual = tilted_moments(gk, rates, theta).m1 - c;
    std::vector<double> scores(sc.tilt_runs);
    parallel_for(sc.tilt_runs, sc.threads, [&](std::size_t run) {
      RngStream r(5050 + k, run);
      const MultiTrain y = tilted_generate(gk, rates, theta, 0.0, T, r);
      scores[run] = score_at(y, gk, 0.0);
    });
    double mean = 0.0, se = 0.0;
    detail::mean_se(scores, mean, se);
    const double z = std::abs(mean - c) / se;
    worst_z = std::max(worst_z, z);
    worst_res = std::max(worst_res, std::abs(residual));
    o.pass = o.pass && z <= 3.0 && std::abs(residual) <= 1e-10;
    art << k << ',' << f.describe() << ',' << d << ',' << format_double(T) << ',' << format_double(c) << ','
        << format_double(theta) << ',' << format_double(residual) << ',' << format_double(mean) << ','
        << format_double(se) << '\n';
  }
  o.detail = "worst |mean - c| / SE " + fmt(worst_z, 3) + ", worst analytic residual " + fmt(worst_res, 2);
  o.artifact = art.str();
  return o;
}

// Criterion 6 ---------------------------------------------------------------

struct OracleInstance {
  MultiTrain templ;
  MultiTrain data;
  double eps;
  Rational beta;
  double a;
};

/// S_t T / q by brute force: g(u) = max over template spikes of f(|u - w|).
std::int64_t oracle_units(const OracleInstance& in, Rational q, double t) {
  const double T = in.templ.horizon().end;
  Rational sum(0);
  for (std::size_t i = 0; i < in.templ.dim(); ++i) {
    if (in.templ[i].empty()) continue;
    for (double y : in.data[i].times()) {
      const double u = y - t;
      if (u < 0.0 || u >= T) continue;
      bool near = false;
      for (double w : in.templ[i].times()) near = near || std::abs(u - w) < in.eps;
      sum = sum + (near ? Rational(1) : -in.beta);
    }
  }
  const Rational n = sum / q;
  return n.num();
}

struct OracleResult {
  std::vector<double> times;
  std::vector<std::int64_t> units;
};

OracleResult oracle_series(const OracleInstance& in, Rational q) {
  const double T = in.templ.horizon().end;
  std::vector<double> cand{0.0};
  for (std::size_t i = 0; i < in.templ.dim(); ++i) {
    std::vector<double> us{0.0, T};
    for (double w : in.templ[i].times()) {
      us.push_back(w - in.eps);
      us.push_back(w + in.eps);
    }
    for (double y : in.data[i].times())
      for (double u : us) {
        const double t = y - u;
        if (t > 0.0 && t < in.a) cand.push_back(t);
      }
  }
  std::sort(cand.begin(), cand.end());
  cand.erase(std::unique(cand.begin(), cand.end()), cand.end());
  OracleResult r;
  for (std::size_t k = 0; k < cand.size(); ++k) {
    const double hi = k + 1 < cand.size() ? cand[k + 1] : in.a;
    const std::int64_t v = oracle_units(in, q, 0.5 * (cand[k] + hi));
    if (!r.units.empty() && r.units.back() == v) continue;
    r.times.push_back(cand[k]);
    r.units.push_back(v);
  }
  return r;
}

/// Onsets from the level set {S >= c} written as half-open intervals.
std::vector<double> oracle_onsets(const OracleResult& s, std::int64_t cu, double a, double gap) {
  std::vector<std::pair<double, double>> set;
  for (std::size_t k = 0; k < s.times.size(); ++k) {
    if (s.units[k] < cu) continue;
    const double hi = k + 1 < s.times.size() ? s.times[k + 1] : a;
    if (!set.empty() && set.back().second == s.times[k]) set.back().second = hi;
    else set.emplace_back(s.times[k], hi);
  }
  std::vector<double> onsets;
  double barrier = -1.0;
  for (;;) {
    double next = std::numeric_limits<double>::infinity();
    for (const auto& [l, h] : set)
      if (h > barrier) {
        next = std::max(l, barrier);
        break;
      }
    if (!(next <= a)) break;
    onsets.push_back(next);
    barrier = next + gap;
  }
  return onsets;
}

Outcome criterion6(const Scale& sc) {
  Outcome o;
  o.pass = true;
  std::size_t mismatches = 0, crossings = 0;
  std::ostringstream art;
  art << "instance,M_units,V_c,U_a\n";
  static const char* betas[] = {"0", "1/10", "3/10", "1/2", "-1/5", "2/3"};
  for (std::size_t k = 0; k < sc.oracle_instances; ++k) {
    RngStream rng(606, k);
    OracleInstance in;
    const std::size_t d = 1 + rng.below(2);
    const double T = std::round(20.0 + 40.0 * rng.uniform());
    in.eps = static_cast<double>(1 + rng.below(6));
    in.beta = Rational::parse(betas[rng.below(6)]);
    in.a = std::round(5.0 + (2.0 * T - 5.0) * rng.uniform());
    const double length = in.a + T;
    std::vector<SpikeTrain> tt, yy;
    std::vector<std::vector<double>> data_times(d);
    const std::size_t n_data = 1 + rng.below(3);
    for (std::size_t j = 0; j < n_data; ++j) data_times[rng.below(d)].push_back(length * rng.uniform());
    for (std::size_t i = 0; i < d; ++i) {
      std::vector<double> w;
      const std::size_t m = rng.below(4);
      for (std::size_t j = 0; j < m; ++j) w.push_back(T * rng.uniform());
      std::sort(w.begin(), w.end());
      w.erase(std::unique(w.begin(), w.end()), w.end());
      tt.emplace_back(w, Horizon{0.0, T});
      auto& y = data_times[i];
      std::sort(y.begin(), y.end());
      y.erase(std::unique(y.begin(), y.end()), y.end());
      yy.emplace_back(y, Horizon{0.0, length});
    }
    in.templ = MultiTrain(tt);
    in.data = MultiTrain(yy);
    const ScoreFunction f = ScoreFunction::box(in.eps, in.beta);
    const Rational q = detect_arithmetic(f).exact.value();
    const TemplateKernel gk = build_template_kernel(in.templ, f);
    const ScoreEngine engine(gk, in.a, 1.0);
    const ScoreSeries s = engine.exact_series(in.data);
    const OracleResult orc = oracle_series(in, q);

    // threshold: an attained level most of the time, otherwise random
    std::int64_t cu;
    if (rng.uniform() < 0.8) cu = orc.units[rng.below(orc.units.size())];
    else cu = static_cast<std::int64_t>(rng.below(7)) - 2;
    const double c = static_cast<double>(cu) * q.to_double() / T;
    const double alpha = std::array<double, 3>{0.2, 0.5, 0.8}[rng.below(3)];
    MatchConfig cfg{c, T, in.a, alpha, 1.0};
    const MatchReport rep = count_matches(s, cfg);
    const auto [m_a, v_c] = scan_summary(s, c);

    const std::int64_t m_units = *std::max_element(s.units.begin(), s.units.end());
    const std::int64_t m_oracle = *std::max_element(orc.units.begin(), orc.units.end());
    double v_oracle = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < orc.times.size(); ++j)
      if (orc.units[j] >= cu) {
        v_oracle = orc.times[j];
        break;
      }
    const std::vector<double> onsets = oracle_onsets(orc, cu, in.a, (1.0 - alpha) * T);
    const bool ok = s.times == orc.times && s.units == orc.units && m_units == m_oracle &&
                    std::llround(m_a * T / q.to_double()) == m_oracle && v_c == v_oracle &&
                    rep.first_crossing == v_oracle && rep.onsets == onsets;
    if (!ok) ++mismatches;
    crossings += rep.count;
    art << k << ',' << m_units << ',' << format_double(v_c) << ',' << rep.count << '\n';
  }
  o.pass = mismatches == 0;
  o.detail = std::to_string(sc.oracle_instances) + " instances, " + std::to_string(mismatches) + " mismatches, " +
             std::to_string(crossings) + " matches counted";
  o.artifact = art.str();
  return o;
}

// Criterion 7 ---------------------------------------------------------------

/// Composite Gauss-Legendre nodes on [a, b].
void panel_nodes(double a, double b, std::vector<double>& x, std::vector<double>& w) {
  constexpr int kPanels = 8;
  const auto& rule = quad::GaussLegendre<8>::instance();
  x.clear();
  w.clear();
  if (!(b > a)) return;
  const double h = (b - a) / kPanels;
  for (int p = 0; p < kPanels; ++p) {
    const double mid = a + (p + 0.5) * h;
    for (unsigned i = 0; i < 8; ++i) {
      x.push_back(mid + 0.5 * h * rule.x[i]);
      w.push_back(0.5 * h * rule.w[i]);
    }
  }
}

Outcome criterion7() {
  Outcome o;
  const double T = 0.6, theta = 0.2;
  const IntensityPair model(SmoothNonneg(BSpline::uniform(0.0, T, 3, {1.6, 2.1, 1.2, 1.9, 1.5}), 0.0),
                            SmoothNonneg(BSpline::uniform(theta, T, 2, {0.4, 1.1, 0.9, 1.2}), 0.0), theta);
  auto density = [&](std::vector<double> w) { return std::exp(janossy_log_density(model, SpikeTrain(w, {0.0, T}))); };
  std::vector<double> mass(4, 0.0);
  mass[0] = density({});
  std::vector<double> x1, w1, x2, w2, x3, w3;
  panel_nodes(0.0, T, x1, w1);
  for (std::size_t i = 0; i < x1.size(); ++i) {
    mass[1] += w1[i] * density({x1[i]});
    panel_nodes(x1[i] + theta, T, x2, w2);
    for (std::size_t j = 0; j < x2.size(); ++j) {
      mass[2] += w1[i] * w2[j] * density({x1[i], x2[j]});
      std::vector<double> xs, ws;
      panel_nodes(x2[j] + theta, T, xs, ws);
      for (std::size_t k = 0; k < xs.size(); ++k) mass[3] += w1[i] * w2[j] * ws[k] * density({x1[i], x2[j], xs[k]});
    }
  }
  const double total = mass[0] + mass[1] + mass[2] + mass[3];
  o.pass = std::abs(total - 1.0) <= 1e-3;
  o.detail = "sum over 0..3 spikes = " + fmt(total, 10) + " (masses " + fmt(mass[0]) + ", " + fmt(mass[1]) + ", " +
             fmt(mass[2]) + ", " + fmt(mass[3]) + ")";
  std::ostringstream art;
  art << "spikes,mass\n";
  for (std::size_t j = 0; j < 4; ++j) art << j << ',' << format_double(mass[j]) << '\n';
  o.artifact = art.str();
  return o;
}

// Criterion 8 ---------------------------------------------------------------

IntensityPair random_model(RngStream& rng, double T, double theta) {
  std::vector<double> gs(5), gr(4);
  for (double& c : gs) c = 0.8 + 1.2 * rng.uniform();
  for (double& c : gr) c = 0.4 + 0.9 * rng.uniform();
  return IntensityPair(SmoothNonneg(BSpline::uniform(0.0, T, 3, gs), 0.0),
                       SmoothNonneg(BSpline::uniform(theta, T, 3, gr), 0.0), theta);
}

IntensityPair perturbed(const IntensityPair& m, RngStream& rng) {
  auto jiggle = [&](const SmoothNonneg& f) {
    BSpline g = f.spline();
    for (double& c : g.coefs()) c *= 1.0 + 0.6 * (rng.uniform() - 0.5);
    return SmoothNonneg(g, 0.0);
  };
  return IntensityPair(jiggle(m.s()), jiggle(m.r()), m.deadtime());
}

Outcome criterion8(const Scale& sc) {
  Outcome o;
  o.pass = true;
  std::ostringstream d, art;
  art << "pair,kl,mc_mean,mc_se\n";
  const double T = 4.0;
  for (std::size_t k = 0; k < sc.kl_pairs; ++k) {
    RngStream rng(808, k);
    const double theta = 0.3 * rng.uniform();
    const IntensityPair truth = random_model(rng, T, theta);
    const IntensityPair cand = perturbed(truth, rng);
    const double kl = kl_divergence(truth, cand, 0.01);
    std::vector<double> ratio(sc.kl_runs);
    parallel_for(sc.kl_runs, sc.threads, [&](std::size_t run) {
      RngStream r(8080 + k, run);
      const SpikeTrain x = simulate_modulated(truth, T, r);
      ratio[run] = janossy_log_density(truth, x) - janossy_log_density(cand, x);
    });
    double mean = 0.0, se = 0.0;
    detail::mean_se(ratio, mean, se);
    const bool ok = std::abs(kl - mean) <= 3.0 * se;
    o.pass = o.pass && ok;
    d << fmt(kl, 4) << " vs " << fmt(mean, 4) << "+-" << fmt(se, 2) << "; ";
    art << k << ',' << format_double(kl) << ',' << format_double(mean) << ',' << format_double(se) << '\n';
  }
  const double lam = 0.7, lam1 = 1.3;
  const IntensityPair p0(SmoothNonneg::constant(lam, 0.0, 10.0), SmoothNonneg::constant(1.0, 0.0, 10.0));
  const IntensityPair p1(SmoothNonneg::constant(lam1, 0.0, 10.0), SmoothNonneg::constant(1.0, 0.0, 10.0));
  const double closed = 10.0 * (lam1 - lam - lam * std::log(lam1 / lam));
  const double got = kl_divergence(p0, p1);
  const bool poisson_ok = std::abs(got - closed) <= 1e-6;
  o.pass = o.pass && poisson_ok;
  d << "Poisson closed form error " << fmt(std::abs(got - closed), 2);
  art << "poisson," << format_double(got) << ',' << format_double(closed) << ",0\n";
  o.detail = d.str();
  o.artifact = art.str();
  return o;
}

// Criterion 9 ---------------------------------------------------------------

Outcome criterion9(const Scale& sc) {
  Outcome o;
  const double T = 10.0, theta = 0.2;
  std::vector<double> cs{1.0, 1.6, 0.9, 1.5, 1.2, 0.8, 1.3};
  for (double& c : cs) c *= std::sqrt(0.3);
  RateStudyConfig cfg;
  cfg.truth = IntensityPair(SmoothNonneg(BSpline::uniform(0.0, T, 3, cs), 0.0),
                            SmoothNonneg(BSpline::uniform(theta, T, 3, {0.0, 0.6, 1.0, 1.0, 1.0}), 0.0), theta);
  cfg.n_grid = sc.rate_grid;
  cfg.replicates = sc.rate_replicates;
  cfg.seed = 909;
  cfg.threads = sc.threads;
  const RateStudyResult res = rate_study(cfg);
  bool decreasing = true;
  for (std::size_t g = 1; g < res.n_grid.size(); ++g)
    decreasing = decreasing && res.median_l1_s[g] < res.median_l1_s[g - 1];
  o.pass = decreasing && res.slope_s >= -0.65 && res.slope_s <= -0.2;
  std::ostringstream d, art;
  d << "median L1(s):";
  for (double m : res.median_l1_s) d << ' ' << fmt(m, 3);
  d << ", slope " << fmt(res.slope_s, 3) << " (r: slope " << fmt(res.slope_r, 3) << ")";
  o.detail = d.str();
  art << "n,median_l1_s,median_l1_r\n";
  for (std::size_t g = 0; g < res.n_grid.size(); ++g)
    art << res.n_grid[g] << ',' << format_double(res.median_l1_s[g]) << ',' << format_double(res.median_l1_r[g])
        << '\n';
  art << "slope," << format_double(res.slope_s) << ',' << format_double(res.slope_r) << '\n';
  o.artifact = art.str();
  return o;
}

// ---------------------------------------------------------------------------

std::vector<std::string> all_artifacts(const Scale& sc) {
  const TableRun t1 = run_tables(1, sc);
  const TableRun t2 = run_tables(2, sc);
  return {t1.artifact,
          t2.artifact,
          criterion3(sc).artifact,
          judge_variance(t1, t2).artifact,
          criterion5(sc).artifact,
          criterion6(sc).artifact,
          criterion7().artifact,
          criterion8(sc).artifact,
          criterion9(sc).artifact};
}

void report(int n, const std::string& name, const Outcome& o, double seconds) {
  std::cout << (o.pass ? "PASS" : "FAIL") << "  criterion " << n << " (" << name << "): " << o.detail << "  ["
            << fmt(seconds, 3) << " s]" << std::endl;
}

}  // namespace

int main(int argc, char** argv) {
  const std::filesystem::path dir = argc > 1 ? argv[1] : "acceptance_artifacts";
  std::filesystem::create_directories(dir);
  Scale full;
  full.threads = std::max(1u, std::thread::hardware_concurrency());
  auto timed = [](auto&& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    auto r = fn();
    return std::make_pair(std::move(r), std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  };
  auto save = [&](int n, const std::string& ext, const Outcome& o) {
    write_file((dir / ("criterion" + std::to_string(n) + ext)).string(), o.artifact);
  };

  try {
    auto [t1, s1] = timed([&] { return run_tables(1, full); });
    const Outcome c1 = judge_table(t1, 1);
    report(1, "Hamming table reproduction", c1, s1);
    save(1, ".csv", c1);

    auto [t2, s2] = timed([&] { return run_tables(2, full); });
    const Outcome c2 = judge_table(t2, 2);
    report(2, "box table reproduction", c2, s2);
    save(2, ".csv", c2);

    auto [c3, s3] = timed([&] { return criterion3(full); });
    report(3, "match-count law", c3, s3);
    save(3, ".csv", c3);

    const Outcome c4 = judge_variance(t1, t2);
    report(4, "variance reduction", c4, 0.0);
    save(4, ".csv", c4);

    auto [c5, s5] = timed([&] { return criterion5(full); });
    report(5, "tilted-mean identity", c5, s5);
    save(5, ".csv", c5);

    auto [c6, s6] = timed([&] { return criterion6(full); });
    report(6, "small-instance oracle", c6, s6);
    save(6, ".csv", c6);

    auto [c7, s7] = timed([&] { return criterion7(); });
    report(7, "likelihood normalization", c7, s7);
    save(7, ".csv", c7);

    auto [c8, s8] = timed([&] { return criterion8(full); });
    report(8, "KL cross-check", c8, s8);
    save(8, ".csv", c8);

    auto [c9, s9] = timed([&] { return criterion9(full); });
    report(9, "sieve rate study", c9, s9);
    save(9, ".csv", c9);

    auto [c10, s10] = timed([&] {
      const auto first = all_artifacts(Scale::quick(1));
      const auto second = all_artifacts(Scale::quick(2));
      Outcome o;
      std::size_t same = 0;
      for (std::size_t k = 0; k < first.size(); ++k) same += first[k] == second[k] ? 1 : 0;
      o.pass = same == first.size();
      o.detail = std::to_string(same) + "/" + std::to_string(first.size()) +
                 " artifacts byte-identical across reruns (1 vs 2 threads, reduced run counts)";
      return o;
    });
    report(10, "determinism", c10, s10);

    std::ostringstream summary;
    int passed = 0, n = 0;
    for (const Outcome* o : std::initializer_list<const Outcome*>{&c1, &c2, &c3, &c4, &c5, &c6, &c7, &c8, &c9, &c10}) {
      ++n;
      passed += o->pass ? 1 : 0;
      summary << "criterion " << n << ',' << (o->pass ? "PASS" : "FAIL") << ',' << o->detail << '\n';
    }
    write_file((dir / "summary.csv").string(), summary.str());
    std::cout << passed << "/10 criteria pass" << std::endl;
  } catch (const Error& e) {
    std::cout << "FAIL  acceptance aborted: " << errc_name(e.code()) << ": " << e.what() << std::endl;
    return 2;
  }
  return 0;
}
