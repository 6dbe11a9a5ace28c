// spikes: command-line front end for simulation, scoring, tail
// approximations, Monte Carlo estimation, sieve fitting and the benchmark
// tables.

#include <chrono>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "spikes/spikes.hpp"

using namespace spikes;
using json = nlohmann::json;

namespace {

json g_overrides = json::object();

template <class T>
void flag(CLI::App* app, const std::string& name, const std::string& key, const std::string& help) {
  app->add_option_function<T>(name, [key](const T& v) { g_overrides[json::json_pointer(key)] = v; }, help);
}

template <class T>
T need(const json& cfg, const std::string& key) {
  const json::json_pointer ptr(key);
  require(cfg.contains(ptr), Errc::invalid_config, "missing required parameter '" + key.substr(1) + "'");
  try {
    return cfg.at(ptr).get<T>();
  } catch (const json::exception&) {
    throw Error(Errc::invalid_config, "parameter '" + key.substr(1) + "' has the wrong type");
  }
}

template <class T>
T get(const json& cfg, const std::string& key, T fallback) {
  const json::json_pointer ptr(key);
  return cfg.contains(ptr) ? need<T>(cfg, key) : fallback;
}

struct Run {
  std::string command;
  json cfg;
  std::filesystem::path out;
  std::uint64_t seed = 1;
  unsigned threads = 1;

  Provenance provenance() const { return {cfg, seed}; }

  void write_json(const std::string& name, json body) const {
    body["provenance"] = provenance().to_json();
    write_file((out / name).string(), body.dump(2) + "\n");
    std::cout << (out / name).string() << '\n';
  }
  void write_text(const std::string& name, const std::string& text) const {
    write_file((out / name).string(), provenance().header() + text);
    std::cout << (out / name).string() << '\n';
  }
};

// shared inputs ---------------------------------------------------------------

ScoreFunction kernel_from(const json& cfg) {
  json spec = get<json>(cfg, "/kernel", json::object());
  if (!spec.contains("kind")) spec["kind"] = "hamming";
  if (!spec.contains("epsilon_ms")) spec["epsilon_ms"] = 5.0;
  if (!spec.contains("beta")) spec["beta"] = spec["kind"] == "box" ? json("0.3") : json(0.4);
  return score_function_from_json(spec);
}

MultiTrain template_from(const json& cfg, std::uint64_t seed) {
  if (cfg.contains("template")) return load_trains(need<std::string>(cfg, "/template"));
  const auto d = get<std::size_t>(cfg, "/dim", 4);
  const double T = get<double>(cfg, "/window", 500.0);
  const auto tseed = get<std::uint64_t>(cfg, "/template_seed", seed);
  return simulate_renewal_template(d, 24.0, 1.0, T, RngStream(tseed, 0));
}

std::vector<double> rates_from(const json& cfg, std::size_t d) {
  if (cfg.contains("rates")) {
    auto r = need<std::vector<double>>(cfg, "/rates");
    require(r.size() == d, Errc::invalid_config, "rates must have one entry per template train");
    return r;
  }
  return std::vector<double>(d, get<double>(cfg, "/rate", 0.04));
}

std::vector<double> thresholds(const json& cfg) {
  require(cfg.contains("c"), Errc::invalid_config, "missing required parameter 'c'");
  const json& c = cfg.at("c");
  if (c.is_array()) return c.get<std::vector<double>>();
  require(c.is_number(), Errc::invalid_config, "c must be a number or an array of numbers");
  return {c.get<double>()};
}

McConfig mc_from(const Run& run) {
  McConfig mc;
  mc.runs = get<std::size_t>(run.cfg, "/runs", 2000);
  mc.step = get<double>(run.cfg, "/step", 0.2);
  mc.seed = run.seed;
  mc.threads = run.threads;
  return mc;
}

double scan_horizon(const json& cfg, double T) {
  if (cfg.contains("a")) return need<double>(cfg, "/a");
  return get<double>(cfg, "/length", 20000.0) - T;
}

// commands --------------------------------------------------------------------

void cmd_simulate(const Run& run) {
  const std::string kind = get<std::string>(run.cfg, "/kind", "poisson");
  const RngStream root(run.seed, 0);
  std::vector<SpikeTrain> trains;
  if (kind == "modulated") {
    const IntensityPair model = intensity_pair_from_json(parse_json(read_file(need<std::string>(run.cfg, "/model")), "model"));
    const auto n = get<std::size_t>(run.cfg, "/count", 1);
    const double length = get<double>(run.cfg, "/length", model.horizon());
    for (std::size_t i = 0; i < n; ++i) {
      RngStream rng = root.substream(i);
      trains.push_back(simulate_modulated(model, length, rng));
    }
  } else {
    const auto d = get<std::size_t>(run.cfg, "/dim", 4);
    const double length = need<double>(run.cfg, "/length");
    for (std::size_t i = 0; i < d; ++i) {
      RngStream rng = root.substream(i);
      if (kind == "poisson") {
        trains.push_back(simulate_poisson(get<double>(run.cfg, "/rate", 0.04), length, rng));
      } else if (kind == "renewal") {
        trains.push_back(simulate_renewal_deadtime(get<double>(run.cfg, "/scale", 24.0),
                                                   get<double>(run.cfg, "/deadtime", 1.0), length, rng));
      } else {
        throw Error(Errc::invalid_config, "unknown simulation kind '" + kind + "' (poisson, renewal, modulated)");
      }
    }
  }
  const MultiTrain mt(std::move(trains));
  std::ostringstream os;
  write_text(os, mt);
  run.write_text("simulated.txt", os.str());
}

void cmd_kernel_info(const Run& run) {
  const MultiTrain templ = template_from(run.cfg, run.seed);
  const TemplateKernel gk = build_template_kernel(templ, kernel_from(run.cfg));
  std::ostringstream csv;
  write_kernel_csv(csv, gk);
  run.write_text("kernel.csv", csv.str());
  json info;
  info["score_function"] = to_json(gk.score_function());
  info["horizon"] = gk.horizon();
  info["dim"] = gk.dim();
  info["continuous"] = !gk.has_jumps();
  json trains = json::array();
  for (std::size_t i = 0; i < gk.dim(); ++i)
    trains.push_back({{"spikes", gk[i].spikes}, {"pieces", gk[i].pieces.size()}, {"jumps", gk[i].jumps.size()}});
  info["trains"] = trains;
  try {
    info["span_q"] = detect_arithmetic(gk.score_function()).str();
  } catch (const Error& e) {
    info["span_q"] = std::string("undeclared: ") + e.what();
  }
  if (gk.has_jumps()) {
    try {
      info["span_chi"] = jump_span(gk).str();
    } catch (const Error& e) {
      info["span_chi"] = std::string("undeclared: ") + e.what();
    }
  }
  info["mu"] = mean_score(gk, rates_from(run.cfg, gk.dim()));
  info["warnings"] = gk.warnings();
  run.write_json("kernel_info.json", info);
}

TiltOptions tilt_options(const Run& run) {
  TiltOptions opt;
  opt.overshoot.seed = run.seed;
  opt.overshoot.threads = run.threads;
  opt.overshoot.walks_per_level = get<std::size_t>(run.cfg, "/overshoot_walks", 100000);
  return opt;
}

void cmd_tilt(const Run& run) {
  const MultiTrain templ = template_from(run.cfg, run.seed);
  const TemplateKernel gk = build_template_kernel(templ, kernel_from(run.cfg));
  const auto rates = rates_from(run.cfg, gk.dim());
  json out = json::array();
  for (double c : thresholds(run.cfg)) out.push_back(to_json(tilt_summary(gk, rates, c, tilt_options(run))));
  run.write_json("tilt.json", {{"summaries", out}});
}

void cmd_pvalue(const Run& run) {
  const std::string method = get<std::string>(run.cfg, "/method", "analytic");
  const MultiTrain templ = template_from(run.cfg, run.seed);
  const TemplateKernel gk = build_template_kernel(templ, kernel_from(run.cfg));
  const auto rates = rates_from(run.cfg, gk.dim());
  const double a = scan_horizon(run.cfg, gk.horizon());
  const auto cs = thresholds(run.cfg);
  const McConfig mc = mc_from(run);
  json results = json::array();
  std::ostringstream csv;
  csv << "c,p_hat,se\n";
  auto emit = [&](double c, double p, double se, json extra) {
    extra["c"] = c;
    extra["p_hat"] = p;
    extra["se"] = se;
    results.push_back(extra);
    csv << format_double(c) << ',' << format_double(p) << ',' << format_double(se) << '\n';
  };
  if (method == "analytic") {
    for (double c : cs) {
      const TiltSummary s = tilt_summary(gk, rates, c, tilt_options(run));
      emit(c, pvalue_scan(s, a), 0.0, {{"method", "analytic"}, {"tilt", to_json(s)}});
    }
  } else if (method == "mc") {
    for (const Estimate& e : direct_mc_pvalues(gk, rates, a, cs, mc)) emit(e.c, e.p, e.se, to_json(e));
  } else if (method == "is") {
    for (std::size_t k = 0; k < cs.size(); ++k) {
      const TiltSummary s = tilt_summary(gk, rates, cs[k], tilt_options(run));
      McConfig m = mc;
      m.seed = detail::splitmix64(run.seed ^ (0x15ULL + k));
      const Estimate e = importance_sampling_pvalue(gk, rates, a, cs[k], s.theta, m);
      emit(e.c, e.p, e.se, to_json(e));
    }
  } else {
    throw Error(Errc::invalid_config, "unknown method '" + method + "' (analytic, mc, is)");
  }
  run.write_json("pvalue.json", {{"method", method}, {"a", a}, {"results", results}});
  if (cs.size() > 1) run.write_text("pvalue.csv", csv.str());
}

void cmd_match_count(const Run& run) {
  const MultiTrain templ = template_from(run.cfg, run.seed);
  const TemplateKernel gk = build_template_kernel(templ, kernel_from(run.cfg));
  const double T = gk.horizon();
  MatchConfig cfg;
  cfg.c = need<double>(run.cfg, "/c");
  cfg.window = T;
  cfg.overlap_alpha = get<double>(run.cfg, "/overlap_alpha", 0.5);
  cfg.step = get<double>(run.cfg, "/step", 0.2);
  if (run.cfg.contains("recording")) {
    const MultiTrain y = load_trains(need<std::string>(run.cfg, "/recording"));
    cfg.horizon = run.cfg.contains("a") ? need<double>(run.cfg, "/a") : y.horizon().end - T;
    const ScoreSeries s = ScoreEngine(gk, cfg.horizon, cfg.step).series(y);
    const MatchReport rep = count_matches(s, cfg);
    std::ostringstream csv;
    write_series_csv(csv, s);
    run.write_text("score_series.csv", csv.str());
    run.write_json("matches.json", to_json(rep));
    return;
  }
  cfg.horizon = scan_horizon(run.cfg, T);
  const auto rates = rates_from(run.cfg, gk.dim());
  const TiltSummary s = tilt_summary(gk, rates, cfg.c, tilt_options(run));
  const auto kmax = get<std::size_t>(run.cfg, "/kmax", 6);
  const MatchCountLaw law = match_count_law(s, cfg.horizon, kmax);
  json out{{"eta", law.eta}, {"poisson_pmf", law.pmf}};
  std::ostringstream csv;
  if (get<std::size_t>(run.cfg, "/runs", 2000) > 0) {
    const MatchCountEstimate est = mc_match_count(gk, rates, cfg, mc_from(run), kmax);
    out["mc_pmf"] = est.pmf;
    out["mc_se"] = est.se;
    out["mc_mean"] = est.mean;
    out["mc_mean_se"] = est.mean_se;
    csv << "k,direct,direct_se,poisson\n";
    for (std::size_t k = 0; k <= kmax; ++k)
      csv << (k == kmax ? ">=" + std::to_string(k) : std::to_string(k)) << ',' << format_double(est.pmf[k]) << ','
          << format_double(est.se[k]) << ',' << format_double(law.pmf[k]) << '\n';
    run.write_text("match_count.csv", csv.str());
  }
  run.write_json("match_count.json", out);
}

SievePolicy policy_from(const Run& run) {
  SievePolicy p;
  p.alpha = get<double>(run.cfg, "/alpha", p.alpha);
  p.basis_constant = get<double>(run.cfg, "/basis_constant", p.basis_constant);
  p.degree = get<int>(run.cfg, "/degree", p.degree);
  p.multistarts = get<int>(run.cfg, "/starts", p.multistarts);
  p.max_iterations = get<int>(run.cfg, "/max_iterations", p.max_iterations);
  p.seed = run.seed;
  p.threads = run.threads;
  return p;
}

void cmd_mle_fit(const Run& run) {
  const MultiTrain data = load_trains(need<std::string>(run.cfg, "/data"));
  const FitReport fit = fit_sieve_mle(data.trains(), policy_from(run), get<double>(run.cfg, "/deadtime", 0.0));
  run.write_json("model.json", to_json(fit.fitted));
  run.write_json("fit.json", {{"mean_loglik", fit.mean_loglik},
                              {"initial_loglik", fit.initial_loglik},
                              {"iterations", fit.iterations},
                              {"best_start", fit.best_start},
                              {"start_logliks", fit.start_logliks},
                              {"n", data.dim()},
                              {"floor", fit.fitted.s().floor()},
                              {"s_dim", fit.fitted.s().spline().size()},
                              {"r_dim", fit.fitted.r().spline().size()}});
}

IntensityPair default_truth() {
  const double T = 10.0, theta = 0.2;
  std::vector<double> cs{1.0, 1.6, 0.9, 1.5, 1.2, 0.8, 1.3};
  for (double& c : cs) c *= std::sqrt(0.3);
  return IntensityPair(SmoothNonneg(BSpline::uniform(0.0, T, 3, cs), 0.0),
                       SmoothNonneg(BSpline::uniform(theta, T, 3, {0.0, 0.6, 1.0, 1.0, 1.0}), 0.0), theta);
}

void cmd_rate_study(const Run& run) {
  RateStudyConfig cfg;
  cfg.truth = run.cfg.contains("model")
                  ? intensity_pair_from_json(parse_json(read_file(need<std::string>(run.cfg, "/model")), "model"))
                  : default_truth();
  cfg.n_grid = get<std::vector<std::size_t>>(run.cfg, "/n_grid", {25, 50, 100, 200, 400});
  cfg.replicates = get<std::size_t>(run.cfg, "/replicates", 20);
  cfg.policy = policy_from(run);
  cfg.seed = run.seed;
  cfg.threads = run.threads;
  cfg.tstar_fraction = get<double>(run.cfg, "/tstar_fraction", 0.9);
  const RateStudyResult res = rate_study(cfg);
  std::ostringstream csv;
  csv << "n,replicate,l1_s,l1_r\n";
  for (const auto& r : res.rows)
    csv << r.n << ',' << r.replicate << ',' << format_double(r.l1_s) << ',' << format_double(r.l1_r) << '\n';
  run.write_text("rate_study.csv", csv.str());
  run.write_json("rate_study.json", {{"n_grid", res.n_grid},
                                     {"median_l1_s", res.median_l1_s},
                                     {"median_l1_r", res.median_l1_r},
                                     {"slope_s", res.slope_s},
                                     {"slope_r", res.slope_r}});
}

void cmd_reproduce(const Run& run) {
  const int table = need<int>(run.cfg, "/table");
  Protocol p = Protocol::for_table(table);
  const auto runs = get<std::size_t>(run.cfg, "/runs", 2000);
  if (run.cfg.contains("c")) p.cs = thresholds(run.cfg);
  std::ostringstream csv;
  if (table == 3) {
    const CountTable t = run_count_table(p, run.seed, runs, run.threads);
    write_count_csv(csv, t);
    run.write_text("table3.csv", csv.str());
    return;
  }
  const PvalueTable t = run_pvalue_table(p, run.seed, runs, run.threads);
  write_pvalue_csv(csv, t);
  run.write_text("table" + std::to_string(table) + ".csv", csv.str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"spike-train template matching and scan statistics"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string config_path, out = ".";
  std::optional<std::uint64_t> seed;
  unsigned threads = std::max(1u, std::thread::hardware_concurrency());
  app.add_option("--config", config_path, "JSON config; flags override its fields");
  app.add_option("--seed", seed, "master seed");
  app.add_option("--threads", threads, "worker threads");
  app.add_option("--out", out, "output directory");

  auto* sim = app.add_subcommand("simulate", "simulate spike trains");
  flag<std::string>(sim, "--kind", "/kind", "poisson | renewal | modulated");
  flag<double>(sim, "--rate", "/rate", "Poisson rate per ms");
  flag<double>(sim, "--length", "/length", "horizon length (ms)");
  flag<std::size_t>(sim, "--dim", "/dim", "number of trains");
  flag<double>(sim, "--scale", "/scale", "renewal exponential mean (ms)");
  flag<double>(sim, "--deadtime", "/deadtime", "renewal dead time (ms)");
  flag<std::string>(sim, "--model", "/model", "model JSON for modulated trains");
  flag<std::size_t>(sim, "--count", "/count", "number of modulated trains");

  auto template_flags = [](CLI::App* sub) {
    flag<std::string>(sub, "--template", "/template", "template spike-train file");
    flag<std::uint64_t>(sub, "--template-seed", "/template_seed", "seed for a generated renewal template");
    flag<std::size_t>(sub, "--dim", "/dim", "generated template dimension");
    flag<double>(sub, "--window", "/window", "generated template length T (ms)");
    flag<std::string>(sub, "--kernel", "/kernel/kind", "hamming | box");
    flag<double>(sub, "--epsilon", "/kernel/epsilon_ms", "kernel half-width (ms)");
    flag<std::string>(sub, "--beta", "/kernel/beta", "kernel tail level (exact, e.g. 0.3 or 3/10)");
    flag<std::string>(sub, "--span", "/kernel/span", "declared span or 'nonarithmetic'");
    flag<double>(sub, "--rate", "/rate", "background rate for every train");
  };
  auto* kinfo = app.add_subcommand("kernel-info", "piecewise kernel table and span report");
  template_flags(kinfo);
  auto* tilt = app.add_subcommand("tilt", "large-deviation constants");
  template_flags(tilt);
  flag<std::vector<double>>(tilt, "--c", "/c", "threshold(s)");

  auto* pv = app.add_subcommand("pvalue", "P{M_a >= c}");
  template_flags(pv);
  flag<std::vector<double>>(pv, "--c", "/c", "threshold(s)");
  flag<std::string>(pv, "--method", "/method", "analytic | mc | is");
  flag<double>(pv, "--a", "/a", "scan horizon a (ms)");
  flag<double>(pv, "--length", "/length", "recording length a + T (ms)");
  flag<std::size_t>(pv, "--runs", "/runs", "Monte Carlo runs");
  flag<double>(pv, "--step", "/step", "anchor spacing (ms)");

  auto* mcnt = app.add_subcommand("match-count", "overlap-limited match count");
  template_flags(mcnt);
  flag<double>(mcnt, "--c", "/c", "threshold");
  flag<double>(mcnt, "--a", "/a", "scan horizon a (ms)");
  flag<double>(mcnt, "--length", "/length", "recording length a + T (ms)");
  flag<double>(mcnt, "--overlap-alpha", "/overlap_alpha", "allowed overlap fraction");
  flag<std::size_t>(mcnt, "--runs", "/runs", "Monte Carlo runs (0 = analytic only)");
  flag<double>(mcnt, "--step", "/step", "grid step (ms)");
  flag<std::string>(mcnt, "--recording", "/recording", "count matches in this recording");

  auto* fit = app.add_subcommand("mle-fit", "sieve maximum likelihood fit of (s, r)");
  flag<std::string>(fit, "--data", "/data", "spike-train file of i.i.d. trials");
  flag<double>(fit, "--deadtime", "/deadtime", "known dead time (ms)");
  flag<double>(fit, "--alpha", "/alpha", "floor exponent");
  flag<double>(fit, "--basis-constant", "/basis_constant", "basis size constant");
  flag<int>(fit, "--degree", "/degree", "spline degree");
  flag<int>(fit, "--starts", "/starts", "multistart count");

  auto* rs = app.add_subcommand("rate-study", "empirical convergence of the sieve MLE");
  flag<std::string>(rs, "--model", "/model", "truth model JSON");
  flag<std::vector<std::size_t>>(rs, "--n", "/n_grid", "sample sizes");
  flag<std::size_t>(rs, "--replicates", "/replicates", "replicates per sample size");

  auto* rep = app.add_subcommand("reproduce", "benchmark tables");
  flag<int>(rep, "--table", "/table", "1, 2 or 3");
  flag<std::size_t>(rep, "--runs", "/runs", "runs per estimator");
  flag<std::vector<double>>(rep, "--c", "/c", "override thresholds");

  CLI11_PARSE(app, argc, argv);

  const auto t0 = std::chrono::steady_clock::now();
  Run run;
  run.command = app.get_subcommands().front()->get_name();
  try {
    json cfg = config_path.empty() ? json::object() : parse_json(read_file(config_path), config_path);
    require(cfg.is_object(), Errc::invalid_config, "config must be a JSON object");
    cfg.merge_patch(g_overrides);
    if (seed) cfg["seed"] = *seed;
    run.seed = get<std::uint64_t>(cfg, "/seed", 1);
    cfg["seed"] = run.seed;
    cfg["command"] = run.command;
    run.cfg = cfg;
    run.threads = threads;
    run.out = out;
    std::filesystem::create_directories(run.out);

    if (run.command == "simulate") cmd_simulate(run);
    else if (run.command == "kernel-info") cmd_kernel_info(run);
    else if (run.command == "tilt") cmd_tilt(run);
    else if (run.command == "pvalue") cmd_pvalue(run);
    else if (run.command == "match-count") cmd_match_count(run);
    else if (run.command == "mle-fit") cmd_mle_fit(run);
    else if (run.command == "rate-study") cmd_rate_study(run);
    else if (run.command == "reproduce") cmd_reproduce(run);
  } catch (const Error& e) {
    std::cout << json{{"error", std::string(errc_name(e.code()))}, {"message", e.what()}, {"command", run.command}}.dump()
              << std::endl;
    return 1;
  } catch (const std::exception& e) {
    std::cout << json{{"error", "internal"}, {"message", e.what()}, {"command", run.command}}.dump() << std::endl;
    return 1;
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::cerr << json{{"command", run.command}, {"wall_seconds", secs}, {"threads", run.threads}}.dump() << std::endl;
  return 0;
}
