#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <vector>

#include "spikes/error.hpp"
#include "spikes/kernel.hpp"
#include "spikes/spike_train.hpp"

namespace spikes {

struct MatchConfig {
  double c = 0.0;
  double window = 0.0;  // T (ms)
  double horizon = 0.0; // a (ms)
  double overlap_alpha = 0.5;
  double step = 0.2;    // grid step for non-constant kernels (ms)

  void validate() const {
    require(window > 0.0 && std::isfinite(window), Errc::invalid_config, "window T must be > 0");
    require(horizon > 0.0 && std::isfinite(horizon), Errc::invalid_config, "horizon a must be > 0");
    require(overlap_alpha > 0.0 && overlap_alpha < 1.0, Errc::invalid_config, "overlap_alpha must lie in (0, 1)");
    require(step > 0.0 && std::isfinite(step), Errc::invalid_config, "grid step must be > 0");
  }
};

/// S_t on [0, a]. Exact mode: piece k is [times[k], times[k+1]) (the last
/// one ends at a) and holds the value of S on the open piece; at a breakpoint
/// itself S never exceeds either neighbour, so sups and infima of
/// level-crossing sets are read off the pieces. Grid mode: S at t = k * step.
struct ScoreSeries {
  enum class Mode { exact, grid };
  Mode mode = Mode::exact;
  double window = 0.0;
  double horizon = 0.0;
  double step = 0.0;
  std::vector<double> times;
  std::vector<double> values;
  std::vector<std::int64_t> units;  // lattice only: T * S_t / q
  double quantum = 0.0;             // q; 0 when S is not on a lattice

  bool lattice() const noexcept { return quantum > 0.0; }
  std::size_t size() const noexcept { return values.size(); }
  double piece_end(std::size_t k) const { return k + 1 < times.size() ? times[k + 1] : horizon; }
};

/// Comparison S_t >= c, done in integer units when S is on a lattice.
struct Threshold {
  double c = 0.0;
  bool lattice = false;
  std::int64_t units = 0;

  static Threshold on(const ScoreSeries& s, double c) {
    Threshold th{c, s.lattice(), 0};
    if (th.lattice) {
      const double x = s.window * c / s.quantum;
      th.units = std::isfinite(x) ? static_cast<std::int64_t>(std::ceil(x - 1e-9)) :
                 (x > 0 ? std::numeric_limits<std::int64_t>::max() : std::numeric_limits<std::int64_t>::min());
    }
    return th;
  }
  bool reached(const ScoreSeries& s, std::size_t k) const {
    return lattice ? s.units[k] >= units : s.values[k] >= c;
  }
};

struct MatchReport {
  double max_score = 0.0;                                          // M_a
  double first_crossing = std::numeric_limits<double>::infinity(); // V_c
  std::vector<double> onsets;                                      // sigma_j <= a
  std::size_t count = 0;                                           // U_a
};

/// Reusable score evaluator for one kernel and scan range; precomputes the
/// per-train boundary tables and the grid phase tables once.
class ScoreEngine {
 public:
  ScoreEngine(const TemplateKernel& gk, double a, double step = 0.2) : gk_(gk), a_(a), step_(step) {
    require(a > 0.0 && std::isfinite(a), Errc::invalid_config, "horizon a must be > 0");
    require(step > 0.0 && std::isfinite(step), Errc::invalid_config, "grid step must be > 0");
    T_ = gk.horizon();
    const double jr = a / step;
    J_ = static_cast<std::size_t>(std::llround(jr));
    require(J_ >= 1 && std::abs(jr - static_cast<double>(J_)) <= 1e-9 * std::max(1.0, jr), Errc::invalid_config,
            "a / step must be a positive integer");
    exact_ = gk.piecewise_constant();
    if (exact_) {
      try {
        const Span q = detect_arithmetic(gk.score_function());
        if (q.arithmetic) {
          quantum_ = q.value;
          qexact_ = q.exact;
        }
      } catch (const Error& e) {
        if (e.code() != Errc::must_declare_span) throw;
      }
    }
    boundaries_.resize(gk.dim());
    piece_units_.resize(gk.dim());
    if (lattice())
      for (std::size_t i = 0; i < gk.dim(); ++i)
        for (const auto& p : gk[i].pieces) piece_units_[i].push_back(level_units(p));
    if (exact_) {
      for (std::size_t i = 0; i < gk.dim(); ++i) {
        const auto& pieces = gk[i].pieces;
        const std::size_t P = pieces.size();
        for (std::size_t k = 0; k <= P; ++k) {
          const double b = k < P ? pieces[k].lo : pieces.back().hi;
          Boundary bd{b, 0.0, 0};
          if (k > 0) {
            bd.delta += pieces[k - 1].level;
            if (lattice()) bd.units += level_units(pieces[k - 1]);
          }
          if (k < P) {
            bd.delta -= pieces[k].level;
            if (lattice()) bd.units -= level_units(pieces[k]);
          }
          if (bd.delta != 0.0 || bd.units != 0) boundaries_[i].push_back(bd);
        }
      }
    }
    for (const auto& t : gk.trains())
      for (const auto& p : t.pieces)
        if (p.shape == PieceShape::cosine && !phases_.count(p.freq)) {
          std::vector<std::complex<double>> e(J_ + 1);
          for (std::size_t k = 0; k <= J_; ++k) e[k] = std::polar(1.0, -p.freq * (static_cast<double>(k) * step_));
          phases_.emplace(p.freq, std::move(e));
        }
  }

  double horizon() const noexcept { return a_; }
  double step() const noexcept { return step_; }
  std::size_t grid_size() const noexcept { return J_ + 1; }
  bool exact() const noexcept { return exact_; }
  bool lattice() const noexcept { return quantum_ > 0.0; }
  const TemplateKernel& kernel() const noexcept { return gk_; }

  void check_coverage(const MultiTrain& y) const {
    require(y.dim() == gk_.dim(), Errc::invalid_parameter, "data and template dimensions differ");
    const Horizon h = y.horizon();
    require(h.begin <= 0.0 && h.end >= a_ + T_ - 1e-9, Errc::coverage,
            "data horizon does not cover [0, a + T)");
  }

  /// Event-driven exact series (piecewise-constant kernels only).
  ScoreSeries exact_series(const MultiTrain& y) const {
    require(exact_, Errc::wrong_branch, "exact series needs a piecewise-constant kernel");
    check_coverage(y);
    ScoreSeries s = blank(ScoreSeries::Mode::exact);
    thread_local std::vector<Event> events;
    events.clear();
    double init = 0.0;
    std::int64_t init_units = 0;
    for (std::size_t i = 0; i < gk_.dim(); ++i) {
      const auto& bd = boundaries_[i];
      for (double yv : y[i].times()) {
        if (yv >= a_ + T_) break;
        for (const Boundary& b : bd) {
          const double t = yv - b.u;
          if (t <= 0.0) {
            init += b.delta;
            init_units += b.units;
          } else if (t < a_) {
            events.push_back({t, b.delta, b.units});
          }
        }
      }
    }
    std::sort(events.begin(), events.end(), [](const Event& l, const Event& r) { return l.t < r.t; });
    double v = init;
    std::int64_t u = init_units;
    s.times.push_back(0.0);
    push_value(s, v, u);
    for (std::size_t e = 0; e < events.size();) {
      const double t = events[e].t;
      for (; e < events.size() && events[e].t == t; ++e) {
        v += events[e].delta;
        u += events[e].units;
      }
      const bool same = lattice() ? u == s.units.back() : v / T_ == s.values.back();
      if (same) continue;
      s.times.push_back(t);
      push_value(s, v, u);
    }
    return s;
  }

  /// S at t = k * step, k = 0..J, by difference arrays over kernel pieces.
  ScoreSeries grid_series(const MultiTrain& y) const {
    check_coverage(y);
    ScoreSeries s = blank(ScoreSeries::Mode::grid);
    const std::size_t n = J_ + 1;
    thread_local std::vector<double> real_diff;
    thread_local std::vector<std::int64_t> unit_diff;
    thread_local std::vector<double> direct;
    real_diff.assign(n + 1, 0.0);
    if (lattice()) unit_diff.assign(n + 1, 0);
    direct.assign(n, 0.0);
    std::map<double, std::vector<std::complex<double>>> cdiff;
    for (const auto& [freq, tab] : phases_) cdiff[freq].assign(n + 1, {0.0, 0.0});
    for (std::size_t i = 0; i < gk_.dim(); ++i) {
      for (double yv : y[i].times()) {
        if (yv >= a_ + T_) break;
        for (std::size_t pi = 0; pi < gk_[i].pieces.size(); ++pi) {
          const KernelPiece& p = gk_[i].pieces[pi];
          std::size_t k0, k1;
          if (!grid_range(yv, p.lo, p.hi, k0, k1)) continue;
          switch (p.shape) {
            case PieceShape::constant:
              if (lattice()) {
                const std::int64_t u = piece_units_[i][pi];
                unit_diff[k0] += u;
                unit_diff[k1 + 1] -= u;
              } else {
                real_diff[k0] += p.level;
                real_diff[k1 + 1] -= p.level;
              }
              break;
            case PieceShape::cosine: {
              real_diff[k0] += p.mid;
              real_diff[k1 + 1] -= p.mid;
              const auto z = std::polar(p.amp, p.freq * (yv - p.center));
              auto& cd = cdiff[p.freq];
              cd[k0] += z;
              cd[k1 + 1] -= z;
              break;
            }
            case PieceShape::custom:
              for (std::size_t k = k0; k <= k1; ++k) direct[k] += p.value(yv - grid_time(k));
              break;
          }
        }
      }
    }
    s.times.resize(n);
    s.values.resize(n);
    if (lattice()) s.units.resize(n);
    double acc = 0.0;
    std::int64_t uacc = 0;
    for (std::size_t k = 0; k < n; ++k) {
      acc += real_diff[k];
      s.times[k] = grid_time(k);
      if (lattice()) {
        uacc += unit_diff[k];
        s.units[k] = uacc;
        s.values[k] = static_cast<double>(uacc) * quantum_ / T_;
      } else {
        s.values[k] = acc + direct[k];
      }
    }
    for (auto& [freq, cd] : cdiff) {
      const auto& tab = phases_.at(freq);
      std::complex<double> z{0.0, 0.0};
      for (std::size_t k = 0; k < n; ++k) {
        z += cd[k];
        s.values[k] += (z * tab[k]).real();
      }
    }
    if (!lattice())
      for (double& v : s.values) v /= T_;
    return s;
  }

  ScoreSeries series(const MultiTrain& y) const { return exact_ ? exact_series(y) : grid_series(y); }

  double grid_time(std::size_t k) const { return static_cast<double>(k) * step_; }

 private:
  struct Boundary {
    double u;
    double delta;
    std::int64_t units;
  };
  struct Event {
    double t;
    double delta;
    std::int64_t units;
  };

  std::int64_t level_units(const KernelPiece& p) const {
    if (p.exact && qexact_) {
      const Rational n = *p.exact / *qexact_;
      require(n.is_integer(), Errc::inconsistent_span, "kernel level off the score lattice");
      return n.num();
    }
    return std::llround(p.level / quantum_);
  }

  ScoreSeries blank(ScoreSeries::Mode mode) const {
    ScoreSeries s;
    s.mode = mode;
    s.window = T_;
    s.horizon = a_;
    s.step = step_;
    s.quantum = quantum_;
    return s;
  }

  void push_value(ScoreSeries& s, double v, std::int64_t u) const {
    if (lattice()) {
      s.units.push_back(u);
      s.values.push_back(static_cast<double>(u) * quantum_ / T_);
    } else {
      s.values.push_back(v / T_);
    }
  }

  /// Grid indices k in [0, J] with lo <= y - k*step < hi.
  bool grid_range(double y, double lo, double hi, std::size_t& k0, std::size_t& k1) const {
    auto inside_hi = [&](std::int64_t k) { return y - static_cast<double>(k) * step_ < hi; };
    auto inside_lo = [&](std::int64_t k) { return y - static_cast<double>(k) * step_ >= lo; };
    const auto J = static_cast<std::int64_t>(J_);
    std::int64_t a = static_cast<std::int64_t>(std::ceil((y - hi) / step_));
    while (a > 0 && inside_hi(a - 1)) --a;
    while (!inside_hi(a)) ++a;
    std::int64_t b = static_cast<std::int64_t>(std::floor((y - lo) / step_));
    while (inside_lo(b + 1)) ++b;
    while (!inside_lo(b)) --b;
    a = std::max<std::int64_t>(a, 0);
    b = std::min<std::int64_t>(b, J);
    if (a > b) return false;
    k0 = static_cast<std::size_t>(a);
    k1 = static_cast<std::size_t>(b);
    return true;
  }

  const TemplateKernel& gk_;
  double a_ = 0.0;
  double step_ = 0.2;
  double T_ = 0.0;
  std::size_t J_ = 0;
  bool exact_ = false;
  double quantum_ = 0.0;
  std::optional<Rational> qexact_;
  std::vector<std::vector<Boundary>> boundaries_;
  std::vector<std::vector<std::int64_t>> piece_units_;
  std::map<double, std::vector<std::complex<double>>> phases_;
};

/// S_t = T^{-1} sum_i sum_{y in y^(i)} g^(i)(y - t) evaluated directly.
inline double score_at(const MultiTrain& y, const TemplateKernel& gk, double t) {
  double s = 0.0;
  for (std::size_t i = 0; i < gk.dim(); ++i)
    for (double v : y[i].times()) s += gk[i](v - t);
  return s / gk.horizon();
}

/// Score series on [0, a]: exact for piecewise-constant kernels, otherwise
/// on the grid of the given step.
inline ScoreSeries score_series(const MultiTrain& y, const TemplateKernel& gk, double a, double step = 0.2) {
  return ScoreEngine(gk, a, step).series(y);
}

inline double max_score(const ScoreSeries& s) { return *std::max_element(s.values.begin(), s.values.end()); }

/// (M_a, V_c): the sup of S over [0, a] and the first time S reaches c.
inline std::pair<double, double> scan_summary(const ScoreSeries& s, double c) {
  const Threshold th = Threshold::on(s, c);
  double v = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < s.size(); ++k)
    if (th.reached(s, k)) {
      v = s.times[k];
      break;
    }
  return {max_score(s), v};
}

/// Overlap-limited match onsets: sigma_1 = V_c and
/// sigma_{j+1} = inf{t > sigma_j + (1 - alpha) T : S_t >= c}; U_a counts
/// onsets <= a. On the exact series an onset may equal sigma_j + (1-alpha)T
/// (the infimum of an open set).
inline MatchReport count_matches(const ScoreSeries& s, const MatchConfig& cfg) {
  cfg.validate();
  MatchReport rep;
  rep.max_score = max_score(s);
  const Threshold th = Threshold::on(s, cfg.c);
  const double gap = (1.0 - cfg.overlap_alpha) * s.window;
  double barrier = -std::numeric_limits<double>::infinity();
  std::size_t k = 0;
  while (k < s.size()) {
    std::optional<double> sigma;
    for (; k < s.size(); ++k) {
      if (!th.reached(s, k)) continue;
      if (s.mode == ScoreSeries::Mode::exact) {
        if (s.piece_end(k) > barrier) {
          sigma = std::max(s.times[k], barrier);
          break;
        }
      } else if (s.times[k] > barrier) {
        sigma = s.times[k];
        break;
      }
    }
    if (!sigma || *sigma > s.horizon) break;
    rep.onsets.push_back(*sigma);
    barrier = *sigma + gap;
  }
  rep.count = rep.onsets.size();
  if (!rep.onsets.empty()) rep.first_crossing = rep.onsets.front();
  else rep.first_crossing = scan_summary(s, cfg.c).second;
  for (std::size_t j = 1; j < rep.onsets.size(); ++j)
    require(rep.onsets[j] >= rep.onsets[j - 1] + gap, Errc::model_error, "match spacing invariant violated");
  return rep;
}

inline void write_series_csv(std::ostream& os, const ScoreSeries& s) {
  os << "t,S\n";
  for (std::size_t k = 0; k < s.size(); ++k) os << format_double(s.times[k]) << ',' << format_double(s.values[k]) << '\n';
}

inline nlohmann::json to_json(const MatchReport& r) {
  nlohmann::json j;
  j["M_a"] = r.max_score;
  j["V_c"] = std::isinf(r.first_crossing) ? nlohmann::json("inf") : nlohmann::json(r.first_crossing);
  j["onsets"] = r.onsets;
  j["U_a"] = r.count;
  return j;
}

}  // namespace spikes
