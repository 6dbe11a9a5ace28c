#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "spikes/point_process.hpp"
#include "spikes/scoring.hpp"

using namespace spikes;

namespace {

MultiTrain random_template(std::uint64_t seed, std::size_t d, double T) {
  RngStream rng(seed, 0);
  std::vector<SpikeTrain> trains;
  for (std::size_t i = 0; i < d; ++i) {
    std::vector<double> w;
    const int n = 1 + static_cast<int>(rng.uniform() * 5);
    for (int k = 0; k < n; ++k) w.push_back(T * rng.uniform());
    std::sort(w.begin(), w.end());
    trains.emplace_back(std::move(w), Horizon{0.0, T});
  }
  return MultiTrain(std::move(trains));
}

MultiTrain poisson_data(std::uint64_t seed, std::size_t d, double rate, double length) {
  RngStream rng(seed, 1);
  std::vector<SpikeTrain> trains;
  for (std::size_t i = 0; i < d; ++i) trains.push_back(simulate_poisson(rate, length, rng));
  return MultiTrain(std::move(trains));
}

ScoreSeries manual(ScoreSeries::Mode mode, std::vector<double> times, std::vector<double> values, double a,
                   double T) {
  ScoreSeries s;
  s.mode = mode;
  s.window = T;
  s.horizon = a;
  s.step = 1.0;
  s.times = std::move(times);
  s.values = std::move(values);
  return s;
}

const ScoreFunction kBox = ScoreFunction::box(4.0, Rational(3, 10));
const ScoreFunction kHamming = ScoreFunction::hamming(5.0, 0.4);

}  // namespace

TEST(ScoreSeries, EmptyDataScoresZero) {
  const TemplateKernel gk = build_template_kernel(random_template(1, 3, 40.0), kBox);
  const MultiTrain y(std::vector<SpikeTrain>(3, SpikeTrain({}, {0.0, 200.0})));
  const ScoreSeries s = ScoreEngine(gk, 100.0).exact_series(y);
  ASSERT_EQ(s.size(), 1u);
  EXPECT_EQ(s.values[0], 0.0);
  EXPECT_EQ(s.units[0], 0);
  const ScoreSeries g = ScoreEngine(gk, 100.0).grid_series(y);
  for (double v : g.values) EXPECT_EQ(v, 0.0);
}

TEST(ScoreSeries, SingleSpikeTracesTheKernel) {
  const MultiTrain templ({SpikeTrain({10.0}, {0.0, 20.0})});
  const TemplateKernel gk = build_template_kernel(templ, kBox);
  const MultiTrain y({SpikeTrain({50.0}, {0.0, 100.0})});
  const ScoreSeries s = ScoreEngine(gk, 60.0).exact_series(y);
  // g(50 - t) is -0.3 on t in (30, 36], 1 on (36, 44], -0.3 on (44, 50]
  ASSERT_EQ(s.times, (std::vector<double>{0.0, 30.0, 36.0, 44.0, 50.0}));
  EXPECT_EQ(s.units, (std::vector<std::int64_t>{0, -3, 10, -3, 0}));
  EXPECT_DOUBLE_EQ(s.values[2], 1.0 / 20.0);
  EXPECT_DOUBLE_EQ(max_score(s), 1.0 / 20.0);
}

TEST(ScoreSeries, ExactMatchesDirectEvaluation) {
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    const TemplateKernel gk = build_template_kernel(random_template(seed, 3, 40.0), kBox);
    const MultiTrain y = poisson_data(seed, 3, 0.05, 240.0);
    const ScoreSeries s = ScoreEngine(gk, 200.0).exact_series(y);
    for (std::size_t k = 0; k < s.size(); ++k) {
      const double mid = 0.5 * (s.times[k] + s.piece_end(k));
      EXPECT_NEAR(s.values[k], score_at(y, gk, mid), 1e-12);
      if (k > 0) EXPECT_NE(s.units[k], s.units[k - 1]);
      EXPECT_DOUBLE_EQ(s.values[k], s.units[k] * 0.1 / 40.0);
    }
  }
}

TEST(ScoreSeries, ShiftEquivariance) {
  const TemplateKernel gk = build_template_kernel(random_template(2, 2, 30.0), kBox);
  const MultiTrain y = poisson_data(2, 2, 0.08, 200.0);
  std::vector<SpikeTrain> shifted;
  for (std::size_t i = 0; i < y.dim(); ++i) {
    std::vector<double> w;
    for (double v : y[i].times()) w.push_back(v + 16.0);
    shifted.emplace_back(std::move(w), Horizon{0.0, 216.0});
  }
  const ScoreSeries a = ScoreEngine(gk, 150.0).exact_series(y);
  const ScoreSeries b = ScoreEngine(gk, 150.0).exact_series(MultiTrain(std::move(shifted)));
  for (double t = 0.37; t < 130.0; t += 0.91) {
    auto at = [](const ScoreSeries& s, double x) {
      const auto it = std::upper_bound(s.times.begin(), s.times.end(), x);
      return s.units[static_cast<std::size_t>(it - s.times.begin()) - 1];
    };
    EXPECT_EQ(at(b, t + 16.0), at(a, t));
  }
}

TEST(ScoreSeries, GridEqualsDirectEvaluationForBox) {
  const TemplateKernel gk = build_template_kernel(random_template(3, 3, 40.0), kBox);
  const MultiTrain y = poisson_data(3, 3, 0.05, 240.0);
  const ScoreEngine eng(gk, 200.0, 0.2);
  const ScoreSeries g = eng.grid_series(y);
  ASSERT_EQ(g.size(), eng.grid_size());
  for (std::size_t k = 0; k < g.size(); ++k) EXPECT_NEAR(g.values[k], score_at(y, gk, eng.grid_time(k)), 1e-12);
}

TEST(ScoreSeries, HammingGridMatchesDirectEvaluation) {
  const TemplateKernel gk = build_template_kernel(random_template(4, 4, 50.0), kHamming);
  const MultiTrain y = poisson_data(4, 4, 0.06, 300.0);
  const ScoreEngine eng(gk, 250.0, 0.2);
  EXPECT_FALSE(eng.exact());
  const ScoreSeries g = eng.series(y);
  for (std::size_t k = 0; k < g.size(); ++k) EXPECT_NEAR(g.values[k], score_at(y, gk, eng.grid_time(k)), 1e-12);
}

TEST(ScoreSeries, GridMaximumNeverExceedsExact) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const TemplateKernel gk = build_template_kernel(random_template(seed, 3, 40.0), kBox);
    const MultiTrain y = poisson_data(seed + 100, 3, 0.05, 240.0);
    const ScoreEngine eng(gk, 200.0, 0.2);
    EXPECT_LE(max_score(eng.grid_series(y)), max_score(eng.exact_series(y)));
  }
}

TEST(ScoreSeries, GridHitsEveryPieceWhenSpikesAreOnTheGrid) {
  // with template and data spikes on the integer lattice every piece has
  // length >= 1 and starts on the grid, so grid and exact maxima agree
  RngStream rng(7, 0);
  const TemplateKernel gk = build_template_kernel(MultiTrain({SpikeTrain({5.0, 17.0, 31.0}, {0.0, 40.0}),
                                                              SpikeTrain({12.0, 22.0}, {0.0, 40.0})}),
                                                  kBox);
  std::vector<SpikeTrain> trains;
  for (int i = 0; i < 2; ++i) {
    std::vector<double> w;
    for (double t = 0.0; t < 240.0; t += 1.0)
      if (rng.uniform() < 0.06) w.push_back(t);
    trains.emplace_back(std::move(w), Horizon{0.0, 240.0});
  }
  const MultiTrain y(std::move(trains));
  const ScoreEngine eng(gk, 200.0, 1.0);
  const ScoreSeries e = eng.exact_series(y);
  EXPECT_EQ(max_score(eng.grid_series(y)), max_score(e));
}

TEST(ScoreSeries, CoverageIsChecked) {
  const TemplateKernel gk = build_template_kernel(random_template(1, 2, 40.0), kBox);
  const MultiTrain y = poisson_data(1, 2, 0.05, 100.0);
  try {
    ScoreEngine(gk, 100.0).series(y);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::coverage);
  }
  EXPECT_THROW(ScoreEngine(gk, 100.0, 0.3), Error);
  EXPECT_THROW(ScoreEngine(build_template_kernel(random_template(1, 2, 40.0), kHamming), 50.0).exact_series(
                   poisson_data(1, 2, 0.05, 100.0)),
               Error);
}

TEST(ScanSummary, CrossingAndMaximumAreDual) {
  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    const TemplateKernel gk = build_template_kernel(random_template(seed, 3, 40.0), kBox);
    const MultiTrain y = poisson_data(seed + 50, 3, 0.05, 240.0);
    const ScoreSeries s = ScoreEngine(gk, 200.0).exact_series(y);
    for (int n = -40; n < 160; ++n) {
      for (double c : {n * 0.1 / 40.0, (n + 0.5) * 0.1 / 40.0}) {
        const auto [M, V] = scan_summary(s, c);
        EXPECT_EQ(V <= 200.0, M >= c) << "c=" << c;
      }
    }
    const auto [M, V] = scan_summary(s, max_score(s) + 0.0025);
    EXPECT_TRUE(std::isinf(V));
    EXPECT_EQ(scan_summary(s, M).second <= 200.0, true);
  }
}

TEST(CountMatches, ExactHandTrace) {
  const ScoreSeries s = manual(ScoreSeries::Mode::exact, {0, 1, 3, 6}, {0, 1, 0, 1}, 10.0, 4.0);
  const MatchReport r = count_matches(s, MatchConfig{0.5, 4.0, 10.0, 0.5, 1.0});
  EXPECT_EQ(r.onsets, (std::vector<double>{1, 6, 8}));
  EXPECT_EQ(r.count, 3u);
  EXPECT_EQ(r.first_crossing, 1.0);
  EXPECT_EQ(r.max_score, 1.0);
}

TEST(CountMatches, GridHandTrace) {
  const ScoreSeries s = manual(ScoreSeries::Mode::grid, {0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10},
                               {0, 1, 1, 0, 0, 0, 1, 1, 1, 1, 1}, 10.0, 4.0);
  const MatchReport r = count_matches(s, MatchConfig{0.5, 4.0, 10.0, 0.5, 1.0});
  EXPECT_EQ(r.onsets, (std::vector<double>{1, 6, 9}));
}

TEST(CountMatches, NoMatchGivesInfiniteCrossing) {
  const ScoreSeries s = manual(ScoreSeries::Mode::exact, {0, 2}, {0.1, 0.2}, 5.0, 4.0);
  const MatchReport r = count_matches(s, MatchConfig{0.3, 4.0, 5.0, 0.5, 1.0});
  EXPECT_EQ(r.count, 0u);
  EXPECT_TRUE(std::isinf(r.first_crossing));
  EXPECT_THROW(count_matches(s, MatchConfig{0.3, 4.0, 5.0, 1.0, 1.0}), Error);
}

TEST(CountMatches, OnsetsAreSpacedAndBounded) {
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    const TemplateKernel gk = build_template_kernel(random_template(seed, 3, 40.0), kBox);
    const MultiTrain y = poisson_data(seed + 9, 3, 0.08, 440.0);
    const ScoreSeries s = ScoreEngine(gk, 400.0).exact_series(y);
    for (double alpha : {0.2, 0.5, 0.8}) {
      const double gap = (1.0 - alpha) * 40.0;
      const MatchReport r = count_matches(s, MatchConfig{0.02, 40.0, 400.0, alpha, 0.2});
      EXPECT_LE(r.count, static_cast<std::size_t>(400.0 / gap) + 1);
      for (std::size_t j = 0; j < r.count; ++j) {
        EXPECT_LE(r.onsets[j], 400.0);
        // every onset sits on (the closure of) the excursion set
        const double t = r.onsets[j];
        const double right = score_at(y, gk, t + 1e-9);
        const double here = score_at(y, gk, t);
        EXPECT_GE(std::max(here, right), 0.02 - 1e-12);
        if (j > 0) EXPECT_GE(r.onsets[j], r.onsets[j - 1] + gap);
      }
      EXPECT_EQ(r.count > 0, max_score(s) >= 0.02);
    }
  }
}

TEST(CountMatches, SecondCrossingInsideExclusionWindow) {
  // crossings at 0 and 0.5 (1 - alpha) T with nothing above c in between
  const double T = 40.0, alpha = 0.5, gap = (1.0 - alpha) * T;
  const ScoreSeries one = manual(ScoreSeries::Mode::exact, {0, 1, 0.5 * gap, 0.5 * gap + 1}, {1, 0, 1, 0}, 30.0, T);
  EXPECT_EQ(count_matches(one, MatchConfig{0.5, T, 30.0, alpha, 1.0}).count, 1u);
  const ScoreSeries two = manual(ScoreSeries::Mode::exact, {0, 1, gap + 1, gap + 2}, {1, 0, 1, 0}, 30.0, T);
  EXPECT_EQ(count_matches(two, MatchConfig{0.5, T, 30.0, alpha, 1.0}).count, 2u);
}

TEST(CountMatches, MonotoneInThresholdAndHorizon) {
  for (std::uint64_t seed = 1; seed <= 12; ++seed) {
    const TemplateKernel gk = build_template_kernel(random_template(seed, 3, 40.0), kBox);
    const MultiTrain y = poisson_data(seed + 300, 3, 0.09, 440.0);
    const ScoreSeries s = ScoreEngine(gk, 400.0).exact_series(y);
    for (double alpha : {0.3, 0.8}) {
      std::size_t prev = std::numeric_limits<std::size_t>::max();
      for (int n = -20; n < 120; ++n) {
        const std::size_t u = count_matches(s, MatchConfig{n * 0.1 / 40.0, 40.0, 400.0, alpha, 0.2}).count;
        EXPECT_LE(u, prev);
        prev = u;
      }
      std::size_t last = 0;
      for (double a = 20.0; a <= 400.0; a += 20.0) {
        const ScoreSeries sa = ScoreEngine(gk, a).exact_series(y);
        const std::size_t u = count_matches(sa, MatchConfig{0.05, 40.0, a, alpha, 0.2}).count;
        EXPECT_GE(u, last);
        last = u;
      }
    }
  }
}
