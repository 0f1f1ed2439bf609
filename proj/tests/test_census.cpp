#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "ontoq/census.hpp"

using namespace ontoq;

namespace {

std::vector<MapTable> all_maps(std::uint64_t n) {
  std::vector<MapTable> maps;
  oracle::for_each_map(n, [&](const std::vector<std::uint64_t>& next) { maps.emplace_back(next); });
  return maps;
}

Rational mean_count(const CycleCensus& c, std::uint64_t p) {
  const auto h = c.histogram();
  const auto it = h.find(p);
  return Rational(it == h.end() ? 0 : it->second, c.params.num_maps);
}

}  // namespace

TEST(Enumeration, TwoStates) {
  const auto maps = all_maps(2);
  ASSERT_EQ(maps.size(), 4U);
  const auto c = census_from_maps(maps, CensusMode::full);
  EXPECT_EQ(mean_count(c, 1), Rational(1));
  EXPECT_EQ(mean_count(c, 2), exact_expected_cycles_rational(2, 2));
  EXPECT_EQ(exact_expected_cycles_rational(2, 2), Rational(1, 4));
}

TEST(Enumeration, ThreeStates) {
  const auto maps = all_maps(3);
  ASSERT_EQ(maps.size(), 27U);
  const auto c = census_from_maps(maps, CensusMode::full);
  EXPECT_EQ(mean_count(c, 1), Rational(1));
  EXPECT_EQ(mean_count(c, 2), Rational(1, 3));
  EXPECT_EQ(mean_count(c, 3), Rational(2, 27));
  for (std::uint64_t p = 1; p <= 3; ++p) EXPECT_EQ(mean_count(c, p), exact_expected_cycles_rational(p, 3));
}

TEST(Enumeration, NaiveCounterAgreesUpToFiveStates) {
  for (std::uint64_t n = 1; n <= 5; ++n) {
    std::vector<Rational> total(n + 1, 0);
    std::uint64_t count = 0;
    oracle::for_each_map(n, [&](const std::vector<std::uint64_t>& next) {
      const auto by_p = oracle::naive_cycles_by_period(next);
      for (std::uint64_t p = 1; p <= n; ++p) total[p] += by_p[p];
      ++count;
    });
    for (std::uint64_t p = 1; p <= n; ++p) EXPECT_EQ(total[p] / count, exact_expected_cycles_rational(p, n)) << n << " " << p;
  }
}

TEST(ExactModel, BasicValues) {
  EXPECT_EQ(exact_expected_cycles(1, 10), 1.0);
  EXPECT_DOUBLE_EQ(exact_expected_cycles(2, 3), 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(exact_expected_cycles(3, 3), 2.0 / 27.0);
  EXPECT_EQ(exact_expected_cycles(4, 3), 0.0);
  EXPECT_EQ(exact_expected_cycles_rational(4, 3), Rational(0));
  EXPECT_THROW(exact_expected_cycles(0, 3), std::invalid_argument);
}

TEST(ExactModel, BoundedByInverseP) {
  for (std::uint64_t n : {5ULL, 64ULL, 1000ULL}) {
    for (std::uint64_t p = 1; p <= n; ++p) {
      const double e = exact_expected_cycles(p, n);
      EXPECT_LE(e, 1.0 / static_cast<double>(p) + 1e-15);
      EXPECT_GE(e, 0.0);
    }
  }
}

TEST(ExactModel, DoubleMatchesRational) {
  for (std::uint64_t p : {1ULL, 2ULL, 7ULL, 30ULL}) {
    EXPECT_NEAR(exact_expected_cycles(p, 200), to_double(exact_expected_cycles_rational(p, 200)), 1e-14);
  }
  const PeriodModel model{200, ModelKind::exact_oracle};
  const auto table = model.expected_table(250);
  for (std::uint64_t p = 1; p <= 250; ++p) EXPECT_NEAR(table[p], exact_expected_cycles(p, 200), 1e-15);
}

TEST(ApproxModel, Values) {
  EXPECT_NEAR(approx_expected_cycles(1, 1e12), 1.0, 1e-12);
  const double n = 4096;
  EXPECT_NEAR(approx_expected_cycles(64, n), std::exp(-0.5) / 64.0, 1e-15);
  EXPECT_EQ(survival_Q(0, 17), 1.0);
  EXPECT_NEAR(survival_Q(std::sqrt(2.0 * n), n), std::exp(-1.0), 1e-15);
  EXPECT_NEAR(period_density(1, n), std::exp(-1.0 / (2 * n)), 1e-15);
  for (double p : {1.0, 10.0, 100.0}) {
    EXPECT_NEAR(period_density(p, n) / period_density(2 * p, n), 2.0 * std::exp(3 * p * p / (2 * n)), 1e-9);
    EXPECT_EQ(period_density(p, n), approx_expected_cycles(p, n));
  }
  EXPECT_THROW(survival_Q(-1, 2), std::invalid_argument);
}

TEST(ApproxModel, CloseToExactForSmallP) {
  const std::uint64_t n = 4096;
  for (std::uint64_t p = 1; p <= 32; ++p) {
    const double e = exact_expected_cycles(p, n);
    EXPECT_LT(std::abs(approx_expected_cycles(static_cast<double>(p), n) - e) / e, 0.02) << p;
  }
}

TEST(ApproxModel, ConvergesAtFixedP) {
  double prev = 1.0;
  for (double n : {1e2, 1e3, 1e4, 1e5, 1e6}) {
    const double gap = std::abs(approx_expected_cycles(8, n) / exact_expected_cycles(8, static_cast<std::uint64_t>(n)) - 1.0);
    EXPECT_LT(gap, prev);
    prev = gap;
  }
  EXPECT_LT(prev, 1e-4);
}

TEST(RunCensus, RecurrentCountsMatchHistogram) {
  const auto c = run_census({1000, 50, CensusMode::full, 0, 4});
  for (const auto& m : c.maps) {
    std::uint64_t r = 0;
    for (const auto& [p, k] : m.periods) r += p * k;
    EXPECT_EQ(r, m.recurrent);
  }
}

TEST(RunCensus, MeanRecurrentMatchesExpectation) {
  const std::uint64_t n = 4096;
  const auto c = run_census({n, 500, CensusMode::full, 0, 12});
  double want = 0.0;
  for (std::uint64_t p = 1; p <= n; ++p) want += static_cast<double>(p) * exact_expected_cycles(p, n);
  const auto got = recurrent_per_map(c);
  EXPECT_LT(std::abs(got.mean - want), 3.0 * got.stderr_) << got.mean << " vs " << want;
}

TEST(RunCensus, IndependentOfWorkerCount) {
  for (auto mode : {CensusMode::full, CensusMode::sampled}) {
    const CensusParams p{3000, 40, mode, 16, 99};
    const auto a = run_census(p, 1);
    const auto b = run_census(p, 4);
    ASSERT_EQ(a.maps.size(), b.maps.size());
    for (std::size_t i = 0; i < a.maps.size(); ++i) {
      EXPECT_EQ(a.maps[i].periods, b.maps[i].periods);
      EXPECT_EQ(a.maps[i].cyclic_start_periods, b.maps[i].cyclic_start_periods);
      EXPECT_EQ(a.maps[i].rho_lengths, b.maps[i].rho_lengths);
    }
    EXPECT_EQ(a.histogram(), b.histogram());
  }
}

TEST(RunCensus, SeedChangesResult) {
  EXPECT_NE(run_census({3000, 20, CensusMode::full, 0, 1}).histogram(), run_census({3000, 20, CensusMode::full, 0, 2}).histogram());
}

TEST(RunCensus, BadParameters) {
  EXPECT_THROW(run_census({1, 10, CensusMode::full, 0, 0}), std::invalid_argument);
  EXPECT_THROW(run_census({10, 0, CensusMode::full, 0, 0}), std::invalid_argument);
  EXPECT_THROW(run_census({10, 5, CensusMode::sampled, 0, 0}), std::invalid_argument);
}

TEST(RunCensus, MapsAreTheSeededStreams) {
  const auto c = run_census({500, 3, CensusMode::full, 0, 7});
  for (std::uint64_t i = 0; i < 3; ++i) {
    auto g = rng::make_stream(7, i);
    const auto m = random_map(500, g);
    EXPECT_EQ(c.maps[i].periods, record_full(m).periods);
  }
}

TEST(Sampled, ZeroTailStartsAreOnCycles) {
  const auto m = random_map(2000, 31);
  const auto d = decompose(m);
  rng::engine g(5);
  const auto r = record_sampled(m, g, 5000);
  std::uint64_t starts = 0, cyclic = 0;
  for (const auto& [p, c] : r.periods) starts += c;
  for (const auto& [p, c] : r.cyclic_start_periods) {
    cyclic += c;
    EXPECT_TRUE(std::any_of(d.cycles.begin(), d.cycles.end(), [&](const Cycle& cy) { return cy.period() == p; }));
  }
  EXPECT_EQ(starts, 5000U);
  const double frac = static_cast<double>(cyclic) / 5000.0;
  const double want = static_cast<double>(d.recurrent_count()) / 2000.0;
  EXPECT_NEAR(frac, want, 4.0 * std::sqrt(want * (1 - want) / 5000.0));
}

TEST(Sampled, SurvivalTracksQ) {
  const double n = 65536;
  // Beyond x ~ 2 sqrt(N) the per-map fractions are dominated by a few maps and the
  // sample standard error is no longer a reliable yardstick.
  const auto c = run_census({65536, 3000, CensusMode::sampled, 16, 8});
  for (std::uint64_t x : {16ULL, 64ULL, 128ULL, 256ULL, 362ULL, 512ULL}) {
    const auto f = survival_fraction(c, x);
    const double q = survival_Q(static_cast<double>(x), n);
    EXPECT_LT(std::abs(f.mean - q), 3.0 * f.stderr_ + 1e-12) << "x = " << x << ": " << f.mean << " vs " << q;
  }
}

TEST(Gof, ExactModelAccepted) {
  const auto c = run_census({4096, 500, CensusMode::full, 0, 21});
  const auto g = gof_compare(c, {4096, ModelKind::exact_oracle});
  EXPECT_GT(g.p_value, 0.001) << "chi2 " << g.chi2 << " dof " << g.dof;
  for (const auto& b : g.bins) EXPECT_GE(b.expected, gof_min_expected);
  EXPECT_EQ(g.dof, g.bins.size());
}

TEST(Gof, WrongNRejected) {
  const auto c = run_census({4096, 500, CensusMode::full, 0, 21});
  const auto g = gof_compare(c, {1024, ModelKind::exact_oracle});
  EXPECT_LT(g.p_value, 1e-6);
}

TEST(Gof, SampledModeUsesCyclicStarts) {
  const auto c = run_census({4096, 300, CensusMode::sampled, 256, 5});
  EXPECT_GT(gof_compare(c, {4096, ModelKind::exact_oracle}).p_value, 0.001);
  EXPECT_LT(gof_compare(c, {512, ModelKind::exact_oracle}).p_value, 1e-6);
}

TEST(Gof, BootstrapPValuesUniform) {
  // Censuses drawn from the model itself: p-values should be uniform (Kolmogorov-Smirnov).
  std::vector<double> ps;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto c = run_census({1024, 200, CensusMode::full, 0, 1000 + seed});
    ps.push_back(gof_compare(c, {1024, ModelKind::exact_oracle}).p_value);
  }
  std::sort(ps.begin(), ps.end());
  double d = 0.0;
  for (std::size_t i = 0; i < ps.size(); ++i) {
    const double n = static_cast<double>(ps.size());
    d = std::max({d, std::abs(ps[i] - static_cast<double>(i) / n), std::abs(ps[i] - static_cast<double>(i + 1) / n)});
  }
  EXPECT_LT(d, 1.95 / std::sqrt(static_cast<double>(ps.size())));  // alpha = 0.001
}

TEST(Gof, TooFewBins) {
  const std::vector<MapTable> maps{MapTable({0, 1}), MapTable({1, 0})};
  const auto c = census_from_maps(maps, CensusMode::full);
  EXPECT_THROW(gof_compare(c, {2, ModelKind::exact_oracle}), std::invalid_argument);
}

TEST(EnergyHistogram, IdentityMaps) {
  const std::vector<MapTable> maps(5, MapTable({0, 1, 2, 3}));
  const auto c = census_from_maps(maps, CensusMode::full);
  const auto h = energy_histogram(c, 2.0, 0.5);
  ASSERT_EQ(h.bins.size(), 1U);
  EXPECT_EQ(h.bins[0].e_lo, 4.0);
  EXPECT_EQ(h.bins[0].e_hi, 4.0);
  EXPECT_EQ(h.bins[0].count, 20U);
  EXPECT_EQ(h.e_max, 4.0);
  EXPECT_TRUE(h.e_max_consistent);
}

TEST(EnergyHistogram, BinsCoverPeriodsOnce) {
  const auto c = run_census({5000, 30, CensusMode::full, 0, 3});
  const auto h = energy_histogram(c);
  std::uint64_t total = 0, expected_total = 0;
  for (std::size_t i = 0; i < h.bins.size(); ++i) {
    total += h.bins[i].count;
    EXPECT_LE(h.bins[i].p_lo, h.bins[i].p_hi);
    if (i > 0) {
      EXPECT_EQ(h.bins[i].p_lo, h.bins[i - 1].p_hi + 1);
    }
    EXPECT_LE(h.bins[i].e_lo, h.bins[i].e_hi);
  }
  for (const auto& [p, k] : c.histogram()) expected_total += k;
  EXPECT_EQ(total, expected_total);
}

TEST(EnergyHistogram, FlatInLogEnergyFullMode) {
  const auto c = run_census({16384, 300, CensusMode::full, 0, 17});
  const auto h = energy_histogram(c);
  ASSERT_TRUE(h.flatness.has_value());
  EXPECT_GE(h.flatness->dof, 3U);
  EXPECT_GT(h.flatness->p_value, 0.01) << "chi2 " << h.flatness->chi2;
  EXPECT_TRUE(h.e_min_consistent);
  EXPECT_TRUE(h.e_max_consistent);
  // Scale of the flat law is one level per unit of sum 1/P.
  EXPECT_NEAR(h.flatness->scale, 1.0, 0.1);
}

TEST(EnergyHistogram, NotFlatInPeriod) {
  // Negative control: a census whose cycles have all the same period mass per bin is rejected.
  std::vector<MapTable> maps;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    // One cycle of every length 1..31 in each map: uniform in P, not in log P.
    std::vector<state_t> next;
    for (std::uint64_t len = 1; len < 32; ++len) {
      const auto base = next.size();
      for (std::uint64_t k = 0; k < len; ++k) next.push_back(base + (k + 1) % len);
    }
    maps.emplace_back(next);
  }
  const auto c = census_from_maps(maps, CensusMode::full);
  EnergyBinning b;
  b.flat_margin = 1.0;
  const auto h = energy_histogram(c, 1.0, 1.0, b);
  ASSERT_TRUE(h.flatness.has_value());
  EXPECT_LT(h.flatness->p_value, 1e-6);
}

TEST(EnergyHistogram, Errors) {
  CycleCensus empty;
  EXPECT_THROW(energy_histogram(empty), std::invalid_argument);
  const auto c = census_from_maps(std::vector<MapTable>{MapTable({0})}, CensusMode::full);
  EXPECT_THROW(energy_histogram(c, 0.0), std::invalid_argument);
}

TEST(CensusJson, RoundTrip) {
  for (auto mode : {CensusMode::full, CensusMode::sampled}) {
    const auto c = run_census({2048, 60, mode, 32, 6});
    const auto s = summarize(c, 1.0, 1.0);
    const auto j = to_json(s);
    EXPECT_EQ(j.at("schema_version"), 1);
    const auto back = census_from_json(nlohmann::json::parse(j.dump()));
    EXPECT_EQ(back.params.n_states, s.params.n_states);
    EXPECT_EQ(back.params.mode, s.params.mode);
    EXPECT_EQ(back.params.starts_per_map, s.params.starts_per_map);
    EXPECT_EQ(back.histogram, s.histogram);
    EXPECT_EQ(back.e_min, s.e_min);
    EXPECT_EQ(back.recurrent_mean.has_value(), mode == CensusMode::full);
    ASSERT_EQ(back.gof.has_value(), s.gof.has_value());
    if (s.gof) {
      EXPECT_EQ(back.gof->chi2, s.gof->chi2);
      EXPECT_EQ(back.gof->dof, s.gof->dof);
    }
  }
  EXPECT_THROW(census_from_json(nlohmann::json::object()), format_error);
}

TEST(CensusMode, Parse) {
  EXPECT_EQ(parse_census_mode("full-decomposition"), CensusMode::full);
  EXPECT_EQ(parse_census_mode("sampled"), CensusMode::sampled);
  EXPECT_THROW(parse_census_mode("all"), std::invalid_argument);
}
