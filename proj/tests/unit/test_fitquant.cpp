#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>

#include "cardie/error.hpp"
#include "cardie/fitquant.hpp"
#include "cardie/simplex.hpp"

using namespace cardie;

namespace {

double nr(double l, double g, double m) { return std::pow(l, g) / (std::pow(l, g) + std::pow(m, g)); }

std::vector<PixelSample> synthetic(double gamma, double mu, int n, double noise = 0.0, std::uint64_t seed = 1) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> eps(0.0, noise > 0 ? noise : 1.0);
  std::vector<PixelSample> s;
  for (int i = 0; i < n; ++i) {
    const double l = 0.01 + 0.98 * i / (n - 1);
    s.push_back({l, nr(l, gamma, mu) + (noise > 0 ? eps(rng) : 0.0)});
  }
  return s;
}

LuminanceMap ramp(int w, int h) {
  LuminanceMap m(w, h);
  for (std::size_t i = 0; i < m.size(); ++i) m.values[i] = static_cast<double>(i) / static_cast<double>(m.size());
  return m;
}

}  // namespace

TEST(NakaRushton, Examples) {
  for (double g : {0.1, 1.0, 2.2, 7.0}) EXPECT_NEAR(naka_rushton(0.37, g, 0.37), 0.5, 1e-15);
  EXPECT_DOUBLE_EQ(naka_rushton(0.0, 2.0, 0.5), 0.0);
  EXPECT_DOUBLE_EQ(naka_rushton(1.0, 1.0, 1.0), 0.5);
  for (double l : {0.01, 0.2, 0.9}) EXPECT_NEAR(naka_rushton(l, 1.7, 0.3), nr(l, 1.7, 0.3), 1e-14);
}

TEST(NakaRushton, Monotonicity) {
  for (double g : {0.05, 1.0, 4.0}) {
    double prev = -1;
    for (int i = 1; i <= 100; ++i) {
      const double v = naka_rushton(i / 100.0, g, 0.4);
      EXPECT_GT(v, prev);
      EXPECT_LT(v, 1.0);
      prev = v;
    }
    double prev_mu = 2;
    for (int i = 1; i <= 20; ++i) {
      const double v = naka_rushton(0.5, g, i * 0.07);
      EXPECT_LT(v, prev_mu);
      prev_mu = v;
    }
  }
}

TEST(SamplePixels, AllPixelsWhenPEqualsCount) {
  const auto a = ramp(10, 10);
  const auto s = sample_pixels(a, a, 100, 3);
  std::set<double> seen;
  for (const auto& p : s) {
    seen.insert(p.in);
    EXPECT_EQ(p.in, p.out);
  }
  EXPECT_EQ(seen.size(), 100u);
}

TEST(SamplePixels, DeterministicAndChecked) {
  const auto a = ramp(8, 8);
  const auto x = sample_pixels(a, a, 10, 42), y = sample_pixels(a, a, 10, 42);
  ASSERT_EQ(x.size(), y.size());
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_EQ(x[i].in, y[i].in);
  EXPECT_THROW(sample_pixels(a, a, 65, 0), ArgumentError);
  EXPECT_THROW(sample_pixels(a, ramp(4, 4), 2, 0), ArgumentError);
}

TEST(SamplePixels, UniformInclusion) {
  const auto a = ramp(10, 10);
  std::vector<int> hits(100, 0);
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    for (const auto& p : sample_pixels(a, a, 10, seed)) ++hits[static_cast<std::size_t>(std::lround(p.in * 100))];
  }
  // Binomial(1000, 0.1) counts: 96.9% fall within 0.1 +- 0.02; allow a few beyond.
  int outside = 0;
  for (int h : hits) outside += std::fabs(h / 1000.0 - 0.1) > 0.02;
  EXPECT_LE(outside, 10);
  for (int h : hits) EXPECT_NEAR(h / 1000.0, 0.1, 0.04);
}

TEST(FitPair, RecoversNoiselessParameters) {
  const auto s = synthetic(2.2, 0.5, 100);
  const auto f = fit_pair(s);
  EXPECT_TRUE(f.converged);
  EXPECT_NEAR(f.gamma, 2.2, 0.01 * 2.2);
  EXPECT_NEAR(f.mu, 0.5, 0.01 * 0.5);
  EXPECT_LT(f.rmse, 1e-6);
}

TEST(FitPair, IdentityMatchesBruteForceGrid) {
  std::vector<PixelSample> s;
  for (int i = 0; i <= 90; ++i) {
    const double l = 0.05 + 0.01 * i;
    s.push_back({l, l});
  }
  const FitConfig cfg;
  const auto f = fit_pair(s, cfg);
  double grid_best = INFINITY;
  const double lg0 = std::log(cfg.gamma_bounds.first), lg1 = std::log(cfg.gamma_bounds.second);
  const double lm0 = std::log(cfg.mu_bounds.first), lm1 = std::log(cfg.mu_bounds.second);
  for (int i = 0; i < 200; ++i) {
    for (int j = 0; j < 200; ++j) {
      const double g = std::exp(lg0 + (lg1 - lg0) * i / 199), m = std::exp(lm0 + (lm1 - lm0) * j / 199);
      double sse = 0;
      for (const auto& p : s) sse += (nr(p.in, g, m) - p.out) * (nr(p.in, g, m) - p.out);
      grid_best = std::min(grid_best, std::sqrt(sse / s.size()));
    }
  }
  // the optimizer may beat the grid; it must never lose to it, and the objectives agree
  EXPECT_LE(f.rmse, grid_best + 1e-4);
  EXPECT_NEAR(f.rmse * f.rmse, grid_best * grid_best, 1e-4);
}

TEST(FitPair, NoisyRecovery) {
  const auto s = synthetic(1.5, 0.3, 100, 0.01, 17);
  const auto f = fit_pair(s);
  EXPECT_NEAR(f.gamma, 1.5, 0.05 * 1.5);
  EXPECT_NEAR(f.mu, 0.3, 0.05 * 0.3);
}

TEST(FitPair, ConstantInputIsNonConverged) {
  std::vector<PixelSample> s(20, PixelSample{0.4, 0.7});
  const auto f = fit_pair(s);
  EXPECT_FALSE(f.converged);
  EXPECT_TRUE(std::isnan(f.gamma));
  EXPECT_FALSE(fit_pair(std::vector<PixelSample>{{0.2, 0.3}}).converged);
}

TEST(FitPair, DescentOverEveryStart) {
  const auto s = synthetic(0.8, 0.05, 100, 0.02, 5);
  const FitConfig cfg;
  const auto f = fit_pair(s, cfg);
  const double at_fit = fit_objective(s, f.gamma, f.mu);
  for (const auto& [g, m] : multistart_points(cfg)) EXPECT_LE(at_fit, fit_objective(s, g, m));
  EXPECT_GE(f.gamma, cfg.gamma_bounds.first);
  EXPECT_LE(f.mu, cfg.mu_bounds.second);
}

TEST(FitPair, BitwiseDeterministic) {
  const auto s = synthetic(3.0, 0.9, 100, 0.01, 8);
  const auto a = fit_pair(s), b = fit_pair(s);
  EXPECT_EQ(a.gamma, b.gamma);
  EXPECT_EQ(a.mu, b.mu);
  EXPECT_EQ(a.rmse, b.rmse);
}

TEST(FitConfig, Validation) {
  FitConfig c;
  c.pixels = 1;
  EXPECT_THROW(c.validate(), ConfigError);
  c = FitConfig{};
  c.mu_bounds = {0.5, 0.1};
  EXPECT_THROW(c.validate(), ConfigError);
  c.mu_bounds = {0.0, 0.1};
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Simplex, QuadraticInBox) {
  auto f = [](const std::vector<double>& x) { return (x[0] - 1) * (x[0] - 1) + 10 * (x[1] + 2) * (x[1] + 2); };
  const auto r = minimize_simplex(f, {0, 0}, {-5, -5}, {5, 5});
  EXPECT_TRUE(r.converged);
  EXPECT_NEAR(r.x[0], 1, 1e-8);
  EXPECT_NEAR(r.x[1], -2, 1e-8);
  // minimum outside the box lands on the boundary
  const auto b = minimize_simplex(f, {0, 0}, {-5, -1}, {5, 5});
  EXPECT_NEAR(b.x[1], -1, 1e-9);
}

TEST(VarianceDelta, Examples) {
  LuminanceMap flat(32, 32, 0.5), board(32, 32);
  for (int y = 0; y < 32; ++y) {
    for (int x = 0; x < 32; ++x) board.at(x, y) = (x + y) % 2;
  }
  EXPECT_DOUBLE_EQ(variance_delta(flat, flat).delta_sigma, 0.0);
  EXPECT_DOUBLE_EQ(variance_delta(flat, board).delta_sigma, 0.25);
  EXPECT_DOUBLE_EQ(variance_delta(board, flat).delta_sigma, variance_delta(flat, board).delta_sigma);
  EXPECT_THROW(variance_delta(flat, LuminanceMap(16, 16)), NumericError);
}

TEST(Distributions, OneGroupWholeDataset) {
  std::vector<FitParams> fits;
  std::vector<VarianceDelta> vars;
  std::vector<std::pair<std::string, std::string>> grouping;
  for (int i = 0; i < 10; ++i) {
    const std::string id = "p" + std::to_string(i);
    fits.push_back({id, 1.0 + i, 0.5, 0.0, i != 3});
    vars.push_back({id, 0, 0, 0.01 * i});
    grouping.emplace_back(id, "all");
  }
  const auto set = collect_distributions(fits, vars, grouping);
  ASSERT_EQ(set.groups.size(), 1u);
  EXPECT_EQ(set.groups[0].gammas.size(), 9u);
  EXPECT_EQ(set.groups[0].sigmas.size(), 10u);
  EXPECT_EQ(set.groups[0].excluded_nonconverged, 1u);
  EXPECT_FALSE(set.warnings.empty());
}

TEST(Distributions, SeparatedOperators) {
  std::vector<FitParams> fits;
  std::vector<std::pair<std::string, std::string>> grouping;
  for (int i = 0; i < 20; ++i) {
    const std::string id = "p" + std::to_string(i);
    const bool high = i % 2;
    fits.push_back(fit_pair(synthetic(high ? 3.0 : 1.0, 0.4, 50, 0.01, static_cast<std::uint64_t>(i))));
    fits.back().id = id;
    grouping.emplace_back(id, high ? "10" : "2");
  }
  const auto set = collect_distributions(fits, {}, grouping);
  ASSERT_EQ(set.groups.size(), 2u);
  EXPECT_EQ(set.groups[0].name, "2");  // numeric-aware order
  double m0 = 0, m1 = 0;
  for (double g : set.groups[0].gammas) m0 += g / 10;
  for (double g : set.groups[1].gammas) m1 += g / 10;
  EXPECT_LT(m0 + 1.0, m1);
}

TEST(Distributions, ExplicitOrderAndMissingIds) {
  std::vector<FitParams> fits{{"a", 1, 1, 0, true}, {"b", 1, 1, 0, true}};
  const auto set = collect_distributions(fits, {}, {{"a", "low"}, {"b", "high"}}, {"low", "average", "high"});
  ASSERT_EQ(set.groups.size(), 2u);
  EXPECT_EQ(set.groups[0].name, "low");
  EXPECT_EQ(set.groups[1].name, "high");
  EXPECT_EQ(set.warnings.size(), 1u);  // empty "average" group
  EXPECT_THROW(collect_distributions(fits, {}, {{"zz", "x"}}), PreconditionError);
}

TEST(FitTables, CsvRoundTrip) {
  std::vector<FitParams> fits{{"a", 2.5, 0.125, 1e-3, true}, {"b", NAN, NAN, NAN, false}};
  const auto back = parse_fits_csv(fits_csv(fits));
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].gamma, 2.5);
  EXPECT_TRUE(back[0].converged);
  EXPECT_TRUE(std::isnan(back[1].mu));
  std::vector<VarianceDelta> vars{{"a", 0.1, 0.3, 0.2}};
  EXPECT_EQ(parse_variances_csv(variances_csv(vars))[0].delta_sigma, 0.2);
}

TEST(FitTables, HistogramsShareEdges) {
  DistributionSet set;
  set.groups.push_back({"a", {"x", "y"}, {1.0, 2.0}, {0.1, 0.2}, {0.0, 0.5}, 0});
  set.groups.push_back({"b", {"z"}, {3.0}, {0.3}, {1.0}, 0});
  const auto text = distribution_histograms_csv(set, 4);
  EXPECT_NE(text.find("a,gamma,1,1.5,1"), std::string::npos);
  EXPECT_NE(text.find("b,gamma,2.5,3,1"), std::string::npos);
}
