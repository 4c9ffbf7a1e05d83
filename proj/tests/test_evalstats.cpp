#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "softprior/evalstats.hpp"
#include "support.hpp"

using namespace softprior;

namespace {

EvalCurve flat(double value, int points = 101, double span = 100.0) {
  EvalCurve c;
  for (int i = 0; i < points; ++i) {
    c.steps.push_back(span * i / (points - 1));
    c.values.push_back(value);
  }
  return c;
}

}  // namespace

TEST_CASE("area ratio trivial cases") {
  std::mt19937_64 gen(1);
  std::normal_distribution<double> normal(3.0, 1.0);
  EvalCurve base;
  for (int i = 1; i <= 100; ++i) {
    base.steps.push_back(300.0 * i);
    base.values.push_back(normal(gen));
  }
  CHECK(area_ratio(base, base) == 0.0);

  EvalCurve doubled = base;
  for (double& v : doubled.values) v *= 2.0;
  CHECK(area_ratio(doubled, base) == doctest::Approx(1.0).epsilon(1e-12));

  CHECK(area_ratio(flat(1.5), flat(1.0)) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(normalized_area(flat(2.5)) == doctest::Approx(2.5).epsilon(1e-12));

  // Scaling both curves leaves the ratio unchanged.
  EvalCurve a = doubled, b = base;
  for (double& v : a.values) v *= 7.3;
  for (double& v : b.values) v *= 7.3;
  CHECK(area_ratio(a, b) == doctest::Approx(area_ratio(doubled, base)).epsilon(1e-12));
}

TEST_CASE("area uses the trapezoid rule over the covered span") {
  EvalCurve c{{0.0, 1.0, 3.0}, {0.0, 2.0, 2.0}};
  // (0+2)/2*1 + (2+2)/2*2 = 5 over span 3
  CHECK(normalized_area(c) == doctest::Approx(5.0 / 3.0));
  CHECK(normalized_area(EvalCurve{{10.0}, {4.0}}) == 4.0);
}

TEST_CASE("area ratio errors") {
  CHECK_THROWS_AS(area_ratio(flat(1.0), flat(0.0)), UndefinedRatioError);
  CHECK_THROWS_AS(area_ratio(flat(1.0, 11), flat(1.0, 21)), std::invalid_argument);
  CHECK_THROWS_AS(normalized_area(EvalCurve{{0.0, 0.0}, {1.0, 1.0}}), std::invalid_argument);
  CHECK_THROWS_AS(normalized_area(EvalCurve{}), std::invalid_argument);
}

TEST_CASE("interquartile mean") {
  CHECK(iqm(std::vector<double>{1, 2, 3, 4}) == 2.5);
  CHECK(iqm(std::vector<double>{0.1, 0.2, 0.3, 0.4}) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(iqm(std::vector<double>(7, 3.25)) == doctest::Approx(3.25).epsilon(1e-15));
  CHECK(iqm(std::vector<double>{5.0}) == 5.0);
  CHECK_THROWS_AS(iqm(std::vector<double>{}), std::invalid_argument);

  std::mt19937_64 gen(2);
  std::normal_distribution<double> normal;
  for (int n : {1, 2, 3, 5, 6, 7, 13, 1000, 1001, 1002, 1003}) {
    std::vector<double> v(static_cast<std::size_t>(n));
    for (double& x : v) x = std::exp(normal(gen));
    const double got = iqm(v);
    CHECK(std::abs(got - oracle::iqm_by_expansion(v)) <= 1e-12 * std::max(1.0, std::abs(got)));
    CHECK(got >= *std::min_element(v.begin(), v.end()));
    CHECK(got <= *std::max_element(v.begin(), v.end()));
    std::shuffle(v.begin(), v.end(), gen);
    CHECK(iqm(v) == got);
  }
}

TEST_CASE("bootstrap interval basics") {
  const Statistic stat = [](std::span<const double> v) { return iqm(v); };
  const std::vector<std::vector<double>> same{std::vector<double>(50, 0.7)};
  Rng rng(3);
  const Interval flat_ci = stratified_bootstrap_ci(same, stat, 1000, 0.95, rng);
  CHECK(flat_ci.lower == flat_ci.upper);
  CHECK(flat_ci.lower == doctest::Approx(0.7).epsilon(1e-15));

  std::mt19937_64 gen(4);
  std::normal_distribution<double> normal;
  std::vector<std::vector<double>> strata(3);
  for (auto& s : strata)
    for (int i = 0; i < 40; ++i) s.push_back(normal(gen));
  Rng a(5), b(5);
  const Interval x = stratified_bootstrap_ci(strata, stat, 1000, 0.95, a);
  const Interval y = stratified_bootstrap_ci(strata, stat, 1000, 0.95, b);
  CHECK(x.lower == y.lower);
  CHECK(x.upper == y.upper);
  CHECK(x.lower < x.upper);

  const std::vector<std::vector<double>> with_empty{{1.0}, {}};
  CHECK_THROWS_AS(stratified_bootstrap_ci(with_empty, stat, 1000, 0.95, a), std::invalid_argument);
}

TEST_CASE("bootstrap interval for the mean covers zero about 95% of the time") {
  const Statistic mean_stat = [](std::span<const double> v) { return mean(v); };
  std::mt19937_64 gen(6);
  std::normal_distribution<double> normal;
  Rng rng(7);
  int covered = 0;
  const int reps = 500;
  for (int r = 0; r < reps; ++r) {
    std::vector<std::vector<double>> data(1);
    for (int i = 0; i < 1000; ++i) data[0].push_back(normal(gen));
    const Interval ci = stratified_bootstrap_ci(data, mean_stat, 1000, 0.95, rng);
    if (ci.lower <= 0.0 && 0.0 <= ci.upper) ++covered;
  }
  const double rate = covered / double(reps);
  CHECK(rate >= 0.92);
  CHECK(rate <= 0.98);
}

TEST_CASE("bootstrap intervals narrow with more data") {
  const Statistic stat = [](std::span<const double> v) { return iqm(v); };
  std::mt19937_64 gen(8);
  std::normal_distribution<double> normal;
  std::vector<std::vector<double>> small(1), large(1);
  for (int i = 0; i < 1000; ++i) {
    const double x = normal(gen);
    if (i < 100) small[0].push_back(x);
    large[0].push_back(x);
  }
  Rng a(9), b(9);
  const Interval s = stratified_bootstrap_ci(small, stat, 2000, 0.95, a);
  const Interval l = stratified_bootstrap_ci(large, stat, 2000, 0.95, b);
  CHECK(l.upper - l.lower < s.upper - s.lower);
}

TEST_CASE("performance profile") {
  std::mt19937_64 gen(10);
  std::normal_distribution<double> normal;
  std::vector<double> values(257);
  for (double& v : values) v = normal(gen);
  values[3] = 0.0;
  values[4] = 0.0;
  std::vector<double> thresholds;
  for (int i = -30; i <= 30; ++i) thresholds.push_back(i / 10.0);
  const auto profile = performance_profile(values, thresholds);
  REQUIRE(profile.size() == thresholds.size());
  CHECK(profile.front().second == 1.0);
  CHECK(profile.back().second < 0.01);
  for (std::size_t i = 0; i < profile.size(); ++i) {
    int at_least = 0;
    for (double v : values)
      if (v >= thresholds[i]) ++at_least;
    CHECK(profile[i].second == at_least / double(values.size()));
    if (i) CHECK(profile[i].second <= profile[i - 1].second);
  }
  const std::vector<double> outside{-100.0, 100.0};
  const auto ends = performance_profile(values, outside);
  CHECK(ends[0].second == 1.0);
  CHECK(ends[1].second == 0.0);
  const std::vector<double> unsorted{1.0, 0.0};
  CHECK_THROWS_AS(performance_profile(values, unsorted), std::invalid_argument);
}

TEST_CASE("mean with a normal-approximation interval") {
  const std::vector<double> v{1.0, 2.0, 3.0, 4.0, std::nan("")};
  const MeanInterval m = mean_with_sem_ci(v);
  CHECK(m.n == 4);
  CHECK(m.mean == 2.5);
  // sample sd = sqrt(5/3), sem = sd / 2
  CHECK(m.half_width == doctest::Approx(1.96 * std::sqrt(5.0 / 3.0) / 2.0).epsilon(1e-12));
  CHECK(std::isnan(mean_with_sem_ci(std::vector<double>{std::nan("")}).mean));
  CHECK(mean_with_sem_ci(std::vector<double>{3.0}).half_width == 0.0);
}
