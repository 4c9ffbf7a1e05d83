#include "softprior/evalstats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace softprior {

double normalized_area(const EvalCurve& curve) {
  const auto& x = curve.steps;
  const auto& y = curve.values;
  if (x.empty() || x.size() != y.size()) throw std::invalid_argument("curve needs matching, non-empty steps and values");
  if (x.size() == 1) return y.front();
  double area = 0.0;
  for (std::size_t i = 1; i < x.size(); ++i) {
    if (!(x[i] > x[i - 1])) throw std::invalid_argument("curve steps must be strictly increasing");
    area += 0.5 * (y[i] + y[i - 1]) * (x[i] - x[i - 1]);
  }
  return area / (x.back() - x.front());
}

double area_ratio(const EvalCurve& prior, const EvalCurve& baseline) {
  if (prior.steps != baseline.steps) throw std::invalid_argument("area_ratio: curves use different step grids");
  const double base = normalized_area(baseline);
  if (std::abs(base) < 1e-12) throw UndefinedRatioError("area_ratio: baseline area is zero");
  return (normalized_area(prior) - base) / base;
}

double iqm(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("iqm of an empty sample");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  const double lo = 0.25 * n;
  const double hi = 0.75 * n;
  double total = 0.0;
  // Order statistic i covers [i, i+1); keep its overlap with [n/4, 3n/4].
  const auto first = static_cast<std::size_t>(std::floor(lo));
  const auto last = std::min(sorted.size(), static_cast<std::size_t>(std::ceil(hi)));
  for (std::size_t i = first; i < last; ++i) {
    const double w = std::min(static_cast<double>(i + 1), hi) - std::max(static_cast<double>(i), lo);
    if (w > 0.0) total += w * sorted[i];
  }
  return total / (hi - lo);
}

double mean(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("mean of an empty sample");
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

double quantile_sorted(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw std::invalid_argument("quantile of an empty sample");
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto i = static_cast<std::size_t>(std::floor(pos));
  if (i + 1 >= sorted.size()) return sorted.back();
  const double frac = pos - static_cast<double>(i);
  return sorted[i] + frac * (sorted[i + 1] - sorted[i]);
}

Interval stratified_bootstrap_ci(std::span<const std::vector<double>> strata, const Statistic& statistic,
                                 int n_resamples, double confidence, Rng& rng) {
  if (strata.empty()) throw std::invalid_argument("bootstrap needs at least one stratum");
  std::size_t total = 0;
  for (const auto& s : strata) {
    if (s.empty()) throw std::invalid_argument("bootstrap strata must be non-empty");
    total += s.size();
  }
  if (n_resamples < 1) throw std::invalid_argument("bootstrap needs at least one resample");
  if (!(confidence > 0.0 && confidence < 1.0)) throw std::invalid_argument("confidence must lie in (0, 1)");

  std::vector<double> stats(static_cast<std::size_t>(n_resamples));
  std::vector<double> pooled(total);
  for (double& stat : stats) {
    std::size_t k = 0;
    for (const auto& s : strata)
      for (std::size_t j = 0; j < s.size(); ++j)
        pooled[k++] = s[rng.uniform_int(static_cast<std::uint32_t>(s.size()))];
    stat = statistic(pooled);
  }
  std::sort(stats.begin(), stats.end());
  const double alpha = 1.0 - confidence;
  return {quantile_sorted(stats, alpha / 2.0), quantile_sorted(stats, 1.0 - alpha / 2.0)};
}

std::vector<std::pair<double, double>> performance_profile(std::span<const double> values,
                                                           std::span<const double> thresholds) {
  if (!std::is_sorted(thresholds.begin(), thresholds.end()))
    throw std::invalid_argument("profile thresholds must be ascending");
  if (values.empty()) throw std::invalid_argument("profile of an empty sample");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<std::pair<double, double>> out;
  out.reserve(thresholds.size());
  const double n = static_cast<double>(sorted.size());
  for (double t : thresholds) {
    const auto below = std::lower_bound(sorted.begin(), sorted.end(), t) - sorted.begin();
    out.emplace_back(t, (n - static_cast<double>(below)) / n);
  }
  return out;
}

MeanInterval mean_with_sem_ci(std::span<const double> values) {
  MeanInterval out;
  double sum = 0.0;
  for (double v : values)
    if (!std::isnan(v)) {
      sum += v;
      ++out.n;
    }
  if (out.n == 0) {
    out.mean = out.half_width = std::numeric_limits<double>::quiet_NaN();
    return out;
  }
  out.mean = sum / static_cast<double>(out.n);
  if (out.n < 2) return out;
  double ss = 0.0;
  for (double v : values)
    if (!std::isnan(v)) ss += (v - out.mean) * (v - out.mean);
  const double sd = std::sqrt(ss / static_cast<double>(out.n - 1));
  out.half_width = 1.96 * sd / std::sqrt(static_cast<double>(out.n));
  return out;
}

}  // namespace softprior
