#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "softprior/rng.hpp"

namespace softprior {

/// Evaluation returns against training progress. Steps strictly increasing.
struct EvalCurve {
  std::vector<double> steps;
  std::vector<double> values;
};

class UndefinedRatioError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Trapezoidal area under the curve divided by the covered step span.
/// A single-point curve has area equal to its value.
double normalized_area(const EvalCurve& curve);

/// (A_prior - A_baseline) / A_baseline on normalized areas. Both curves must
/// share the step grid. Throws UndefinedRatioError when |A_baseline| < 1e-12.
double area_ratio(const EvalCurve& prior, const EvalCurve& baseline);

/// Interquartile mean: mean over the middle half of the sorted sample, with
/// the two boundary order statistics weighted fractionally when n is not a
/// multiple of 4. Throws std::invalid_argument on an empty sample.
double iqm(std::span<const double> values);

double mean(std::span<const double> values);

/// Linear-interpolated quantile of an ascending sample (numpy's default rule).
double quantile_sorted(std::span<const double> sorted, double q);

struct Interval {
  double lower = 0.0;
  double upper = 0.0;
};

using Statistic = std::function<double(std::span<const double>)>;

/// Percentile bootstrap: each resample draws every stratum with replacement
/// at its own size, pools them, and evaluates `statistic`.
Interval stratified_bootstrap_ci(std::span<const std::vector<double>> strata, const Statistic& statistic,
                                 int n_resamples, double confidence, Rng& rng);

/// fraction(t) = |{v >= t}| / n for each threshold (ascending).
std::vector<std::pair<double, double>> performance_profile(std::span<const double> values,
                                                           std::span<const double> thresholds);

/// Normal-approximation interval: mean +- 1.96 standard errors (NaNs skipped).
struct MeanInterval {
  double mean = 0.0;
  double half_width = 0.0;
  std::size_t n = 0;
};
MeanInterval mean_with_sem_ci(std::span<const double> values);

}  // namespace softprior
