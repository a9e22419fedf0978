#pragma once

// Small statistics toolkit: Kolmogorov-Smirnov tests, binomial intervals,
// sample moments, correlation and least squares.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace tscp::stats {

double normal_cdf(double x);
double normal_quantile(double p);

/// P(K > x) for the limiting Kolmogorov distribution.
double kolmogorov_survival(double x);

/// P(D_n < d) for the one-sample statistic with a continuous null
/// (Marsaglia, Tsang and Wang). Practical for n up to a few hundred.
double ks_exact_cdf(std::size_t n, double d);

/// Below this sample size p-values come from the exact distribution.
inline constexpr std::size_t kKsExactBelow = 35;

/// p-value of a one-sample statistic: exact for n < 35, asymptotic
/// (with Stephens' finite-n scaling) otherwise.
double ks_pvalue(std::size_t n, double d);

/// Smallest d with ks_pvalue(n, d) <= level.
double ks_critical_value(std::size_t n, double level);

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
  std::size_t n = 0;
  bool rejects(double level) const { return p_value < level; }
};

KsResult ks_one_sample(std::vector<double> samples, const std::function<double(double)>& cdf);

/// Two-sample test; the p-value uses the asymptotic law at the effective
/// size n1*n2/(n1+n2). Ties across samples are handled by stepping over
/// equal values together.
KsResult ks_two_sample(std::vector<double> a, std::vector<double> b);

struct Moments {
  std::size_t n = 0;
  double mean = 0.0;
  double variance = 0.0;  // unbiased
  double std_error() const;
};

Moments moments(std::span<const double> x);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  bool contains(double v) const { return lo <= v && v <= hi; }
  bool overlaps(const Interval& o) const { return lo <= o.hi && o.lo <= hi; }
};

/// Wilson score interval with two-sided coverage 1 - level.
Interval wilson_interval(std::int64_t successes, std::int64_t trials, double level);

double correlation(std::span<const double> x, std::span<const double> y);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

LinearFit least_squares(std::span<const double> x, std::span<const double> y);

}  // namespace tscp::stats
