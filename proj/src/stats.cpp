#include "tscp/stats.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/distributions/normal.hpp>

#include "tscp/errors.hpp"

namespace tscp::stats {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw InputError("normal quantile needs p in (0,1)");
  return boost::math::quantile(boost::math::normal_distribution<double>(), p);
}

double kolmogorov_survival(double x) {
  if (x <= 0.0) return 1.0;
  if (x < 0.2) {
    // Alternating series converges slowly here; the complement form is exact
    // enough and the value is 1 to double precision anyway.
    const double c = std::sqrt(2.0 * M_PI) / x;
    double s = 0.0;
    for (int k = 1; k <= 20; ++k) {
      const double a = (2.0 * k - 1.0) * M_PI / x;
      s += std::exp(-a * a / 8.0);
    }
    return std::clamp(1.0 - c * s, 0.0, 1.0);
  }
  double sum = 0.0;
  double sign = 1.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * x * x);
    sum += sign * term;
    if (term < 1e-17) break;
    sign = -sign;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

namespace {

using Matrix = std::vector<double>;

Matrix multiply(const Matrix& a, const Matrix& b, std::size_t m) {
  Matrix c(m * m, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t k = 0; k < m; ++k) {
      const double aik = a[i * m + k];
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < m; ++j) c[i * m + j] += aik * b[k * m + j];
    }
  }
  return c;
}

// Returns the power together with a base-10 exponent that was factored out
// to keep entries in range.
std::pair<Matrix, int> power(const Matrix& h, std::size_t m, std::size_t n) {
  if (n == 1) return {h, 0};
  auto [half, e] = power(h, m, n / 2);
  Matrix out = multiply(half, half, m);
  int exponent = 2 * e;
  if (n % 2 == 1) out = multiply(h, out, m);
  if (out[(m / 2) * m + m / 2] > 1e140) {
    for (double& v : out) v *= 1e-140;
    exponent += 140;
  }
  return {out, exponent};
}

}  // namespace

double ks_exact_cdf(std::size_t n, double d) {
  if (n == 0) throw InputError("KS distribution needs n >= 1");
  const double nd = static_cast<double>(n) * d;
  if (d <= 0.5 / static_cast<double>(n)) return 0.0;
  if (d >= 1.0) return 1.0;
  const auto k = static_cast<std::size_t>(nd) + 1;
  const std::size_t m = 2 * k - 1;
  const double h = static_cast<double>(k) - nd;
  Matrix mat(m * m, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      mat[i * m + j] = (i + 1 >= j) ? 1.0 : 0.0;
    }
  }
  for (std::size_t i = 0; i < m; ++i) {
    mat[i * m] -= std::pow(h, static_cast<double>(i + 1));
    mat[(m - 1) * m + i] -= std::pow(h, static_cast<double>(m - i));
  }
  if (2.0 * h - 1.0 > 0.0) mat[(m - 1) * m] += std::pow(2.0 * h - 1.0, static_cast<double>(m));
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      if (i + 1 > j) {
        for (std::size_t g = 1; g <= i + 1 - j; ++g) mat[i * m + j] /= static_cast<double>(g);
      }
    }
  }
  auto [q, exponent] = power(mat, m, n);
  double s = q[(k - 1) * m + (k - 1)];
  for (std::size_t i = 1; i <= n; ++i) {
    s = s * static_cast<double>(i) / static_cast<double>(n);
    if (s < 1e-140) {
      s *= 1e140;
      exponent -= 140;
    }
  }
  return std::clamp(s * std::pow(10.0, exponent), 0.0, 1.0);
}

double ks_pvalue(std::size_t n, double d) {
  if (n == 0) throw InputError("KS p-value needs n >= 1");
  if (n < kKsExactBelow) return std::clamp(1.0 - ks_exact_cdf(n, d), 0.0, 1.0);
  const double rn = std::sqrt(static_cast<double>(n));
  return kolmogorov_survival((rn + 0.12 + 0.11 / rn) * d);
}

double ks_critical_value(std::size_t n, double level) {
  if (!(level > 0.0 && level < 1.0)) throw InputError("level must be in (0,1)");
  double lo = 0.0;
  double hi = 1.0;
  for (int it = 0; it < 80; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (ks_pvalue(n, mid) <= level) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

KsResult ks_one_sample(std::vector<double> samples, const std::function<double(double)>& cdf) {
  if (samples.empty()) throw InsufficientData("KS test on an empty sample");
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = cdf(samples[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return {d, ks_pvalue(samples.size(), d), samples.size()};
}

KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw InsufficientData("two-sample KS test needs both samples");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == v) ++i;
    while (j < b.size() && b[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  const double ne = na * nb / (na + nb);
  const double rn = std::sqrt(ne);
  KsResult r;
  r.statistic = d;
  r.n = static_cast<std::size_t>(std::lround(ne));
  r.p_value = kolmogorov_survival((rn + 0.12 + 0.11 / rn) * d);
  return r;
}

double Moments::std_error() const {
  return n > 1 ? std::sqrt(variance / static_cast<double>(n)) : 0.0;
}

Moments moments(std::span<const double> x) {
  Moments m;
  m.n = x.size();
  if (x.empty()) return m;
  double sum = 0.0;
  for (double v : x) sum += v;
  m.mean = sum / static_cast<double>(x.size());
  if (x.size() > 1) {
    double ss = 0.0;
    for (double v : x) ss += (v - m.mean) * (v - m.mean);
    m.variance = ss / static_cast<double>(x.size() - 1);
  }
  return m;
}

Interval wilson_interval(std::int64_t successes, std::int64_t trials, double level) {
  if (trials <= 0) throw InsufficientData("binomial interval with no trials");
  if (successes < 0 || successes > trials) throw InputError("successes outside [0, trials]");
  const double z = normal_quantile(1.0 - level / 2.0);
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double denom = 1.0 + z * z / n;
  const double centre = (p + z * z / (2.0 * n)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / n + z * z / (4.0 * n * n)) / denom;
  return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

double correlation(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw InsufficientData("correlation needs paired samples");
  const Moments mx = moments(x);
  const Moments my = moments(y);
  double sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) sxy += (x[i] - mx.mean) * (y[i] - my.mean);
  sxy /= static_cast<double>(x.size() - 1);
  if (mx.variance == 0.0 || my.variance == 0.0) return 0.0;
  return sxy / std::sqrt(mx.variance * my.variance);
}

LinearFit least_squares(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw InsufficientData("least squares needs two points");
  const Moments mx = moments(x);
  const Moments my = moments(y);
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx.mean) * (y[i] - my.mean);
    sxx += (x[i] - mx.mean) * (x[i] - mx.mean);
    syy += (y[i] - my.mean) * (y[i] - my.mean);
  }
  if (sxx == 0.0) throw InputError("least squares with constant abscissae");
  LinearFit f;
  f.slope = sxy / sxx;
  f.intercept = my.mean - f.slope * mx.mean;
  f.r2 = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
  return f;
}

}  // namespace tscp::stats
