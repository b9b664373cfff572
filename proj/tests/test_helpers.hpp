//
// Copyright 2026 The shuffle-audit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//
// Shared test oracles, independent of the library implementation paths they
// check.
#ifndef SHUFFLEAUDIT_TESTS_TEST_HELPERS_HPP_
#define SHUFFLEAUDIT_TESTS_TEST_HELPERS_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

namespace testutil {

// 0.99 quantiles of the chi-square distribution (test at p > 0.01).
inline constexpr double kChi2Crit99Dof9 = 21.665994;
inline constexpr double kChi2Crit99Dof99 = 134.641617;
inline constexpr double kChi2Crit99Dof225 = 277.268909;
// Two-sample KS coefficient at alpha = 0.01: D_crit = c * sqrt((n+m)/(n*m)).
inline constexpr double kKsTwoSampleCoeff01 = 1.6276236307187293;

inline double chi_square_stat(std::span<const std::int64_t> observed,
                              std::span<const double> expected) {
  double stat = 0.0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    const double diff = static_cast<double>(observed[i]) - expected[i];
    stat += diff * diff / expected[i];
  }
  return stat;
}

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// One-sample KS distance against the standard normal CDF.
inline double ks_distance_normal(std::vector<double> samples) {
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = normal_cdf(samples[i]);
    d = std::max(d, std::abs(f - static_cast<double>(i) / n));
    d = std::max(d, std::abs(static_cast<double>(i + 1) / n - f));
  }
  return d;
}

// Two-sample KS distance; ties are drained from both samples before the
// CDF gap is measured, so discrete data is handled correctly.
inline double ks_distance_two_sample(std::vector<double> a,
                                     std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  double d = 0.0;
  std::size_t i = 0, j = 0;
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  while (i < a.size() || j < b.size()) {
    double v;
    if (i < a.size() && j < b.size()) {
      v = std::min(a[i], b[j]);
    } else {
      v = i < a.size() ? a[i] : b[j];
    }
    while (i < a.size() && a[i] == v) ++i;
    while (j < b.size() && b[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na -
                             static_cast<double>(j) / nb));
  }
  return d;
}

inline double ks_two_sample_crit01(std::size_t n, std::size_t m) {
  return kKsTwoSampleCoeff01 *
         std::sqrt(static_cast<double>(n + m) /
                   (static_cast<double>(n) * static_cast<double>(m)));
}

namespace detail {

inline long double beta_pdf_l(long double a, long double b, long double t,
                              long double log_beta) {
  if (t <= 0.0L || t >= 1.0L) return 0.0L;
  return expl((a - 1.0L) * logl(t) + (b - 1.0L) * log1pl(-t) - log_beta);
}

inline long double adaptive_simpson(long double a, long double b,
                                    long double alpha, long double beta,
                                    long double log_beta, long double fa,
                                    long double fm, long double fb,
                                    long double whole, long double tol,
                                    int depth) {
  const long double m = 0.5L * (a + b);
  const long double lm = 0.5L * (a + m);
  const long double rm = 0.5L * (m + b);
  const long double flm = beta_pdf_l(alpha, beta, lm, log_beta);
  const long double frm = beta_pdf_l(alpha, beta, rm, log_beta);
  const long double left = (m - a) / 6.0L * (fa + 4.0L * flm + fm);
  const long double right = (b - m) / 6.0L * (fm + 4.0L * frm + fb);
  if (depth <= 0 || fabsl(left + right - whole) < 15.0L * tol) {
    return left + right + (left + right - whole) / 15.0L;
  }
  return adaptive_simpson(a, m, alpha, beta, log_beta, fa, flm, fm, left,
                          0.5L * tol, depth - 1) +
         adaptive_simpson(m, b, alpha, beta, log_beta, fm, frm, fb, right,
                          0.5L * tol, depth - 1);
}

}  // namespace detail

// Independent regularized incomplete beta oracle: adaptive Simpson
// quadrature of the Beta(a, b) density in extended precision. No continued
// fractions anywhere on this path.
inline double incomplete_beta_quadrature(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const long double la = a, lb = b;
  const long double log_beta = lgammal(la) + lgammal(lb) - lgammal(la + lb);
  // Split at the mode to keep the integrand smooth per panel.
  long double mode = 0.5L;
  if (la + lb > 2.0L && la >= 1.0L && lb >= 1.0L) {
    mode = (la - 1.0L) / (la + lb - 2.0L);
  }
  std::vector<long double> cuts = {0.0L, static_cast<long double>(x)};
  if (mode > 0.0L && mode < x) cuts.insert(cuts.begin() + 1, mode);
  long double total = 0.0L;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const long double lo = cuts[i], hi = cuts[i + 1];
    const long double fa = detail::beta_pdf_l(la, lb, lo, log_beta);
    const long double fb = detail::beta_pdf_l(la, lb, hi, log_beta);
    const long double fm = detail::beta_pdf_l(la, lb, 0.5L * (lo + hi), log_beta);
    const long double whole = (hi - lo) / 6.0L * (fa + 4.0L * fm + fb);
    total += detail::adaptive_simpson(lo, hi, la, lb, log_beta, fa, fm, fb,
                                      whole, 1e-16L, 60);
  }
  if (total < 0.0L) total = 0.0L;
  if (total > 1.0L) total = 1.0L;
  return static_cast<double>(total);
}

// Analytic delta(eps) of the Gaussian mechanism with sensitivity 1.
inline double analytic_gaussian_delta(double sigma, double eps) {
  return normal_cdf(0.5 / sigma - eps * sigma) -
         std::exp(eps) * normal_cdf(-0.5 / sigma - eps * sigma);
}

// Inversion of the analytic curve: smallest eps with delta(eps) <= delta.
inline double analytic_gaussian_epsilon(double sigma, double delta) {
  double lo = 0.0, hi = 256.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (analytic_gaussian_delta(sigma, mid) > delta ? lo : hi) = mid;
  }
  return hi;
}

inline double mean_of(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

inline double variance_of(std::span<const double> v) {
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size() - 1);
}

}  // namespace testutil

#endif  // SHUFFLEAUDIT_TESTS_TEST_HELPERS_HPP_
