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
#include "shuffleaudit/accountant.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <mutex>
#include <optional>
#include <sstream>
#include <stdexcept>

namespace shuffleaudit {

namespace {

constexpr double kSigmaBracketLo = 1e-2;
constexpr double kSigmaBracketHi = 1e2;

double norm_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }
double norm_sf(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

// Extended-precision hockey stick for the grid construction: the second
// differences taken at grid_step resolution would otherwise drown the far
// tails (true bucket masses ~1e-15) in double round-off, and that noise
// compounds linearly under composition.
long double norm_cdf_l(long double x) {
  return 0.5L * erfcl(-x / sqrtl(2.0L));
}
long double norm_sf_l(long double x) { return 0.5L * erfcl(x / sqrtl(2.0L)); }

long double hockey_delta_l(long double sigma, long double q, Adjacency dir,
                           long double epsilon) {
  const long double s2 = sigma * sigma;
  if (dir == Adjacency::Remove) {
    const long double e = expl(epsilon);
    if (e <= 1.0L - q) return 1.0L - e;
    const long double x_star = s2 * logl((e - (1.0L - q)) / q) + 0.5L;
    const long double q_tail = norm_sf_l(x_star / sigma);
    const long double p_tail =
        (1.0L - q) * q_tail + q * norm_sf_l((x_star - 1.0L) / sigma);
    const long double d = p_tail - e * q_tail;
    return d > 0.0L ? d : 0.0L;
  }
  const long double e_neg = expl(-epsilon);
  if (e_neg <= 1.0L - q) return 0.0L;
  const long double x_star = s2 * logl((e_neg - (1.0L - q)) / q) + 0.5L;
  const long double p_head = norm_cdf_l(x_star / sigma);
  const long double q_head =
      (1.0L - q) * p_head + q * norm_cdf_l((x_star - 1.0L) / sigma);
  const long double d = p_head - expl(epsilon) * q_head;
  return d > 0.0L ? d : 0.0L;
}

// FFTW planning is not thread-safe; execution on private buffers is.
std::mutex& fftw_plan_mutex() {
  static std::mutex m;
  return m;
}

// Linear convolution of a and b into out (size na + nb - 1).
void fft_convolve(const double* a, std::size_t na, const double* b,
                  std::size_t nb, std::vector<double>& out) {
  const std::size_t n_out = na + nb - 1;
  std::size_t n_fft = 1;
  while (n_fft < n_out) n_fft <<= 1;

  double* buf_a = fftw_alloc_real(n_fft);
  double* buf_b = fftw_alloc_real(n_fft);
  auto* spec_a = fftw_alloc_complex(n_fft / 2 + 1);
  auto* spec_b = fftw_alloc_complex(n_fft / 2 + 1);

  std::fill(buf_a, buf_a + n_fft, 0.0);
  std::fill(buf_b, buf_b + n_fft, 0.0);
  std::copy(a, a + na, buf_a);
  std::copy(b, b + nb, buf_b);

  fftw_plan fwd_a, fwd_b, inv;
  {
    std::lock_guard<std::mutex> lock(fftw_plan_mutex());
    fwd_a = fftw_plan_dft_r2c_1d(static_cast<int>(n_fft), buf_a, spec_a,
                                 FFTW_ESTIMATE);
    fwd_b = fftw_plan_dft_r2c_1d(static_cast<int>(n_fft), buf_b, spec_b,
                                 FFTW_ESTIMATE);
    inv = fftw_plan_dft_c2r_1d(static_cast<int>(n_fft), spec_a, buf_a,
                               FFTW_ESTIMATE);
  }
  fftw_execute(fwd_a);
  fftw_execute(fwd_b);
  const double scale = 1.0 / static_cast<double>(n_fft);
  for (std::size_t i = 0; i < n_fft / 2 + 1; ++i) {
    const double re = spec_a[i][0] * spec_b[i][0] - spec_a[i][1] * spec_b[i][1];
    const double im = spec_a[i][0] * spec_b[i][1] + spec_a[i][1] * spec_b[i][0];
    spec_a[i][0] = re * scale;
    spec_a[i][1] = im * scale;
  }
  fftw_execute(inv);

  out.assign(buf_a, buf_a + n_out);
  {
    std::lock_guard<std::mutex> lock(fftw_plan_mutex());
    fftw_destroy_plan(fwd_a);
    fftw_destroy_plan(fwd_b);
    fftw_destroy_plan(inv);
  }
  fftw_free(buf_a);
  fftw_free(buf_b);
  fftw_free(spec_a);
  fftw_free(spec_b);
}

// Smallest i in [1, cap] with pred(i) true, assuming pred flips from false
// to true once; returns cap when never true.
template <class Pred>
std::int64_t smallest_true(std::int64_t cap, Pred pred) {
  std::int64_t hi = 1;
  while (hi < cap && !pred(hi)) hi *= 2;
  hi = std::min(hi, cap);
  if (!pred(hi)) return cap;
  std::int64_t lo = hi / 2 + 1;
  while (lo < hi) {
    const std::int64_t mid = lo + (hi - lo) / 2;
    if (pred(mid)) {
      hi = mid;
    } else {
      lo = mid + 1;
    }
  }
  return hi;
}

// Removes round-off negatives by carrying them downward: a deferred
// negative correction applied at a lower loss subtracts no more than it
// should, so the cleaned vector only ever over-states delta. Leftover carry
// at the bottom is dropped (again pessimistic: it leaves extra mass).
void absorb_negatives_downward(double* mass, std::size_t n) {
  double carry = 0.0;
  for (std::size_t i = n; i-- > 0;) {
    const double v = mass[i] + carry;
    if (v >= 0.0) {
      mass[i] = v;
      carry = 0.0;
    } else {
      mass[i] = 0.0;
      carry = v;
    }
  }
}

// Folds out-of-cap and sub-trim tails of a freshly convolved mass vector.
// Upper folds go to the infinity atom (still counted in delta); lower folds
// are discarded and tracked so epsilon_for_delta can budget for them.
void fold_and_trim(std::vector<double>& mass, std::int64_t& lo,
                   double& inf_mass, double& trunc_mass,
                   std::int64_t cap_index, double trim_tail) {
  absorb_negatives_downward(mass.data(), mass.size());

  const auto collapse = [&](bool to_inf) {
    double total = 0.0;
    for (double m : mass) total += m;
    (to_inf ? inf_mass : trunc_mass) += total;
    mass.assign(1, 0.0);
    lo = 0;
  };
  std::int64_t hi = lo + static_cast<std::int64_t>(mass.size()) - 1;
  if (lo > cap_index) {  // everything above the grid
    collapse(/*to_inf=*/true);
    return;
  }
  if (hi < -cap_index) {  // everything below the grid
    collapse(/*to_inf=*/false);
    return;
  }
  if (hi > cap_index) {
    const std::size_t keep = static_cast<std::size_t>(cap_index - lo + 1);
    double folded = 0.0;
    for (std::size_t i = keep; i < mass.size(); ++i) folded += mass[i];
    inf_mass += folded;
    mass.resize(keep);
  }
  if (lo < -cap_index) {
    const std::size_t cut = static_cast<std::size_t>(-cap_index - lo);
    double dropped = 0.0;
    for (std::size_t i = 0; i < cut && i < mass.size(); ++i) dropped += mass[i];
    trunc_mass += dropped;
    mass.erase(mass.begin(),
               mass.begin() + std::min(cut, mass.size()));
    lo = -cap_index;
  }

  // Trim negligible tails to keep convolutions near the mass concentration.
  double acc = 0.0;
  std::size_t front = 0;
  while (front < mass.size() && acc + mass[front] <= trim_tail) {
    acc += mass[front];
    ++front;
  }
  if (front > 0) {
    trunc_mass += acc;
    mass.erase(mass.begin(), mass.begin() + front);
    lo += static_cast<std::int64_t>(front);
  }
  acc = 0.0;
  std::size_t back = 0;
  while (back < mass.size() && acc + mass[mass.size() - 1 - back] <= trim_tail) {
    acc += mass[mass.size() - 1 - back];
    ++back;
  }
  if (back > 0) {
    inf_mass += acc;
    mass.resize(mass.size() - back);
  }
  if (mass.empty()) {
    mass.assign(1, 0.0);
    lo = 0;
  }
}

PrivacyLossDistribution multiply(const PrivacyLossDistribution& a,
                                 const PrivacyLossDistribution& b,
                                 const PldOptions& opt) {
  PrivacyLossDistribution out;
  out.grid_step = a.grid_step;
  out.lo_index = a.lo_index + b.lo_index;
  fft_convolve(a.mass.data(), a.mass.size(), b.mass.data(), b.mass.size(),
               out.mass);
  out.inf_mass = a.inf_mass + b.inf_mass - a.inf_mass * b.inf_mass;
  out.truncation_mass = a.truncation_mass + b.truncation_mass;
  const auto cap =
      static_cast<std::int64_t>(std::floor(opt.support_extent / opt.grid_step));
  fold_and_trim(out.mass, out.lo_index, out.inf_mass, out.truncation_mass, cap,
                opt.trim_tail);
  return out;
}

}  // namespace

void PoissonAccountantParams::validate() const {
  if (!(noise_multiplier > 0.0) || !std::isfinite(noise_multiplier)) {
    throw std::invalid_argument("noise_multiplier must be > 0");
  }
  if (!(sampling_rate > 0.0 && sampling_rate <= 1.0)) {
    throw std::invalid_argument("sampling_rate q must lie in (0, 1]");
  }
  if (total_steps < 1) throw std::invalid_argument("total_steps must be >= 1");
  if (!(delta > 0.0 && delta < 1.0)) {
    throw std::invalid_argument("delta must lie in (0, 1)");
  }
}

double subsampled_gaussian_delta(double sigma, double q, Adjacency dir,
                                 double epsilon) {
  const double s2 = sigma * sigma;
  if (dir == Adjacency::Remove) {
    const double e = std::exp(epsilon);
    if (e <= 1.0 - q) return 1.0 - e;
    // Likelihood ratio (1-q) + q exp((2x-1)/(2s^2)) crosses e^eps at x_star.
    const double x_star = s2 * std::log((e - (1.0 - q)) / q) + 0.5;
    const double q_tail = norm_sf(x_star / sigma);
    const double p_tail = (1.0 - q) * q_tail + q * norm_sf((x_star - 1.0) / sigma);
    return std::max(0.0, p_tail - e * q_tail);
  }
  // Insert: ratio is 1 / ((1-q) + q exp(...)), bounded above by 1/(1-q).
  const double e_neg = std::exp(-epsilon);
  if (e_neg <= 1.0 - q) return 0.0;
  const double x_star = s2 * std::log((e_neg - (1.0 - q)) / q) + 0.5;
  const double p_head = norm_cdf(x_star / sigma);
  const double q_head =
      (1.0 - q) * p_head + q * norm_cdf((x_star - 1.0) / sigma);
  return std::max(0.0, p_head - std::exp(epsilon) * q_head);
}

double PrivacyLossDistribution::total_mass() const {
  double sum = inf_mass;
  for (double m : mass) sum += m;
  return sum;
}

double PrivacyLossDistribution::delta_at_epsilon(double epsilon) const {
  double sum = inf_mass;
  for (std::size_t i = 0; i < mass.size(); ++i) {
    const double loss = (lo_index + static_cast<std::int64_t>(i)) * grid_step;
    if (loss > epsilon) {
      sum += mass[i] * (1.0 - std::exp(epsilon - loss));
    }
  }
  return sum;
}

double PrivacyLossDistribution::epsilon_for_delta(double delta) const {
  const std::int64_t n = static_cast<std::int64_t>(mass.size());
  const std::int64_t hi = lo_index + n - 1;
  const std::int64_t start = std::max<std::int64_t>(lo_index, 0);
  if (start > hi) {
    if (inf_mass + truncation_mass <= delta) return 0.0;
    throw std::runtime_error("epsilon_for_delta: no grid support at eps >= 0");
  }
  // Suffix sums over losses strictly above the query point. Only suffixes at
  // non-negative losses are evaluated, so exp(-loss) stays <= 1.
  std::vector<double> suffix_mass(static_cast<std::size_t>(hi - start + 2), 0.0);
  std::vector<double> suffix_weighted(suffix_mass.size(), 0.0);
  for (std::int64_t i = hi; i >= start; --i) {
    const std::size_t j = static_cast<std::size_t>(i - start);
    const double loss = i * grid_step;
    suffix_mass[j] = suffix_mass[j + 1] + mass[static_cast<std::size_t>(i - lo_index)];
    suffix_weighted[j] =
        suffix_weighted[j + 1] +
        mass[static_cast<std::size_t>(i - lo_index)] * std::exp(-loss);
  }
  for (std::int64_t i = start; i <= hi; ++i) {
    const std::size_t j = static_cast<std::size_t>(i - start);
    const double eps = i * grid_step;
    const double d =
        suffix_mass[j + 1] - std::exp(eps) * suffix_weighted[j + 1] + inf_mass;
    if (d + truncation_mass <= delta) return eps;
  }
  std::ostringstream msg;
  msg << "epsilon_for_delta: delta=" << delta
      << " unreachable within grid extent [" << lo_index * grid_step << ", "
      << hi * grid_step << "]; delta at grid top = "
      << inf_mass + truncation_mass << " (inf_mass=" << inf_mass
      << ", truncation_mass=" << truncation_mass << ")";
  throw std::runtime_error(msg.str());
}

PrivacyLossDistribution pld_single_step(double sigma, double q, Adjacency dir,
                                        const PldOptions& opt) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw std::invalid_argument("pld_single_step: sigma must be > 0");
  }
  if (!(q > 0.0 && q <= 1.0)) {
    throw std::invalid_argument("pld_single_step: q must lie in (0, 1]");
  }
  const double step = opt.grid_step;
  const auto cap =
      static_cast<std::int64_t>(std::floor(opt.support_extent / step));
  const bool degenerate_q1 = q >= 1.0 - 1e-12;

  std::int64_t lo = 0;
  std::int64_t hi = 0;
  if (degenerate_q1) {
    // Pure Gaussian mechanism: the loss is N(mu, 2*mu) with mu = 1/(2s^2)
    // in both directions.
    const double mu = 1.0 / (2.0 * sigma * sigma);
    lo = static_cast<std::int64_t>(
             std::floor((mu - 12.0 * std::sqrt(2.0 * mu)) / step)) - 2;
    hi = smallest_true(cap, [&](std::int64_t i) {
      return subsampled_gaussian_delta(sigma, q, dir, i * step) <=
             opt.tail_fold;
    });
  } else if (dir == Adjacency::Remove) {
    // Loss support starts at log(1-q); above, find where delta fades out.
    lo = static_cast<std::int64_t>(std::floor(std::log1p(-q) / step)) - 2;
    hi = smallest_true(cap, [&](std::int64_t i) {
      return subsampled_gaussian_delta(sigma, q, dir, i * step) <=
             opt.tail_fold;
    });
  } else {
    // Loss support ends at -log(1-q); find where the lower tail fades out.
    hi = static_cast<std::int64_t>(std::ceil(-std::log1p(-q) / step)) + 2;
    hi = std::min(hi, cap);
    const double s2 = sigma * sigma;
    const auto low_mass = [&](double loss) {
      const double x_lo = 0.5 + s2 * std::log((std::exp(-loss) - (1.0 - q)) / q);
      return norm_sf(x_lo / sigma);
    };
    lo = -smallest_true(cap, [&](std::int64_t i) {
      return low_mass(-static_cast<double>(i) * step) <= opt.tail_fold;
    });
  }
  lo = std::max(lo, -cap);
  lo = std::min(lo, static_cast<std::int64_t>(-1));
  hi = std::max(hi, lo + 2);
  hi = std::min(hi, cap);

  const std::size_t n = static_cast<std::size_t>(hi - lo + 1);
  std::vector<long double> hockey(n);
  for (std::size_t i = 0; i < n; ++i) {
    hockey[i] = hockey_delta_l(
        sigma, q, dir,
        static_cast<long double>(lo + static_cast<std::int64_t>(i)) * step);
  }

  // Chord construction: choose masses so the discrete delta curve passes
  // through the exact curve at every grid point. Between points the discrete
  // curve is the chord, which lies above the convex exact curve.
  PrivacyLossDistribution pld;
  pld.grid_step = step;
  pld.lo_index = lo;
  pld.mass.assign(n, 0.0);
  pld.inf_mass = static_cast<double>(hockey[n - 1]);
  const long double step_l = step;
  const long double denom = -expm1l(-step_l);  // 1 - exp(-step)
  const long double decay = expl(-step_l);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    pld.mass[i] = static_cast<double>(
        (hockey[i - 1] - (1.0L + decay) * hockey[i] + decay * hockey[i + 1]) /
        denom);
  }
  pld.mass[n - 1] =
      static_cast<double>((hockey[n - 2] - hockey[n - 1]) / denom);
  // The second differences sit on the round-off floor in the far tails;
  // absorb the noise without inflating the total (clamping would bias the
  // mass upward by an amount that compounds under composition).
  absorb_negatives_downward(pld.mass.data() + 1, n - 1);
  double assigned = pld.inf_mass;
  for (std::size_t i = 1; i < n; ++i) assigned += pld.mass[i];
  const double remainder = 1.0 - assigned;
  if (remainder >= 0.0) {
    pld.mass[0] = remainder;
  } else {
    pld.mass[0] = 0.0;
    pld.truncation_mass += -remainder;
  }
  return pld;
}

PrivacyLossDistribution compose(const PrivacyLossDistribution& pld,
                                std::int64_t k, const PldOptions& opt) {
  if (k < 1) throw std::invalid_argument("compose: k must be >= 1");
  if (k == 1) return pld;
  std::optional<PrivacyLossDistribution> result;
  PrivacyLossDistribution base = pld;
  std::int64_t remaining = k;
  while (remaining > 0) {
    if (remaining & 1) {
      result = result ? multiply(*result, base, opt) : base;
    }
    remaining >>= 1;
    if (remaining > 0) base = multiply(base, base, opt);
  }
  return *result;
}

double epsilon_at_delta(const PoissonAccountantParams& params,
                        const PldOptions& opt) {
  return epsilon_report(params, opt).epsilon;
}

AccountantReport epsilon_report(const PoissonAccountantParams& params,
                                const PldOptions& opt) {
  params.validate();
  AccountantReport report;
  for (Adjacency dir : {Adjacency::Remove, Adjacency::Insert}) {
    PrivacyLossDistribution pld =
        pld_single_step(params.noise_multiplier, params.sampling_rate, dir, opt);
    pld = compose(pld, params.total_steps, opt);
    const double eps = pld.epsilon_for_delta(params.delta);
    if (eps >= report.epsilon) {
      report.epsilon = eps;
      report.truncation_mass = pld.truncation_mass;
      report.inf_mass = pld.inf_mass;
      report.grid_points = static_cast<std::int64_t>(pld.mass.size());
    }
  }
  return report;
}

std::vector<double> default_rdp_orders() {
  std::vector<double> orders;
  for (double a = 1.25; a < 2.0; a += 0.25) orders.push_back(a);
  for (double a = 2.0; a <= 64.0; a += 1.0) orders.push_back(a);
  for (double a : {80.0, 96.0, 128.0, 192.0, 256.0, 512.0}) orders.push_back(a);
  return orders;
}

namespace {

double log_choose(std::int64_t n, std::int64_t k) {
  return std::lgamma(static_cast<double>(n + 1)) -
         std::lgamma(static_cast<double>(k + 1)) -
         std::lgamma(static_cast<double>(n - k + 1));
}

// Per-step Renyi divergence of the sub-sampled Gaussian at integer order.
double rdp_subsampled_step(double sigma, double q, std::int64_t alpha) {
  const double s2 = sigma * sigma;
  std::vector<double> terms(static_cast<std::size_t>(alpha + 1));
  for (std::int64_t j = 0; j <= alpha; ++j) {
    terms[static_cast<std::size_t>(j)] =
        log_choose(alpha, j) + j * std::log(q) +
        (alpha - j) * std::log1p(-q) +
        static_cast<double>(j) * static_cast<double>(j - 1) / (2.0 * s2);
  }
  const double m = *std::max_element(terms.begin(), terms.end());
  double sum = 0.0;
  for (double t : terms) sum += std::exp(t - m);
  return (m + std::log(sum)) / static_cast<double>(alpha - 1);
}

}  // namespace

double rdp_epsilon(const PoissonAccountantParams& params,
                   std::span<const double> orders) {
  params.validate();
  if (orders.empty()) {
    throw std::invalid_argument("rdp_epsilon: order list must be non-empty");
  }
  for (double a : orders) {
    if (!(a > 1.0)) {
      throw std::invalid_argument("rdp_epsilon: all orders must exceed 1");
    }
  }
  const double q = params.sampling_rate;
  const double sigma = params.noise_multiplier;
  const auto steps = static_cast<double>(params.total_steps);
  double best = std::numeric_limits<double>::infinity();
  for (double requested : orders) {
    double order;
    double rdp;
    if (q >= 1.0 - 1e-12) {
      order = requested;
      rdp = steps * requested / (2.0 * sigma * sigma);
    } else {
      // The closed form is exact only at integer orders; rounding the order
      // up keeps the bound valid since Renyi divergence grows with order.
      const auto alpha =
          std::max<std::int64_t>(2, static_cast<std::int64_t>(std::ceil(requested)));
      order = static_cast<double>(alpha);
      rdp = steps * rdp_subsampled_step(sigma, q, alpha);
    }
    const double eps = rdp + std::log((order - 1.0) / order) -
                       (std::log(params.delta) + std::log(order)) / (order - 1.0);
    best = std::min(best, eps);
  }
  return std::max(0.0, best);
}

double calibrate_sigma(double eps_target, double q, std::int64_t total_steps,
                       double delta, double tol, const PldOptions& opt) {
  if (!(eps_target > 0.0)) {
    throw std::invalid_argument("calibrate_sigma: eps_target must be > 0");
  }
  const auto eps_at = [&](double sigma) {
    return epsilon_at_delta({sigma, q, total_steps, delta}, opt);
  };
  const auto orders = default_rdp_orders();
  const auto rdp_at = [&](double sigma) {
    return rdp_epsilon({sigma, q, total_steps, delta}, orders);
  };

  // RDP is cheap and close enough to seed a narrow bracket for the PLD
  // bisection; fall back to the full range when the seed misses.
  double rdp_lo = kSigmaBracketLo, rdp_hi = kSigmaBracketHi;
  for (int i = 0; i < 40 && rdp_hi - rdp_lo > 1e-4 * rdp_lo; ++i) {
    const double mid = std::sqrt(rdp_lo * rdp_hi);
    (rdp_at(mid) > eps_target ? rdp_lo : rdp_hi) = mid;
  }
  double lo = std::max(kSigmaBracketLo, rdp_lo / 1.6);
  double hi = std::min(kSigmaBracketHi, rdp_hi * 1.6);
  while (eps_at(lo) < eps_target && lo > kSigmaBracketLo) {
    lo = std::max(kSigmaBracketLo, lo / 2.0);
  }
  while (eps_at(hi) > eps_target && hi < kSigmaBracketHi) {
    hi = std::min(kSigmaBracketHi, hi * 2.0);
  }
  if (eps_at(lo) < eps_target || eps_at(hi) > eps_target) {
    std::ostringstream msg;
    msg << "calibrate_sigma: eps_target=" << eps_target
        << " unreachable for sigma in [" << kSigmaBracketLo << ", "
        << kSigmaBracketHi << "] (eps range [" << eps_at(kSigmaBracketHi)
        << ", " << eps_at(kSigmaBracketLo) << "])";
    throw std::runtime_error(msg.str());
  }

  double sigma = 0.5 * (lo + hi);
  for (int i = 0; i < 80; ++i) {
    sigma = 0.5 * (lo + hi);
    const double eps = eps_at(sigma);
    if (std::abs(eps - eps_target) <= tol) return sigma;
    (eps > eps_target ? lo : hi) = sigma;
    if (hi - lo < 1e-9 * sigma) break;
  }
  const double eps = eps_at(sigma);
  if (std::abs(eps - eps_target) <= 10.0 * tol) return sigma;
  std::ostringstream msg;
  msg << "calibrate_sigma: bisection exhausted at sigma=" << sigma
      << " with eps=" << eps << " (target " << eps_target << ")";
  throw std::runtime_error(msg.str());
}

double tradeoff_epsdelta(double eps, double delta, double alpha) {
  if (!(eps >= 0.0)) throw std::invalid_argument("tradeoff: eps must be >= 0");
  if (!(delta >= 0.0 && delta < 1.0)) {
    throw std::invalid_argument("tradeoff: delta must lie in [0, 1)");
  }
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw std::invalid_argument("tradeoff: alpha must lie in [0, 1]");
  }
  const double branch_steep = 1.0 - delta - std::exp(eps) * alpha;
  const double branch_flat = std::exp(-eps) * (1.0 - delta - alpha);
  return std::max({0.0, branch_steep, branch_flat});
}

}  // namespace shuffleaudit
