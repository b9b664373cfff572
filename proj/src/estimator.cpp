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
#include "shuffleaudit/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <unordered_map>

namespace shuffleaudit {

namespace detail {

namespace {

constexpr int kMaxCfIterations = 400;
constexpr double kCfEpsilon = 1e-16;
constexpr double kCfTiny = 1e-300;

// Modified Lentz evaluation of the incomplete beta continued fraction.
double betacf(double a, double b, double x) {
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kCfTiny) d = kCfTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxCfIterations; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kCfTiny) d = kCfTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kCfTiny) c = kCfTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kCfTiny) d = kCfTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kCfTiny) c = kCfTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kCfEpsilon) return h;
  }
  return h;  // converged to double precision in practice well before this
}

}  // namespace

double regularized_incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0 && b > 0.0)) {
    throw std::invalid_argument("incomplete beta requires a, b > 0");
  }
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) -
                           std::lgamma(b) + a * std::log(x) +
                           b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * betacf(a, b, x) / a;
  }
  return 1.0 - front * betacf(b, a, 1.0 - x) / b;
}

double beta_quantile(double a, double b, double p) {
  if (p <= 0.0) return 0.0;
  if (p >= 1.0) return 1.0;
  const double log_beta =
      std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
  double lo = 0.0, hi = 1.0;
  double x = a / (a + b);
  for (int iter = 0; iter < 300; ++iter) {
    const double f = regularized_incomplete_beta(a, b, x) - p;
    (f > 0.0 ? hi : lo) = x;
    if (hi - lo <= 1e-13) break;
    // Newton step off the density, bisection whenever it leaves the bracket.
    const double log_pdf =
        (a - 1.0) * std::log(x) + (b - 1.0) * std::log1p(-x) - log_beta;
    double next = x;
    if (std::isfinite(log_pdf) && log_pdf > -700.0) {
      next = x - f / std::exp(log_pdf);
    }
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    x = next;
  }
  return 0.5 * (lo + hi);
}

}  // namespace detail

double clopper_pearson_upper(std::int64_t successes, std::int64_t trials,
                             double confidence) {
  if (trials < 1) throw std::invalid_argument("trials must be >= 1");
  if (successes < 0 || successes > trials) {
    throw std::invalid_argument("successes must lie in [0, trials]");
  }
  if (!(confidence > 0.0 && confidence < 1.0)) {
    throw std::invalid_argument("confidence must lie in (0, 1)");
  }
  if (successes == trials) return 1.0;
  return detail::beta_quantile(static_cast<double>(successes + 1),
                               static_cast<double>(trials - successes),
                               confidence);
}

double eps_from_rates(double alpha_bar, double beta_bar, double delta,
                      double cap, bool* capped) {
  if (!(alpha_bar >= 0.0 && alpha_bar <= 1.0 && beta_bar >= 0.0 &&
        beta_bar <= 1.0)) {
    throw std::invalid_argument("rate bounds must lie in [0, 1]");
  }
  if (capped != nullptr) *capped = false;
  double best = 0.0;
  const auto branch = [&](double numerator, double denominator) {
    if (numerator <= 0.0) return;
    if (denominator <= 0.0) {
      best = cap;
      if (capped != nullptr) *capped = true;
      return;
    }
    best = std::max(best, std::log(numerator / denominator));
  };
  branch(1.0 - alpha_bar - delta, beta_bar);
  branch(1.0 - beta_bar - delta, alpha_bar);
  if (best >= cap) {
    best = cap;
    if (capped != nullptr) *capped = true;
  }
  return best;
}

CpUpperTable::CpUpperTable(std::int64_t trials, double confidence)
    : trials_(trials), confidence_(confidence),
      table_(static_cast<std::size_t>(trials + 1)) {
  auto* data = table_.data();
#pragma omp parallel for schedule(dynamic, 1024)
  for (std::int64_t k = 0; k <= trials; ++k) {
    data[k] = clopper_pearson_upper(k, trials, confidence);
  }
}

namespace {

// Clopper-Pearson provider: dense table when affordable, otherwise lazy
// memoized evaluation (the pruning in the sweep keeps exact calls rare).
class CpProvider {
 public:
  CpProvider(std::int64_t trials, double confidence, bool use_cp,
             const EstimateOptions& opt)
      : trials_(trials), confidence_(confidence), use_cp_(use_cp) {
    if (!use_cp_) return;
    if (opt.shared_table && opt.shared_table->trials() == trials &&
        opt.shared_table->confidence() == confidence) {
      shared_ = opt.shared_table;
    } else if (trials <= opt.cp_table_limit) {
      owned_ = std::make_shared<CpUpperTable>(trials, confidence);
      shared_ = owned_;
    }
  }

  bool table_backed() const { return shared_ != nullptr || !use_cp_; }

  double at(std::int64_t k) {
    if (!use_cp_) return static_cast<double>(k) / static_cast<double>(trials_);
    if (shared_) return (*shared_)[k];
    auto it = memo_.find(k);
    if (it != memo_.end()) return it->second;
    const double v = clopper_pearson_upper(k, trials_, confidence_);
    memo_.emplace(k, v);
    return v;
  }

  // Lower bound of the CP upper bound, cheap enough for pruning.
  double floor_at(std::int64_t k) const {
    if (!use_cp_) return static_cast<double>(k) / static_cast<double>(trials_);
    return std::max(static_cast<double>(k) / static_cast<double>(trials_),
                    cp_zero_);
  }

  void set_cp_zero(double v) { cp_zero_ = v; }

 private:
  std::int64_t trials_;
  double confidence_;
  bool use_cp_;
  std::shared_ptr<const CpUpperTable> shared_;
  std::shared_ptr<CpUpperTable> owned_;
  std::unordered_map<std::int64_t, double> memo_;
  double cp_zero_ = 0.0;
};

struct StreamHead {
  SortedScoreStream* stream = nullptr;
  double value = 0.0;
  bool live = false;

  void advance() { live = stream->next(value); }
};

AuditResult sweep_engine(SortedScoreStream& d1, SortedScoreStream& d0,
                         std::int64_t per_world, const EstimateOptions& opt) {
  if (per_world < 1) {
    throw std::invalid_argument("estimate_eps: score sets must be non-empty");
  }
  const double confidence = 1.0 - opt.significance;
  if (!(confidence > 0.0 && confidence < 1.0)) {
    throw std::invalid_argument("significance must lie in (0, 1)");
  }
  const std::int64_t total = 2 * per_world;

  CpProvider cp(per_world, confidence, opt.use_cp, opt);
  const double cp_zero = opt.use_cp
                             ? clopper_pearson_upper(0, per_world, confidence)
                             : 0.0;
  cp.set_cp_zero(cp_zero);

  std::int64_t stride = 1;
  if (opt.collect_curve && opt.max_curve_points > 0) {
    stride = std::max<std::int64_t>(
        1, (total + opt.max_curve_points - 1) / opt.max_curve_points);
  }

  AuditResult result;
  result.confidence = confidence;
  result.delta = opt.delta;
  result.eps_emp = -1.0;  // every evaluated threshold scores >= 0

  std::int64_t fpr_count = per_world;  // everything classified world 1
  std::int64_t fnr_count = 0;
  const double inv_r = 1.0 / static_cast<double>(per_world);

  StreamHead h1{&d1}, h0{&d0};
  h1.advance();
  h0.advance();
  std::int64_t consumed1 = h1.live ? 1 : 0, consumed0 = h0.live ? 1 : 0;
  std::int64_t group_index = 0;
  double last1 = -std::numeric_limits<double>::infinity();
  double last0 = last1;

  while (h1.live || h0.live) {
    double tau;
    if (h1.live && h0.live) {
      tau = std::min(h1.value, h0.value);
    } else {
      tau = h1.live ? h1.value : h0.value;
    }
    // Apply every score tied at tau before evaluating: with the
    // strict-greater rule they are all classified world 0 at this cut.
    while (h1.live && h1.value == tau) {
      ++fnr_count;
      last1 = h1.value;
      h1.advance();
      if (h1.live) {
        ++consumed1;
        if (h1.value < last1) {
          throw std::invalid_argument("d1 scores not sorted non-decreasing");
        }
      }
    }
    while (h0.live && h0.value == tau) {
      --fpr_count;
      last0 = h0.value;
      h0.advance();
      if (h0.live) {
        ++consumed0;
        if (h0.value < last0) {
          throw std::invalid_argument("d0 scores not sorted non-decreasing");
        }
      }
    }

    const bool want_curve =
        opt.collect_curve &&
        (group_index % stride == 0 || (!h1.live && !h0.live));
    bool need_exact = want_curve || cp.table_backed();
    if (!need_exact) {
      // Branch-and-bound: the true rate bounds are at least the floors, so
      // this threshold cannot beat the incumbent if even the optimistic
      // epsilon falls short.
      const double opt_eps = eps_from_rates(cp.floor_at(fpr_count),
                                            cp.floor_at(fnr_count), opt.delta,
                                            opt.eps_cap, nullptr);
      need_exact = opt_eps > result.eps_emp;
    }
    if (need_exact) {
      const double alpha_bar = cp.at(fpr_count);
      const double beta_bar = cp.at(fnr_count);
      bool capped = false;
      const double eps =
          eps_from_rates(alpha_bar, beta_bar, opt.delta, opt.eps_cap, &capped);
      if (eps > result.eps_emp) {
        result.eps_emp = eps;
        result.threshold = tau;
        result.alpha_bar = alpha_bar;
        result.beta_bar = beta_bar;
        result.eps_capped = capped;
      }
      if (want_curve) {
        result.curve.push_back({tau, fpr_count * inv_r, fnr_count * inv_r,
                                alpha_bar, beta_bar, eps});
      }
    }
    ++group_index;
  }

  if (consumed1 != per_world || consumed0 != per_world) {
    throw std::invalid_argument(
        "estimate_eps: streams did not yield per_world scores each");
  }
  if (result.eps_emp < 0.0) result.eps_emp = 0.0;
  return result;
}

void check_finite(const std::vector<double>& v, const char* name) {
  for (double x : v) {
    if (!std::isfinite(x)) {
      throw std::invalid_argument(std::string(name) +
                                  " contains a non-finite score");
    }
  }
}

}  // namespace

AuditResult estimate_eps(const ScoreSet& scores, const EstimateOptions& opt) {
  if (scores.scores_d1.size() != scores.scores_d0.size()) {
    throw std::invalid_argument("score sets must have equal sizes");
  }
  if (scores.scores_d1.empty()) {
    throw std::invalid_argument("score sets must be non-empty");
  }
  check_finite(scores.scores_d1, "scores_d1");
  check_finite(scores.scores_d0, "scores_d0");
  std::vector<double> s1 = scores.scores_d1;
  std::vector<double> s0 = scores.scores_d0;
  std::sort(s1.begin(), s1.end());
  std::sort(s0.begin(), s0.end());
  SpanScoreStream d1(s1.data(), static_cast<std::int64_t>(s1.size()));
  SpanScoreStream d0(s0.data(), static_cast<std::int64_t>(s0.size()));
  return sweep_engine(d1, d0, static_cast<std::int64_t>(s1.size()), opt);
}

AuditResult estimate_eps(const ScoreSet& scores, double significance,
                         double delta) {
  EstimateOptions opt;
  opt.significance = significance;
  opt.delta = delta;
  return estimate_eps(scores, opt);
}

AuditResult estimate_eps_sorted(SortedScoreStream& d1, SortedScoreStream& d0,
                                std::int64_t per_world,
                                const EstimateOptions& opt) {
  return sweep_engine(d1, d0, per_world, opt);
}

std::vector<CurvePoint> empirical_tradeoff(const ScoreSet& scores,
                                           double confidence, bool raw,
                                           double delta) {
  EstimateOptions opt;
  opt.significance = 1.0 - confidence;
  opt.delta = delta;
  opt.use_cp = !raw;
  opt.collect_curve = true;
  opt.max_curve_points = 0;
  return estimate_eps(scores, opt).curve;
}

}  // namespace shuffleaudit
