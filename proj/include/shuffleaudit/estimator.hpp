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
#ifndef SHUFFLEAUDIT_ESTIMATOR_HPP_
#define SHUFFLEAUDIT_ESTIMATOR_HPP_

#include <cstdint>
#include <memory>
#include <vector>

namespace shuffleaudit {

namespace detail {
// Regularized incomplete beta I_x(a, b) via Lentz's continued fraction.
double regularized_incomplete_beta(double a, double b, double x);
// Inverse of I_x(a, b) in x, bracketed bisection with Newton acceleration,
// accurate to 1e-12 absolute.
double beta_quantile(double a, double b, double p);
}  // namespace detail

// Exact one-sided upper confidence bound for a binomial proportion: the
// confidence-quantile of Beta(k+1, n-k); k = n returns 1.
double clopper_pearson_upper(std::int64_t successes, std::int64_t trials,
                             double confidence);

// Empirical epsilon from FPR/FNR upper bounds:
//   max{ ln((1-a-delta)/b), ln((1-b-delta)/a), 0 }.
// A zero rate contributes nothing unless its branch numerator is positive,
// in which case the result is clamped to `cap` and *capped is set.
double eps_from_rates(double alpha_bar, double beta_bar, double delta,
                      double cap = 50.0, bool* capped = nullptr);

// Labeled scalar scores; world 1 held the target record, world 0 the
// zero-out record. Sizes must match.
struct ScoreSet {
  std::vector<double> scores_d1;
  std::vector<double> scores_d0;
};

struct CurvePoint {
  double threshold = 0.0;
  double fpr_raw = 0.0, fnr_raw = 0.0;
  double fpr_upper = 0.0, fnr_upper = 0.0;
  double eps = 0.0;
};

struct AuditResult {
  double eps_emp = 0.0;
  double threshold = 0.0;  // optimal tau (scores > tau classified world 1)
  double alpha_bar = 1.0;
  double beta_bar = 1.0;
  double confidence = 0.95;
  double delta = 1e-5;
  bool eps_capped = false;
  std::vector<CurvePoint> curve;
  std::vector<double> repeats;  // per-repeat eps_emp when aggregated
  double repeat_std = 0.0;
};

// Precomputed Clopper-Pearson upper bounds for every count 0..trials,
// shareable across estimate calls with the same (trials, confidence).
class CpUpperTable {
 public:
  CpUpperTable(std::int64_t trials, double confidence);
  double operator[](std::int64_t k) const {
    return table_[static_cast<std::size_t>(k)];
  }
  std::int64_t trials() const { return trials_; }
  double confidence() const { return confidence_; }

 private:
  std::int64_t trials_;
  double confidence_;
  std::vector<double> table_;
};

struct EstimateOptions {
  double significance = 0.05;  // CP confidence is 1 - significance
  double delta = 1e-5;
  double eps_cap = 50.0;
  bool use_cp = true;           // raw mode (false) skips CP bounding
  bool collect_curve = true;
  std::int64_t max_curve_points = 0;  // 0 = unlimited
  // Above this many trials the sweep switches from a dense CP table to
  // lazy evaluation with branch-and-bound pruning.
  std::int64_t cp_table_limit = std::int64_t{1} << 24;
  std::shared_ptr<const CpUpperTable> shared_table;  // optional reuse
};

// One pull-based stream of scores in non-decreasing order (spill path).
class SortedScoreStream {
 public:
  virtual ~SortedScoreStream() = default;
  virtual bool next(double& value) = 0;
};

class SpanScoreStream final : public SortedScoreStream {
 public:
  SpanScoreStream(const double* data, std::int64_t n) : data_(data), n_(n) {}
  bool next(double& value) override {
    if (pos_ >= n_) return false;
    value = data_[pos_++];
    return true;
  }

 private:
  const double* data_;
  std::int64_t n_;
  std::int64_t pos_ = 0;
};

// Threshold sweep over the sorted score union: starting from the classifier
// that accepts everything (FPR count = R, FNR count = 0), each score in
// increasing order moves one count, every distinct threshold gets CP bounds
// and an epsilon, and the maximum wins. Scores equal to the threshold are
// classified as world 0 (strict-greater rule), so tied scores are applied
// before their threshold is evaluated.
AuditResult estimate_eps(const ScoreSet& scores, const EstimateOptions& opt);
AuditResult estimate_eps(const ScoreSet& scores, double significance,
                         double delta);

// Same sweep over pre-sorted streams; each stream must yield exactly
// `per_world` values.
AuditResult estimate_eps_sorted(SortedScoreStream& d1, SortedScoreStream& d0,
                                std::int64_t per_world,
                                const EstimateOptions& opt);

// One (FPR, FNR) point per threshold; raw mode reports observed rates,
// otherwise Clopper-Pearson upper bounds.
std::vector<CurvePoint> empirical_tradeoff(const ScoreSet& scores,
                                           double confidence,
                                           bool raw = false,
                                           double delta = 1e-5);

}  // namespace shuffleaudit

#endif  // SHUFFLEAUDIT_ESTIMATOR_HPP_
