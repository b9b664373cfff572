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
#ifndef SHUFFLEAUDIT_SCORING_HPP_
#define SHUFFLEAUDIT_SCORING_HPP_

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>

#include "shuffleaudit/types.hpp"

namespace shuffleaudit {

// Parameterizes the per-epoch likelihood ratio: the target batch carries
// mean mu_target_1 (world 1) or mu_target_0 (world 0), every other batch the
// shared background mean, and the target index ranges uniformly over the
// first `support` batches. With background_denominator the denominator is
// the fixed all-background product instead of a mixture (the single-canary
// adversary knows world 0 contains no canary anywhere).
struct HypothesisPair {
  double mu_target_1 = 1.0;
  double mu_target_0 = 0.0;
  double mu_background = 0.0;
  double sigma = 1.0;
  std::int64_t support = 1;
  bool background_denominator = false;

  void validate(std::int64_t steps_per_epoch) const {
    if (!(sigma > 0.0)) {
      throw std::invalid_argument("hypothesis sigma must be > 0");
    }
    if (support < 1 || support > steps_per_epoch) {
      throw std::invalid_argument("hypothesis support must lie in [1, T]");
    }
  }
};

// Mean triple of the observation model, shared between score hypotheses
// and the surrogate generators.
struct MeanTriple {
  double target_1 = 0.0;
  double target_0 = 0.0;
  double background = 0.0;
  bool background_denominator = false;
};
MeanTriple mean_triple(AuditModel model, std::int64_t batch_size);

// Mean triple (mu_target_1, mu_target_0, mu_background) for each audit
// model, with the given mixture support.
HypothesisPair hypothesis_for(AuditModel model, const MechanismParams& params,
                              std::int64_t support);

// Log-likelihood ratio of one epoch row. The Gaussian log-density ratio at
// each cell is linear in the observation,
//   a_t = slope * o_t + intercept,  slope = (mu - mu_bg) / sigma^2,
// so the mixture reduces to a log-sum-exp of linear maps; the max term is
// attained at an extreme observation because a_t is monotone in o_t. The
// uniform 1/support mixture weights cancel between numerator and
// denominator and are omitted.
inline double log_lr_epoch(std::span<const double> row,
                           const HypothesisPair& hp) {
  const auto support = static_cast<std::size_t>(hp.support);
  if (row.size() < support) {
    throw std::invalid_argument("row shorter than hypothesis support");
  }
  if (!(hp.sigma > 0.0) || hp.support < 1) {
    throw std::invalid_argument("invalid hypothesis pair");
  }
  const double inv_var = 1.0 / (hp.sigma * hp.sigma);
  const double slope1 = (hp.mu_target_1 - hp.mu_background) * inv_var;
  const double icpt1 = (hp.mu_background * hp.mu_background -
                        hp.mu_target_1 * hp.mu_target_1) *
                       0.5 * inv_var;
  const double slope0 = (hp.mu_target_0 - hp.mu_background) * inv_var;
  const double icpt0 = (hp.mu_background * hp.mu_background -
                        hp.mu_target_0 * hp.mu_target_0) *
                       0.5 * inv_var;

  double lo = row[0], hi = row[0];
  for (std::size_t t = 0; t < support; ++t) {
    const double o = row[t];
    if (!std::isfinite(o)) {
      throw std::domain_error("non-finite observation in score row");
    }
    lo = std::min(lo, o);
    hi = std::max(hi, o);
  }
  const double ref1 = slope1 >= 0.0 ? hi : lo;
  const double ref0 = slope0 >= 0.0 ? hi : lo;
  double sum1 = 0.0, sum0 = 0.0;
  for (std::size_t t = 0; t < support; ++t) {
    const double o = row[t];
    sum1 += std::exp(slope1 * (o - ref1));
    if (!hp.background_denominator) sum0 += std::exp(slope0 * (o - ref0));
  }
  double score = slope1 * ref1 + icpt1 + std::log(sum1);
  if (!hp.background_denominator) {
    score -= slope0 * ref0 + icpt0 + std::log(sum0);
  }
  if (!std::isfinite(score)) {
    throw std::domain_error("log-likelihood ratio is not finite");
  }
  return score;
}

// Sum of per-epoch log ratios: epochs are sampled independently, so the
// joint likelihood is the product over rows.
double log_lr_matrix(const ObservationMatrix& obs, const HypothesisPair& hp);

}  // namespace shuffleaudit

#endif  // SHUFFLEAUDIT_SCORING_HPP_
