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
#include "shuffleaudit/scoring.hpp"

namespace shuffleaudit {

MeanTriple mean_triple(AuditModel model, std::int64_t batch_size) {
  const auto b = static_cast<double>(batch_size);
  switch (model) {
    case AuditModel::Natural:
      return {1.0, 0.0, 0.0, true};
    case AuditModel::PartiallyInformed:
      return {1.0, 0.0, -1.0, false};
    case AuditModel::WorstCase:
      return {-b + 2.0, -b + 1.0, -b, false};
    case AuditModel::BatchThenShuffle:
      return {b, b - 1.0, -b, false};
  }
  return {};
}

HypothesisPair hypothesis_for(AuditModel model, const MechanismParams& params,
                              std::int64_t support) {
  const MeanTriple means = mean_triple(model, params.batch_size);
  HypothesisPair hp;
  hp.sigma = params.noise_multiplier;
  hp.support = support;
  hp.mu_target_1 = means.target_1;
  hp.mu_target_0 = means.target_0;
  hp.mu_background = means.background;
  hp.background_denominator = means.background_denominator;
  hp.validate(params.steps_per_epoch);
  return hp;
}

double log_lr_matrix(const ObservationMatrix& obs, const HypothesisPair& hp) {
  hp.validate(obs.steps);
  double total = 0.0;
  for (std::int64_t e = 0; e < obs.epochs; ++e) {
    total += log_lr_epoch(obs.row(e), hp);
  }
  return total;
}

}  // namespace shuffleaudit
