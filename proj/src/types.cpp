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
#include "shuffleaudit/types.hpp"

#include <cmath>
#include <stdexcept>

namespace shuffleaudit {

void MechanismParams::validate() const {
  if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
  if (steps_per_epoch < 1) {
    throw std::invalid_argument("steps_per_epoch must be >= 1");
  }
  if (epochs < 1) throw std::invalid_argument("epochs must be >= 1");
  if (!(noise_multiplier >= 0.0) || !std::isfinite(noise_multiplier)) {
    throw std::invalid_argument("noise_multiplier must be >= 0 and finite");
  }
  if (!(clip_norm > 0.0) || !std::isfinite(clip_norm)) {
    throw std::invalid_argument("clip_norm must be > 0 and finite");
  }
  if (!(delta > 0.0 && delta < 1.0)) {
    throw std::invalid_argument("delta must lie in (0, 1)");
  }
}

void SamplerSpec::validate(std::int64_t dataset_size,
                           std::int64_t batch_size) const {
  if (dataset_size % batch_size != 0) {
    throw std::invalid_argument(
        "batch_size must divide the dataset size n = B*T");
  }
  if (kind == SamplerKind::PartialShuffle) {
    if (buffer_size < 1) {
      throw std::invalid_argument("partial shuffle buffer_size must be >= 1");
    }
    if (buffer_size % batch_size != 0) {
      throw std::invalid_argument(
          "batch_size must divide the partial shuffle buffer_size");
    }
    if (buffer_size > dataset_size) {
      throw std::invalid_argument(
          "partial shuffle buffer_size must be <= dataset size");
    }
  }
}

std::string to_string(SamplerKind kind) {
  switch (kind) {
    case SamplerKind::FullShuffle: return "full_shuffle";
    case SamplerKind::PartialShuffle: return "partial_shuffle";
    case SamplerKind::BatchThenShuffle: return "batch_then_shuffle";
  }
  return "unknown";
}

std::string to_string(AuditModel model) {
  switch (model) {
    case AuditModel::Natural: return "natural";
    case AuditModel::PartiallyInformed: return "partially_informed";
    case AuditModel::WorstCase: return "worst_case";
    case AuditModel::BatchThenShuffle: return "batch_then_shuffle";
  }
  return "unknown";
}

SamplerKind sampler_kind_from_string(const std::string& name) {
  if (name == "full_shuffle") return SamplerKind::FullShuffle;
  if (name == "partial_shuffle") return SamplerKind::PartialShuffle;
  if (name == "batch_then_shuffle") return SamplerKind::BatchThenShuffle;
  throw std::invalid_argument("unknown sampler kind: " + name);
}

AuditModel audit_model_from_string(const std::string& name) {
  if (name == "natural") return AuditModel::Natural;
  if (name == "partially_informed") return AuditModel::PartiallyInformed;
  if (name == "worst_case") return AuditModel::WorstCase;
  if (name == "batch_then_shuffle") return AuditModel::BatchThenShuffle;
  throw std::invalid_argument("unknown threat model: " + name);
}

void ObservationMatrix::validate() const {
  if (epochs < 1 || steps < 1) {
    throw std::invalid_argument("observation matrix must be non-empty");
  }
  if (values.size() != static_cast<std::size_t>(epochs * steps)) {
    throw std::invalid_argument(
        "observation matrix storage does not match epochs x steps");
  }
  if (world_bit != 0 && world_bit != 1) {
    throw std::invalid_argument("world_bit must be 0 or 1");
  }
  for (double v : values) {
    if (!std::isfinite(v)) {
      throw std::invalid_argument("observation matrix entries must be finite");
    }
  }
}

}  // namespace shuffleaudit
