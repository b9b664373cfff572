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
#ifndef SHUFFLEAUDIT_TYPES_HPP_
#define SHUFFLEAUDIT_TYPES_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace shuffleaudit {

// One audited configuration of the batched Gaussian release.
struct MechanismParams {
  std::int64_t batch_size = 1;       // B, records per batch
  std::int64_t steps_per_epoch = 1;  // T, batches per epoch
  std::int64_t epochs = 1;           // E
  double noise_multiplier = 1.0;     // sigma; 0 enables noise-free tests
  double clip_norm = 1.0;            // C, gradient-norm units
  double delta = 1e-5;

  std::int64_t dataset_size() const { return batch_size * steps_per_epoch; }

  // Throws std::invalid_argument naming the violated invariant.
  void validate() const;
};

enum class SamplerKind { FullShuffle, PartialShuffle, BatchThenShuffle };

// Batch-forming procedure. PartialShuffle permutes only within consecutive
// buffers of K records; BatchThenShuffle keeps contiguous blocks intact and
// permutes the block order (the bug pattern).
struct SamplerSpec {
  SamplerKind kind = SamplerKind::FullShuffle;
  std::int64_t buffer_size = 0;  // K, PartialShuffle only

  static SamplerSpec full_shuffle() { return {SamplerKind::FullShuffle, 0}; }
  static SamplerSpec partial_shuffle(std::int64_t buffer) {
    return {SamplerKind::PartialShuffle, buffer};
  }
  static SamplerSpec batch_then_shuffle() {
    return {SamplerKind::BatchThenShuffle, 0};
  }

  void validate(std::int64_t dataset_size, std::int64_t batch_size) const;
};

enum class ThreatModel { Natural, PartiallyInformed, WorstCase };

// Threat models plus the batch-then-shuffle bug audit, which reuses the
// same scoring machinery with its own mean triple.
enum class AuditModel { Natural, PartiallyInformed, WorstCase, BatchThenShuffle };

inline AuditModel to_audit_model(ThreatModel tm) {
  switch (tm) {
    case ThreatModel::Natural: return AuditModel::Natural;
    case ThreatModel::PartiallyInformed: return AuditModel::PartiallyInformed;
    default: return AuditModel::WorstCase;
  }
}

std::string to_string(SamplerKind kind);
std::string to_string(AuditModel model);
SamplerKind sampler_kind_from_string(const std::string& name);
AuditModel audit_model_from_string(const std::string& name);

// E x T matrix of per-step scalar observations (noisy batch sums or
// normalized canary dot products), labeled with the ground-truth world.
struct ObservationMatrix {
  std::int64_t epochs = 0;
  std::int64_t steps = 0;
  int world_bit = 0;  // 1 = target record present, 0 = zero-out record
  std::vector<double> values;  // row-major, epochs x steps

  ObservationMatrix() = default;
  ObservationMatrix(std::int64_t e, std::int64_t t, int b)
      : epochs(e), steps(t), world_bit(b),
        values(static_cast<std::size_t>(e * t), 0.0) {}

  double& at(std::int64_t epoch, std::int64_t step) {
    return values[static_cast<std::size_t>(epoch * steps + step)];
  }
  double at(std::int64_t epoch, std::int64_t step) const {
    return values[static_cast<std::size_t>(epoch * steps + step)];
  }
  std::span<const double> row(std::int64_t epoch) const {
    return {values.data() + epoch * steps, static_cast<std::size_t>(steps)};
  }
  std::span<double> row(std::int64_t epoch) {
    return {values.data() + epoch * steps, static_cast<std::size_t>(steps)};
  }

  // Dimensions match and every entry is finite; throws otherwise.
  void validate() const;
};

}  // namespace shuffleaudit

#endif  // SHUFFLEAUDIT_TYPES_HPP_
