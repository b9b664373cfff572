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
#ifndef SHUFFLEAUDIT_AUDIT_KERNELS_HPP_
#define SHUFFLEAUDIT_AUDIT_KERNELS_HPP_

#include <cstdint>
#include <span>
#include <vector>

#include "shuffleaudit/mechanism.hpp"
#include "shuffleaudit/scoring.hpp"
#include "shuffleaudit/types.hpp"

namespace shuffleaudit {

// Resolved generation recipe for one batch of observations. Observation i
// uses the stream (master_seed, stream_offset + i); scores land at out[i],
// so results are identical for any worker count or schedule.
struct KernelPlan {
  MechanismParams params;
  SamplerSpec sampler;
  AuditModel model = AuditModel::WorstCase;
  int world_bit = 1;
  bool null_worlds = false;  // generate world 0 regardless of the label
  std::uint64_t master_seed = 0;
  std::uint64_t stream_offset = 0;
};

// Generates `count` observation matrices and scores each against every
// hypothesis, fused so matrices never persist. outputs[h][i] receives the
// score of observation i under hypotheses[h].
//
// The OpenMP version fans observations out across threads; the serial
// version is the reference implementation the parallel one is tested
// against (outputs must match bitwise).
void generate_and_score_omp(const KernelPlan& plan,
                            std::span<const HypothesisPair> hypotheses,
                            std::int64_t count,
                            std::span<double* const> outputs);
void generate_and_score_serial(const KernelPlan& plan,
                               std::span<const HypothesisPair> hypotheses,
                               std::int64_t count,
                               std::span<double* const> outputs);

// Convenience single-hypothesis wrappers.
void generate_and_score_omp(const KernelPlan& plan, const HypothesisPair& hp,
                            std::span<double> out);
void generate_and_score_serial(const KernelPlan& plan,
                               const HypothesisPair& hp,
                               std::span<double> out);

}  // namespace shuffleaudit

#endif  // SHUFFLEAUDIT_AUDIT_KERNELS_HPP_
