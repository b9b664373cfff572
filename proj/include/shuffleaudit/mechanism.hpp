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
#ifndef SHUFFLEAUDIT_MECHANISM_HPP_
#define SHUFFLEAUDIT_MECHANISM_HPP_

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "shuffleaudit/rng.hpp"
#include "shuffleaudit/sampler.hpp"
#include "shuffleaudit/types.hpp"

namespace shuffleaudit {

// Explicit record values in [-1, +1] (normalized gradient-projection
// units). Position 0 holds the target value: +1 when the world bit is 1,
// the zero-out value 0 otherwise.
struct RecordValues {
  std::vector<double> values;
  int world_bit = 0;

  void validate() const;
};

// (+1 or 0, -1, ..., -1): the adversarial layout under which batch sums are
// maximally informative for shuffle audits.
RecordValues worst_case_records(std::int64_t n, int world_bit);

// First batch_size records +1 (target at position 0, zeroed when world 0),
// remaining records -1: the layout that exposes batch-then-shuffle.
RecordValues bts_records(std::int64_t n, std::int64_t batch_size,
                         int world_bit);

// Batched Gaussian release over explicit records: per epoch, draw a batch
// assignment and emit each batch's member-value sum plus N(0, sigma^2).
// Epochs are batched independently. This is the serial reference
// implementation; the surrogate generators below are the fast paths and are
// held to it distributionally by the test suite.
ObservationMatrix bgm_run(const RecordValues& records,
                          const MechanismParams& params,
                          const SamplerSpec& spec, RandomStream& stream);

// Per-world cell means of the surrogate observation model. Observations are
// normalized to (B/C) times the canary dot product, so the signal mean is
// the table value and the noise deviation is exactly sigma.
struct SurrogateMeans {
  double target = 0.0;
  double background = 0.0;
};
SurrogateMeans surrogate_means(AuditModel model, const MechanismParams& params,
                               int world_bit);

// Fills one epoch row: draws the target batch index for the sampler, then
// one normal per cell, in that order. Shared by the materializing
// generators and the fused scoring kernels.
void fill_surrogate_epoch(std::span<double> row, const SurrogateMeans& means,
                          const MechanismParams& params,
                          const SamplerSpec& spec, RandomStream& stream);

// Fast equivalent of running DP-SGD audit instrumentation for one threat
// model: E independent epochs of fill_surrogate_epoch.
ObservationMatrix surrogate_observations(ThreatModel tm,
                                         const MechanismParams& params,
                                         const SamplerSpec& spec,
                                         int world_bit, RandomStream& stream);

// Scratch for the no-bug batch-then-shuffle path (distinct-slot sampling).
struct BtsScratch {
  std::vector<std::uint32_t> slot_stamp;  // lazily sized to n
  std::vector<std::int32_t> batch_counts;
  std::uint32_t generation = 0;
};

// One epoch of batch sums over the bts_records layout.
// bug=true: blocks are kept intact and labels permuted, so only the block
// holding the target differs from -B; bug=false: the +1 group scatters
// hypergeometrically under the full shuffle.
void fill_bts_epoch(std::span<double> row, const MechanismParams& params,
                    int world_bit, bool bug, RandomStream& stream,
                    BtsScratch& scratch);

// E epochs of fill_bts_epoch.
ObservationMatrix bts_observations(const MechanismParams& params,
                                   int world_bit, bool bug,
                                   RandomStream& stream);

// Binary dump for offline re-scoring: 24-byte little-endian header (E, T,
// world_bit as 64-bit integers) followed by row-major 64-bit floats.
void write_observation(std::ostream& out, const ObservationMatrix& obs);
ObservationMatrix read_observation(std::istream& in);
std::vector<ObservationMatrix> read_observations(std::istream& in);

}  // namespace shuffleaudit

#endif  // SHUFFLEAUDIT_MECHANISM_HPP_
