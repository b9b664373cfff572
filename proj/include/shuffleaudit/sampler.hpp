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
#ifndef SHUFFLEAUDIT_SAMPLER_HPP_
#define SHUFFLEAUDIT_SAMPLER_HPP_

#include <cstdint>
#include <vector>

#include "shuffleaudit/rng.hpp"
#include "shuffleaudit/types.hpp"

namespace shuffleaudit {

// Full realization of one batch-forming draw. order[position] = record;
// perm and batch_of are derived views of the same draw.
struct BatchAssignment {
  std::vector<std::int64_t> perm;      // record index -> dataset position
  std::vector<std::int64_t> batch_of;  // record index -> batch index

  std::int64_t n() const { return static_cast<std::int64_t>(perm.size()); }
};

// Draws a batch assignment for n records in batches of B:
//   FullShuffle      - uniform permutation, then contiguous B-blocks.
//   PartialShuffle   - uniform permutation within each K-buffer, then blocks.
//   BatchThenShuffle - contiguous blocks of the unshuffled order, then a
//                      uniform permutation of the block labels.
BatchAssignment assign_batches(std::int64_t n, std::int64_t batch_size,
                               const SamplerSpec& spec, RandomStream& stream);

// Fast sufficient-statistic draw: the batch index of the distinguished
// record at dataset position 0. Marginals: FullShuffle and BatchThenShuffle
// are uniform over all T batches; PartialShuffle is uniform over the first
// K/B batches. Distributional equivalence with assign_batches is enforced
// by the test suite; this path never materializes a permutation.
std::int64_t target_batch_index(std::int64_t n, std::int64_t batch_size,
                                const SamplerSpec& spec, RandomStream& stream);

}  // namespace shuffleaudit

#endif  // SHUFFLEAUDIT_SAMPLER_HPP_
