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
#include "shuffleaudit/sampler.hpp"

#include <numeric>
#include <utility>

namespace shuffleaudit {

namespace {

// Fisher-Yates over order[first, last).
void shuffle_range(std::vector<std::int64_t>& order, std::int64_t first,
                   std::int64_t last, RandomStream& stream) {
  for (std::int64_t i = last - 1; i > first; --i) {
    const auto j =
        first + static_cast<std::int64_t>(
                    stream.uniform_below(static_cast<std::uint64_t>(i - first + 1)));
    std::swap(order[static_cast<std::size_t>(i)],
              order[static_cast<std::size_t>(j)]);
  }
}

}  // namespace

BatchAssignment assign_batches(std::int64_t n, std::int64_t batch_size,
                               const SamplerSpec& spec, RandomStream& stream) {
  spec.validate(n, batch_size);
  BatchAssignment out;
  out.perm.resize(static_cast<std::size_t>(n));
  out.batch_of.resize(static_cast<std::size_t>(n));

  if (spec.kind == SamplerKind::BatchThenShuffle) {
    // Blocks stay intact; only their labels move.
    const std::int64_t num_batches = n / batch_size;
    std::vector<std::int64_t> label(static_cast<std::size_t>(num_batches));
    std::iota(label.begin(), label.end(), 0);
    shuffle_range(label, 0, num_batches, stream);
    for (std::int64_t r = 0; r < n; ++r) {
      const std::int64_t block = r / batch_size;
      const std::int64_t pos =
          label[static_cast<std::size_t>(block)] * batch_size + r % batch_size;
      out.perm[static_cast<std::size_t>(r)] = pos;
      out.batch_of[static_cast<std::size_t>(r)] =
          label[static_cast<std::size_t>(block)];
    }
    return out;
  }

  std::vector<std::int64_t> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  if (spec.kind == SamplerKind::FullShuffle) {
    shuffle_range(order, 0, n, stream);
  } else {
    for (std::int64_t start = 0; start < n; start += spec.buffer_size) {
      shuffle_range(order, start, start + spec.buffer_size, stream);
    }
  }
  for (std::int64_t pos = 0; pos < n; ++pos) {
    const std::int64_t record = order[static_cast<std::size_t>(pos)];
    out.perm[static_cast<std::size_t>(record)] = pos;
    out.batch_of[static_cast<std::size_t>(record)] = pos / batch_size;
  }
  return out;
}

std::int64_t target_batch_index(std::int64_t n, std::int64_t batch_size,
                                const SamplerSpec& spec, RandomStream& stream) {
  spec.validate(n, batch_size);
  const std::int64_t num_batches = n / batch_size;
  switch (spec.kind) {
    case SamplerKind::PartialShuffle: {
      const std::int64_t reachable = spec.buffer_size / batch_size;
      return static_cast<std::int64_t>(
          stream.uniform_below(static_cast<std::uint64_t>(reachable)));
    }
    case SamplerKind::FullShuffle:
    case SamplerKind::BatchThenShuffle:
      return static_cast<std::int64_t>(
          stream.uniform_below(static_cast<std::uint64_t>(num_batches)));
  }
  return 0;
}

}  // namespace shuffleaudit
