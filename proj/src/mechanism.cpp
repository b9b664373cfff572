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
#include "shuffleaudit/mechanism.hpp"

#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>
#include <stdexcept>

#include "shuffleaudit/scoring.hpp"

namespace shuffleaudit {

void RecordValues::validate() const {
  if (values.empty()) throw std::invalid_argument("record values are empty");
  if (world_bit != 0 && world_bit != 1) {
    throw std::invalid_argument("world_bit must be 0 or 1");
  }
  for (double v : values) {
    if (!(v >= -1.0 && v <= 1.0)) {
      throw std::invalid_argument("record values must lie in [-1, +1]");
    }
  }
  const double expected = world_bit == 1 ? 1.0 : 0.0;
  if (values.front() != expected) {
    throw std::invalid_argument(
        "position 0 must hold +1 (world 1) or the zero-out value 0 (world 0)");
  }
}

RecordValues worst_case_records(std::int64_t n, int world_bit) {
  RecordValues records;
  records.world_bit = world_bit;
  records.values.assign(static_cast<std::size_t>(n), -1.0);
  records.values.front() = world_bit == 1 ? 1.0 : 0.0;
  return records;
}

RecordValues bts_records(std::int64_t n, std::int64_t batch_size,
                         int world_bit) {
  RecordValues records;
  records.world_bit = world_bit;
  records.values.assign(static_cast<std::size_t>(n), -1.0);
  for (std::int64_t i = 0; i < batch_size; ++i) {
    records.values[static_cast<std::size_t>(i)] = 1.0;
  }
  records.values.front() = world_bit == 1 ? 1.0 : 0.0;
  return records;
}

ObservationMatrix bgm_run(const RecordValues& records,
                          const MechanismParams& params,
                          const SamplerSpec& spec, RandomStream& stream) {
  params.validate();
  records.validate();
  const std::int64_t n = params.dataset_size();
  if (static_cast<std::int64_t>(records.values.size()) != n) {
    throw std::invalid_argument("record count must equal B * T");
  }
  ObservationMatrix obs(params.epochs, params.steps_per_epoch,
                        records.world_bit);
  for (std::int64_t e = 0; e < params.epochs; ++e) {
    const BatchAssignment assignment =
        assign_batches(n, params.batch_size, spec, stream);
    auto row = obs.row(e);
    for (std::int64_t t = 0; t < params.steps_per_epoch; ++t) row[t] = 0.0;
    for (std::int64_t r = 0; r < n; ++r) {
      row[assignment.batch_of[static_cast<std::size_t>(r)]] +=
          records.values[static_cast<std::size_t>(r)];
    }
    for (std::int64_t t = 0; t < params.steps_per_epoch; ++t) {
      row[t] += params.noise_multiplier * stream.normal();
    }
  }
  return obs;
}

SurrogateMeans surrogate_means(AuditModel model, const MechanismParams& params,
                               int world_bit) {
  const MeanTriple means = mean_triple(model, params.batch_size);
  return {world_bit == 1 ? means.target_1 : means.target_0, means.background};
}

void fill_surrogate_epoch(std::span<double> row, const SurrogateMeans& means,
                          const MechanismParams& params,
                          const SamplerSpec& spec, RandomStream& stream) {
  const std::int64_t target =
      target_batch_index(params.dataset_size(), params.batch_size, spec, stream);
  const double sigma = params.noise_multiplier;
  for (auto& cell : row) {
    cell = means.background + sigma * stream.normal();
  }
  row[static_cast<std::size_t>(target)] += means.target - means.background;
}

ObservationMatrix surrogate_observations(ThreatModel tm,
                                         const MechanismParams& params,
                                         const SamplerSpec& spec,
                                         int world_bit, RandomStream& stream) {
  params.validate();
  const SurrogateMeans means =
      surrogate_means(to_audit_model(tm), params, world_bit);
  ObservationMatrix obs(params.epochs, params.steps_per_epoch, world_bit);
  for (std::int64_t e = 0; e < params.epochs; ++e) {
    fill_surrogate_epoch(obs.row(e), means, params, spec, stream);
  }
  return obs;
}

void fill_bts_epoch(std::span<double> row, const MechanismParams& params,
                    int world_bit, bool bug, RandomStream& stream,
                    BtsScratch& scratch) {
  const std::int64_t batch = params.batch_size;
  const std::int64_t steps = params.steps_per_epoch;
  const double sigma = params.noise_multiplier;
  const auto b = static_cast<double>(batch);

  if (bug) {
    // Blocks survive batching intact; only the block holding the +1 group
    // (and the target) stands out after the label permutation.
    const SurrogateMeans means = surrogate_means(
        AuditModel::BatchThenShuffle, params, world_bit);
    fill_surrogate_epoch(row, means, params,
                         SamplerSpec::batch_then_shuffle(), stream);
    return;
  }

  // Full shuffle over the same layout: place the B special records (the
  // target plus B-1 ones) on distinct uniform slots; per-batch counts are
  // multivariate hypergeometric. The first slot drawn is the target's.
  const std::int64_t n = params.dataset_size();
  if (scratch.slot_stamp.size() < static_cast<std::size_t>(n)) {
    scratch.slot_stamp.assign(static_cast<std::size_t>(n), 0);
    scratch.generation = 0;
  }
  if (scratch.batch_counts.size() < static_cast<std::size_t>(steps)) {
    scratch.batch_counts.assign(static_cast<std::size_t>(steps), 0);
  }
  ++scratch.generation;
  if (scratch.generation == 0) {  // stamp wrap-around
    scratch.slot_stamp.assign(scratch.slot_stamp.size(), 0);
    scratch.generation = 1;
  }
  std::fill_n(scratch.batch_counts.begin(), steps, 0);

  std::int64_t target_batch = -1;
  for (std::int64_t drawn = 0; drawn < batch; ++drawn) {
    std::int64_t slot;
    do {
      slot = static_cast<std::int64_t>(
          stream.uniform_below(static_cast<std::uint64_t>(n)));
    } while (scratch.slot_stamp[static_cast<std::size_t>(slot)] ==
             scratch.generation);
    scratch.slot_stamp[static_cast<std::size_t>(slot)] = scratch.generation;
    ++scratch.batch_counts[static_cast<std::size_t>(slot / batch)];
    if (drawn == 0) target_batch = slot / batch;
  }
  for (std::int64_t t = 0; t < steps; ++t) {
    double sum = 2.0 * scratch.batch_counts[static_cast<std::size_t>(t)] - b;
    if (world_bit == 0 && t == target_batch) sum -= 1.0;
    row[static_cast<std::size_t>(t)] = sum + sigma * stream.normal();
  }
}

ObservationMatrix bts_observations(const MechanismParams& params,
                                   int world_bit, bool bug,
                                   RandomStream& stream) {
  params.validate();
  ObservationMatrix obs(params.epochs, params.steps_per_epoch, world_bit);
  BtsScratch scratch;
  for (std::int64_t e = 0; e < params.epochs; ++e) {
    fill_bts_epoch(obs.row(e), params, world_bit, bug, stream, scratch);
  }
  return obs;
}

namespace {

void put_u64_le(std::ostream& out, std::uint64_t v) {
  unsigned char bytes[8];
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(bytes), 8);
}

std::uint64_t get_u64_le(std::istream& in) {
  unsigned char bytes[8];
  in.read(reinterpret_cast<char*>(bytes), 8);
  if (!in) throw std::runtime_error("observation dump: truncated header");
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | bytes[i];
  return v;
}

}  // namespace

void write_observation(std::ostream& out, const ObservationMatrix& obs) {
  put_u64_le(out, static_cast<std::uint64_t>(obs.epochs));
  put_u64_le(out, static_cast<std::uint64_t>(obs.steps));
  put_u64_le(out, static_cast<std::uint64_t>(obs.world_bit));
  for (double v : obs.values) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    put_u64_le(out, bits);
  }
}

ObservationMatrix read_observation(std::istream& in) {
  const auto epochs = static_cast<std::int64_t>(get_u64_le(in));
  const auto steps = static_cast<std::int64_t>(get_u64_le(in));
  const auto world = static_cast<int>(get_u64_le(in));
  if (epochs < 1 || steps < 1 || epochs * steps > (1LL << 40)) {
    throw std::runtime_error("observation dump: implausible header");
  }
  ObservationMatrix obs(epochs, steps, world);
  for (auto& v : obs.values) {
    const std::uint64_t bits = get_u64_le(in);
    std::memcpy(&v, &bits, 8);
  }
  return obs;
}

std::vector<ObservationMatrix> read_observations(std::istream& in) {
  std::vector<ObservationMatrix> out;
  while (in.peek() != std::istream::traits_type::eof() && in.good()) {
    out.push_back(read_observation(in));
  }
  return out;
}

}  // namespace shuffleaudit
