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
#include "shuffleaudit/audit_kernels.hpp"

#include <stdexcept>

namespace shuffleaudit {

namespace {

struct Workspace {
  std::vector<double> row;
  std::vector<double> scores;
  BtsScratch bts;
};

struct ResolvedKernel {
  const KernelPlan& plan;
  SurrogateMeans means{};
  bool bts_path = false;
  bool bts_bug = false;
  int gen_world = 0;

  explicit ResolvedKernel(const KernelPlan& p) : plan(p) {
    plan.params.validate();
    plan.sampler.validate(plan.params.dataset_size(), plan.params.batch_size);
    gen_world = plan.null_worlds ? 0 : plan.world_bit;
    if (plan.model == AuditModel::BatchThenShuffle) {
      // The sampler decides whether the bug is present; FullShuffle is the
      // fixed comparator over the same record layout.
      bts_path = true;
      bts_bug = plan.sampler.kind == SamplerKind::BatchThenShuffle;
      if (!bts_bug && plan.sampler.kind != SamplerKind::FullShuffle) {
        throw std::invalid_argument(
            "batch-then-shuffle audits take full_shuffle or "
            "batch_then_shuffle samplers");
      }
    } else {
      means = surrogate_means(plan.model, plan.params, gen_world);
    }
  }

  void score_one(std::int64_t index,
                 std::span<const HypothesisPair> hypotheses, Workspace& ws,
                 std::span<double* const> outputs) const {
    RandomStream stream(
        {plan.master_seed,
         plan.stream_offset + static_cast<std::uint64_t>(index)});
    const std::size_t num_h = hypotheses.size();
    for (std::size_t h = 0; h < num_h; ++h) ws.scores[h] = 0.0;
    const std::span<double> row(ws.row.data(), ws.row.size());
    for (std::int64_t e = 0; e < plan.params.epochs; ++e) {
      if (bts_path) {
        fill_bts_epoch(row, plan.params, gen_world, bts_bug, stream, ws.bts);
      } else {
        fill_surrogate_epoch(row, means, plan.params, plan.sampler, stream);
      }
      for (std::size_t h = 0; h < num_h; ++h) {
        ws.scores[h] += log_lr_epoch(row, hypotheses[h]);
      }
    }
    for (std::size_t h = 0; h < num_h; ++h) {
      outputs[h][index] = ws.scores[h];
    }
  }
};

void validate_kernel_args(const KernelPlan& plan,
                          std::span<const HypothesisPair> hypotheses,
                          std::span<double* const> outputs) {
  if (hypotheses.empty()) {
    throw std::invalid_argument("kernel needs at least one hypothesis");
  }
  if (hypotheses.size() != outputs.size()) {
    throw std::invalid_argument("one output array per hypothesis required");
  }
  for (const auto& hp : hypotheses) {
    hp.validate(plan.params.steps_per_epoch);
  }
}

}  // namespace

void generate_and_score_serial(const KernelPlan& plan,
                               std::span<const HypothesisPair> hypotheses,
                               std::int64_t count,
                               std::span<double* const> outputs) {
  validate_kernel_args(plan, hypotheses, outputs);
  const ResolvedKernel kernel(plan);
  Workspace ws;
  ws.row.resize(static_cast<std::size_t>(plan.params.steps_per_epoch));
  ws.scores.resize(hypotheses.size());
  for (std::int64_t i = 0; i < count; ++i) {
    kernel.score_one(i, hypotheses, ws, outputs);
  }
}

void generate_and_score_omp(const KernelPlan& plan,
                            std::span<const HypothesisPair> hypotheses,
                            std::int64_t count,
                            std::span<double* const> outputs) {
  validate_kernel_args(plan, hypotheses, outputs);
  const ResolvedKernel kernel(plan);
#pragma omp parallel
  {
    Workspace ws;
    ws.row.resize(static_cast<std::size_t>(plan.params.steps_per_epoch));
    ws.scores.resize(hypotheses.size());
#pragma omp for schedule(static)
    for (std::int64_t i = 0; i < count; ++i) {
      kernel.score_one(i, hypotheses, ws, outputs);
    }
  }
}

void generate_and_score_serial(const KernelPlan& plan,
                               const HypothesisPair& hp,
                               std::span<double> out) {
  double* const outputs[1] = {out.data()};
  generate_and_score_serial(plan, {&hp, 1},
                            static_cast<std::int64_t>(out.size()), outputs);
}

void generate_and_score_omp(const KernelPlan& plan, const HypothesisPair& hp,
                            std::span<double> out) {
  double* const outputs[1] = {out.data()};
  generate_and_score_omp(plan, {&hp, 1}, static_cast<std::int64_t>(out.size()),
                         outputs);
}

}  // namespace shuffleaudit
