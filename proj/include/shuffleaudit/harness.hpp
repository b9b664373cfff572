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
#ifndef SHUFFLEAUDIT_HARNESS_HPP_
#define SHUFFLEAUDIT_HARNESS_HPP_

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "shuffleaudit/config.hpp"
#include "shuffleaudit/estimator.hpp"
#include "shuffleaudit/types.hpp"

namespace shuffleaudit {

// One end-to-end audit: N observations per repeat, split evenly between the
// two worlds, scored and turned into an epsilon lower bound.
struct ExperimentPlan {
  std::string plan_id = "plan";
  MechanismParams params;
  SamplerSpec sampler;
  AuditModel threat = AuditModel::WorstCase;
  std::int64_t observations = 2;  // N, even; N/2 games per world
  int repeats = 5;
  double confidence = 0.95;
  std::uint64_t seed = 1;
  // When set, noise_multiplier is derived via calibrate_sigma for the
  // matched Poisson parameters q = 1/T, steps = T*E.
  std::optional<double> eps_target;
  bool null_worlds = false;  // both worlds generated as world 0 (soundness)
  bool emit_raw_curve = false;
  std::int64_t spill_threshold = 10'000'000;  // scores spill when N exceeds
  std::string spill_dir;
  std::int64_t max_curve_points = 4096;
  int threads = 0;  // 0 keeps the OpenMP default

  void validate() const;
  double poisson_q() const;          // 1 / steps_per_epoch
  std::int64_t poisson_steps() const;  // T * E
};

// Plan with noise_multiplier resolved (calibrated when eps_target is set).
ExperimentPlan resolve_plan(const ExperimentPlan& plan);

ExperimentPlan plan_from_config(const FlatConfig& config);
FlatConfig plan_to_config(const ExperimentPlan& plan);

// Extends AuditResult with the raw (un-bounded) curve when requested.
struct RunResult : AuditResult {
  ExperimentPlan plan;  // resolved
  std::vector<CurvePoint> curve_raw;
};

// Runs the distinguishing game plan.repeats times. The headline eps_emp is
// the mean over repeats; per-repeat values land in `repeats`, and the
// threshold, rate bounds, and curve come from the first repeat.
// Deterministic in (plan, seed) for any thread count.
RunResult run_audit(const ExperimentPlan& plan);

// One CSV row per (plan, repeat); failed plans carry an error note instead
// of aborting the sweep.
struct SweepRow {
  std::string plan_id;
  AuditModel threat = AuditModel::WorstCase;
  SamplerSpec sampler;
  MechanismParams params;
  std::int64_t observations = 0;
  int repeat_index = 0;
  double eps_emp = 0.0;
  double eps_theory = 0.0;
  double gap_ratio = 0.0;
  double alpha_bar = 1.0;
  double beta_bar = 1.0;
  double threshold = 0.0;
  std::uint64_t seed = 0;
  std::string error;
};

std::vector<SweepRow> sweep(std::span<const ExperimentPlan> plans);
std::vector<SweepRow> sweep_rows(const ExperimentPlan& resolved_plan,
                                 const RunResult& result, double eps_theory);

std::string results_csv_header();
void write_results_csv(std::ostream& out, std::span<const SweepRow> rows);
void write_curve_csv(std::ostream& out, std::span<const CurvePoint> points);

// Buffer-guess audit: one observation set, each guess scores only the first
// k batches of every epoch, and the best guess wins. CP validity across
// guesses is deliberately traded for repeat standard deviations.
struct PartialShuffleOutcome {
  ExperimentPlan plan;  // resolved
  std::vector<std::int64_t> guesses;
  std::vector<AuditResult> per_guess;           // aggregated over repeats
  std::vector<double> best_eps_per_repeat;      // max over guesses
  std::vector<std::int64_t> best_guess_per_repeat;
  double best_eps_mean = 0.0;
  double best_eps_std = 0.0;
};

std::vector<std::int64_t> default_buffer_guesses(std::int64_t steps_per_epoch);
PartialShuffleOutcome partial_shuffle_audit(const ExperimentPlan& plan,
                                            std::span<const std::int64_t> guesses);

// Same plan audited with and without the batch-then-shuffle bug.
struct BtsOutcome {
  RunResult with_bug;
  RunResult without_bug;
};
BtsOutcome bts_audit(const ExperimentPlan& plan);

}  // namespace shuffleaudit

#endif  // SHUFFLEAUDIT_HARNESS_HPP_
