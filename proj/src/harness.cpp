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
#include "shuffleaudit/harness.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>
#include <ostream>
#include <stdexcept>

#include "shuffleaudit/accountant.hpp"
#include "shuffleaudit/audit_kernels.hpp"
#include "shuffleaudit/score_buffer.hpp"
#include "shuffleaudit/scoring.hpp"

namespace shuffleaudit {

namespace {

constexpr std::int64_t kSpillBlockLength = std::int64_t{1} << 22;

void format_double(std::string& out, double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  out += buf;
}

double sample_std(std::span<const double> values, double mean) {
  if (values.size() < 2) return 0.0;
  double acc = 0.0;
  for (double v : values) acc += (v - mean) * (v - mean);
  return std::sqrt(acc / static_cast<double>(values.size() - 1));
}

double sample_mean(std::span<const double> values) {
  double acc = 0.0;
  for (double v : values) acc += v;
  return acc / static_cast<double>(values.size());
}

struct ThreadLimit {
  explicit ThreadLimit(int threads) {
    if (threads > 0) {
      previous = omp_get_max_threads();
      omp_set_num_threads(threads);
    }
  }
  ~ThreadLimit() {
    if (previous > 0) omp_set_num_threads(previous);
  }
  int previous = 0;
};

// Scores one repeat for one world into `out` (RAM path).
void score_world(const ExperimentPlan& plan,
                 std::span<const HypothesisPair> hypotheses, int world_bit,
                 int repeat, std::span<double* const> outputs) {
  const std::int64_t per_world = plan.observations / 2;
  KernelPlan kernel;
  kernel.params = plan.params;
  kernel.sampler = plan.sampler;
  kernel.model = plan.threat;
  kernel.world_bit = world_bit;
  kernel.null_worlds = plan.null_worlds;
  kernel.master_seed = plan.seed;
  // Distinct stream per (repeat, world, index).
  kernel.stream_offset =
      static_cast<std::uint64_t>(repeat) *
          static_cast<std::uint64_t>(plan.observations) +
      (world_bit == 1 ? 0 : static_cast<std::uint64_t>(per_world));
  generate_and_score_omp(kernel, hypotheses, per_world, outputs);
}

AuditResult estimate_repeat_ram(std::vector<double>& s1,
                                std::vector<double>& s0,
                                const EstimateOptions& opt) {
  std::sort(s1.begin(), s1.end());
  std::sort(s0.begin(), s0.end());
  SpanScoreStream d1(s1.data(), static_cast<std::int64_t>(s1.size()));
  SpanScoreStream d0(s0.data(), static_cast<std::int64_t>(s0.size()));
  return estimate_eps_sorted(d1, d0, static_cast<std::int64_t>(s1.size()), opt);
}

}  // namespace

void ExperimentPlan::validate() const {
  params.validate();
  sampler.validate(params.dataset_size(), params.batch_size);
  if (observations < 2 || observations % 2 != 0) {
    throw std::invalid_argument(
        "observations N must be even and >= 2 (N/2 games per world)");
  }
  if (repeats < 1) throw std::invalid_argument("repeats must be >= 1");
  if (!(confidence > 0.0 && confidence < 1.0)) {
    throw std::invalid_argument("confidence must lie in (0, 1)");
  }
  if (eps_target && !(*eps_target > 0.0)) {
    throw std::invalid_argument("eps_target must be > 0");
  }
  if (threat == AuditModel::BatchThenShuffle &&
      sampler.kind == SamplerKind::PartialShuffle) {
    throw std::invalid_argument(
        "batch_then_shuffle audits take full_shuffle or batch_then_shuffle "
        "samplers");
  }
}

double ExperimentPlan::poisson_q() const {
  return 1.0 / static_cast<double>(params.steps_per_epoch);
}

std::int64_t ExperimentPlan::poisson_steps() const {
  return params.steps_per_epoch * params.epochs;
}

ExperimentPlan resolve_plan(const ExperimentPlan& plan) {
  plan.validate();
  ExperimentPlan resolved = plan;
  if (plan.eps_target) {
    resolved.params.noise_multiplier = calibrate_sigma(
        *plan.eps_target, plan.poisson_q(), plan.poisson_steps(),
        plan.params.delta);
  }
  if (!(resolved.params.noise_multiplier > 0.0)) {
    throw std::invalid_argument(
        "audits need noise_multiplier > 0 (or eps_target to calibrate one)");
  }
  return resolved;
}

ExperimentPlan plan_from_config(const FlatConfig& config) {
  static const std::set<std::string> kKeys = {
      "plan_id", "batch_size", "steps_per_epoch", "epochs",
      "noise_multiplier", "clip_norm", "delta", "sampler", "buffer_size",
      "threat", "observations", "repeats", "confidence", "seed",
      "eps_target", "null_worlds", "emit_raw_curve", "spill_threshold",
      "spill_dir", "max_curve_points", "threads",
      // consumed by the CLI, tolerated here so manifests round-trip
      "output_dir", "guesses", "dump_observations", "dump_count"};
  config.require_known_keys(kKeys);

  ExperimentPlan plan;
  plan.plan_id = config.get_string("plan_id", plan.plan_id);
  plan.params.batch_size = config.get_int("batch_size", plan.params.batch_size);
  plan.params.steps_per_epoch =
      config.get_int("steps_per_epoch", plan.params.steps_per_epoch);
  plan.params.epochs = config.get_int("epochs", plan.params.epochs);
  plan.params.noise_multiplier =
      config.get_double("noise_multiplier", plan.params.noise_multiplier);
  plan.params.clip_norm = config.get_double("clip_norm", plan.params.clip_norm);
  plan.params.delta = config.get_double("delta", plan.params.delta);
  plan.sampler.kind =
      sampler_kind_from_string(config.get_string("sampler", "full_shuffle"));
  plan.sampler.buffer_size = config.get_int("buffer_size", 0);
  plan.threat =
      audit_model_from_string(config.get_string("threat", "worst_case"));
  plan.observations = config.get_int("observations", plan.observations);
  plan.repeats = static_cast<int>(config.get_int("repeats", plan.repeats));
  plan.confidence = config.get_double("confidence", plan.confidence);
  plan.seed = config.get_uint("seed", plan.seed);
  plan.eps_target = config.get_optional_double("eps_target");
  plan.null_worlds = config.get_bool("null_worlds", false);
  plan.emit_raw_curve = config.get_bool("emit_raw_curve", false);
  plan.spill_threshold =
      config.get_int("spill_threshold", plan.spill_threshold);
  plan.spill_dir = config.get_string("spill_dir", "");
  plan.max_curve_points =
      config.get_int("max_curve_points", plan.max_curve_points);
  plan.threads = static_cast<int>(config.get_int("threads", 0));
  plan.validate();
  return plan;
}

FlatConfig plan_to_config(const ExperimentPlan& plan) {
  FlatConfig config;
  const auto set_double = [&](const char* key, double v) {
    std::string s;
    format_double(s, v);
    config.set(key, s);
  };
  config.set("plan_id", plan.plan_id);
  config.set("batch_size", std::to_string(plan.params.batch_size));
  config.set("steps_per_epoch", std::to_string(plan.params.steps_per_epoch));
  config.set("epochs", std::to_string(plan.params.epochs));
  set_double("noise_multiplier", plan.params.noise_multiplier);
  set_double("clip_norm", plan.params.clip_norm);
  set_double("delta", plan.params.delta);
  config.set("sampler", to_string(plan.sampler.kind));
  if (plan.sampler.kind == SamplerKind::PartialShuffle) {
    config.set("buffer_size", std::to_string(plan.sampler.buffer_size));
  }
  config.set("threat", to_string(plan.threat));
  config.set("observations", std::to_string(plan.observations));
  config.set("repeats", std::to_string(plan.repeats));
  set_double("confidence", plan.confidence);
  config.set("seed", std::to_string(plan.seed));
  if (plan.eps_target) set_double("eps_target", *plan.eps_target);
  if (plan.null_worlds) config.set("null_worlds", "true");
  if (plan.emit_raw_curve) config.set("emit_raw_curve", "true");
  config.set("spill_threshold", std::to_string(plan.spill_threshold));
  if (!plan.spill_dir.empty()) config.set("spill_dir", plan.spill_dir);
  config.set("max_curve_points", std::to_string(plan.max_curve_points));
  if (plan.threads > 0) config.set("threads", std::to_string(plan.threads));
  return config;
}

RunResult run_audit(const ExperimentPlan& input_plan) {
  const ExperimentPlan plan = resolve_plan(input_plan);
  ThreadLimit limit(plan.threads);

  const std::int64_t per_world = plan.observations / 2;
  const HypothesisPair hp =
      hypothesis_for(plan.threat, plan.params, plan.params.steps_per_epoch);

  EstimateOptions opt;
  opt.significance = 1.0 - plan.confidence;
  opt.delta = plan.params.delta;
  opt.max_curve_points = plan.max_curve_points;
  const bool spill = plan.observations > plan.spill_threshold;
  std::shared_ptr<const CpUpperTable> table;
  if (per_world <= opt.cp_table_limit) {
    table = std::make_shared<CpUpperTable>(per_world, plan.confidence);
    opt.shared_table = table;
  }

  RunResult out;
  out.plan = plan;
  out.confidence = plan.confidence;
  out.delta = plan.params.delta;

  std::vector<double> eps_per_repeat;
  for (int repeat = 0; repeat < plan.repeats; ++repeat) {
    opt.collect_curve = repeat == 0;
    AuditResult result;
    if (!spill) {
      std::vector<double> s1(static_cast<std::size_t>(per_world));
      std::vector<double> s0(static_cast<std::size_t>(per_world));
      double* out1[1] = {s1.data()};
      double* out0[1] = {s0.data()};
      score_world(plan, {&hp, 1}, 1, repeat, out1);
      score_world(plan, {&hp, 1}, 0, repeat, out0);
      if (plan.emit_raw_curve && repeat == 0) {
        ScoreSet set{std::move(s1), std::move(s0)};
        EstimateOptions raw = opt;
        raw.use_cp = false;
        raw.collect_curve = true;
        out.curve_raw = estimate_eps(set, raw).curve;
        s1 = std::move(set.scores_d1);
        s0 = std::move(set.scores_d0);
      }
      result = estimate_repeat_ram(s1, s0, opt);
    } else {
      SpillScoreSink sink1(plan.spill_dir);
      SpillScoreSink sink0(plan.spill_dir);
      std::vector<double> block(
          static_cast<std::size_t>(std::min(per_world, kSpillBlockLength)));
      for (int world = 1; world >= 0; --world) {
        SpillScoreSink& sink = world == 1 ? sink1 : sink0;
        for (std::int64_t base = 0; base < per_world;
             base += kSpillBlockLength) {
          const std::int64_t len =
              std::min<std::int64_t>(kSpillBlockLength, per_world - base);
          KernelPlan kernel;
          kernel.params = plan.params;
          kernel.sampler = plan.sampler;
          kernel.model = plan.threat;
          kernel.world_bit = world;
          kernel.null_worlds = plan.null_worlds;
          kernel.master_seed = plan.seed;
          kernel.stream_offset =
              static_cast<std::uint64_t>(repeat) *
                  static_cast<std::uint64_t>(plan.observations) +
              (world == 1 ? 0 : static_cast<std::uint64_t>(per_world)) +
              static_cast<std::uint64_t>(base);
          generate_and_score_omp(kernel, hp,
                                 std::span<double>(block.data(),
                                                   static_cast<std::size_t>(len)));
          sink.append({block.data(), static_cast<std::size_t>(len)});
        }
        sink.finalize();
      }
      auto stream1 = sink1.sorted_stream();
      auto stream0 = sink0.sorted_stream();
      result = estimate_eps_sorted(*stream1, *stream0, per_world, opt);
      if (plan.emit_raw_curve && repeat == 0) {
        EstimateOptions raw = opt;
        raw.use_cp = false;
        raw.collect_curve = true;
        auto r1 = sink1.sorted_stream();
        auto r0 = sink0.sorted_stream();
        out.curve_raw = estimate_eps_sorted(*r1, *r0, per_world, raw).curve;
      }
    }
    eps_per_repeat.push_back(result.eps_emp);
    if (repeat == 0) {
      out.threshold = result.threshold;
      out.alpha_bar = result.alpha_bar;
      out.beta_bar = result.beta_bar;
      out.eps_capped = result.eps_capped;
      out.curve = std::move(result.curve);
    }
  }
  out.repeats = std::move(eps_per_repeat);
  out.eps_emp = sample_mean(out.repeats);
  out.repeat_std = sample_std(out.repeats, out.eps_emp);
  return out;
}

std::vector<SweepRow> sweep_rows(const ExperimentPlan& plan,
                                 const RunResult& result, double eps_theory) {
  std::vector<SweepRow> rows;
  for (std::size_t r = 0; r < result.repeats.size(); ++r) {
    SweepRow row;
    row.plan_id = plan.plan_id;
    row.threat = plan.threat;
    row.sampler = plan.sampler;
    row.params = plan.params;
    row.observations = plan.observations;
    row.repeat_index = static_cast<int>(r);
    row.eps_emp = result.repeats[r];
    row.eps_theory = eps_theory;
    row.gap_ratio = eps_theory > 0.0 ? result.repeats[r] / eps_theory : 0.0;
    row.alpha_bar = result.alpha_bar;
    row.beta_bar = result.beta_bar;
    row.threshold = result.threshold;
    row.seed = plan.seed;
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<SweepRow> sweep(std::span<const ExperimentPlan> plans) {
  if (plans.empty()) throw std::invalid_argument("sweep needs at least one plan");
  std::vector<SweepRow> rows;
  for (const ExperimentPlan& plan : plans) {
    try {
      const RunResult result = run_audit(plan);
      const double eps_theory = epsilon_at_delta(
          {result.plan.params.noise_multiplier, result.plan.poisson_q(),
           result.plan.poisson_steps(), result.plan.params.delta});
      auto plan_rows = sweep_rows(result.plan, result, eps_theory);
      rows.insert(rows.end(), plan_rows.begin(), plan_rows.end());
    } catch (const std::exception& e) {
      SweepRow row;
      row.plan_id = plan.plan_id;
      row.threat = plan.threat;
      row.sampler = plan.sampler;
      row.params = plan.params;
      row.observations = plan.observations;
      row.seed = plan.seed;
      row.error = e.what();
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

std::string results_csv_header() {
  return "plan_id,threat,sampler,B,T,E,sigma,delta,N,repeat,eps_emp,"
         "eps_theory,gap_ratio,alpha_bar,beta_bar,threshold,seed";
}

void write_results_csv(std::ostream& out, std::span<const SweepRow> rows) {
  out << results_csv_header() << "\n";
  for (const SweepRow& row : rows) {
    std::string line;
    line += row.plan_id;
    line += ',';
    line += to_string(row.threat);
    line += ',';
    line += to_string(row.sampler.kind);
    if (row.sampler.kind == SamplerKind::PartialShuffle) {
      line += "(K=" + std::to_string(row.sampler.buffer_size) + ")";
    }
    line += ',';
    line += std::to_string(row.params.batch_size);
    line += ',';
    line += std::to_string(row.params.steps_per_epoch);
    line += ',';
    line += std::to_string(row.params.epochs);
    line += ',';
    format_double(line, row.params.noise_multiplier);
    line += ',';
    format_double(line, row.params.delta);
    line += ',';
    line += std::to_string(row.observations);
    line += ',';
    if (row.error.empty()) {
      line += std::to_string(row.repeat_index);
      line += ',';
      format_double(line, row.eps_emp);
      line += ',';
      format_double(line, row.eps_theory);
      line += ',';
      format_double(line, row.gap_ratio);
      line += ',';
      format_double(line, row.alpha_bar);
      line += ',';
      format_double(line, row.beta_bar);
      line += ',';
      format_double(line, row.threshold);
    } else {
      // Keep the column count; the error note replaces the repeat index.
      line += "error:" + row.error + ",,,,,,";
    }
    line += ',';
    line += std::to_string(row.seed);
    out << line << "\n";
  }
}

void write_curve_csv(std::ostream& out, std::span<const CurvePoint> points) {
  out << "threshold,fpr_raw,fnr_raw,fpr_upper,fnr_upper,eps_emp\n";
  for (const CurvePoint& p : points) {
    std::string line;
    format_double(line, p.threshold);
    line += ',';
    format_double(line, p.fpr_raw);
    line += ',';
    format_double(line, p.fnr_raw);
    line += ',';
    format_double(line, p.fpr_upper);
    line += ',';
    format_double(line, p.fnr_upper);
    line += ',';
    format_double(line, p.eps);
    out << line << "\n";
  }
}

std::vector<std::int64_t> default_buffer_guesses(std::int64_t steps_per_epoch) {
  // k = 1 plus multiples of 10 up to the batch count.
  std::vector<std::int64_t> guesses = {1};
  for (std::int64_t k = 10; k <= std::min<std::int64_t>(100, steps_per_epoch);
       k += 10) {
    guesses.push_back(k);
  }
  if (guesses.back() != steps_per_epoch && steps_per_epoch > 100) {
    guesses.push_back(steps_per_epoch);
  }
  return guesses;
}

PartialShuffleOutcome partial_shuffle_audit(
    const ExperimentPlan& input_plan, std::span<const std::int64_t> guesses) {
  if (input_plan.threat != AuditModel::PartiallyInformed) {
    throw std::invalid_argument(
        "partial shuffle audits use the partially_informed threat model");
  }
  if (input_plan.sampler.kind == SamplerKind::BatchThenShuffle) {
    throw std::invalid_argument(
        "partial shuffle audits take full_shuffle or partial_shuffle samplers");
  }
  if (guesses.empty()) {
    throw std::invalid_argument("at least one buffer guess required");
  }
  const ExperimentPlan plan = resolve_plan(input_plan);
  ThreadLimit limit(plan.threads);
  for (std::int64_t k : guesses) {
    if (k < 1 || k > plan.params.steps_per_epoch) {
      throw std::invalid_argument(
          "buffer guess k must lie in [1, steps_per_epoch]");
    }
  }

  const std::int64_t per_world = plan.observations / 2;
  const std::size_t num_guesses = guesses.size();
  std::vector<HypothesisPair> hypotheses;
  hypotheses.reserve(num_guesses);
  for (std::int64_t k : guesses) {
    hypotheses.push_back(
        hypothesis_for(AuditModel::PartiallyInformed, plan.params, k));
  }

  EstimateOptions opt;
  opt.significance = 1.0 - plan.confidence;
  opt.delta = plan.params.delta;
  opt.max_curve_points = plan.max_curve_points;
  std::shared_ptr<const CpUpperTable> table;
  if (per_world <= opt.cp_table_limit) {
    table = std::make_shared<CpUpperTable>(per_world, plan.confidence);
    opt.shared_table = table;
  }

  PartialShuffleOutcome outcome;
  outcome.plan = plan;
  outcome.guesses.assign(guesses.begin(), guesses.end());
  std::vector<std::vector<double>> eps_by_guess(num_guesses);

  std::vector<std::vector<double>> scores1(num_guesses);
  std::vector<std::vector<double>> scores0(num_guesses);
  std::vector<double*> ptr1(num_guesses), ptr0(num_guesses);
  for (std::size_t g = 0; g < num_guesses; ++g) {
    scores1[g].resize(static_cast<std::size_t>(per_world));
    scores0[g].resize(static_cast<std::size_t>(per_world));
    ptr1[g] = scores1[g].data();
    ptr0[g] = scores0[g].data();
  }
  std::vector<AuditResult> first_repeat(num_guesses);

  for (int repeat = 0; repeat < plan.repeats; ++repeat) {
    score_world(plan, hypotheses, 1, repeat, ptr1);
    score_world(plan, hypotheses, 0, repeat, ptr0);
    double best_eps = -1.0;
    std::int64_t best_guess = guesses[0];
    for (std::size_t g = 0; g < num_guesses; ++g) {
      opt.collect_curve = repeat == 0;
      std::vector<double> s1 = scores1[g];
      std::vector<double> s0 = scores0[g];
      AuditResult result = estimate_repeat_ram(s1, s0, opt);
      eps_by_guess[g].push_back(result.eps_emp);
      if (result.eps_emp > best_eps) {
        best_eps = result.eps_emp;
        best_guess = guesses[g];
      }
      if (repeat == 0) first_repeat[g] = std::move(result);
    }
    outcome.best_eps_per_repeat.push_back(best_eps);
    outcome.best_guess_per_repeat.push_back(best_guess);
  }

  outcome.per_guess.resize(num_guesses);
  for (std::size_t g = 0; g < num_guesses; ++g) {
    AuditResult& agg = outcome.per_guess[g];
    agg = std::move(first_repeat[g]);
    agg.repeats = std::move(eps_by_guess[g]);
    agg.eps_emp = sample_mean(agg.repeats);
    agg.repeat_std = sample_std(agg.repeats, agg.eps_emp);
  }
  outcome.best_eps_mean = sample_mean(outcome.best_eps_per_repeat);
  outcome.best_eps_std =
      sample_std(outcome.best_eps_per_repeat, outcome.best_eps_mean);
  return outcome;
}

BtsOutcome bts_audit(const ExperimentPlan& input_plan) {
  if (input_plan.threat != AuditModel::BatchThenShuffle) {
    throw std::invalid_argument(
        "bts_audit requires the batch_then_shuffle threat model");
  }
  const ExperimentPlan resolved = resolve_plan(input_plan);
  ExperimentPlan run = resolved;
  run.eps_target.reset();  // sigma already resolved; do not recalibrate
  BtsOutcome outcome;
  run.sampler = SamplerSpec::batch_then_shuffle();
  outcome.with_bug = run_audit(run);
  run.sampler = SamplerSpec::full_shuffle();
  outcome.without_bug = run_audit(run);
  outcome.with_bug.plan.eps_target = resolved.eps_target;
  outcome.without_bug.plan.eps_target = resolved.eps_target;
  return outcome;
}

}  // namespace shuffleaudit
