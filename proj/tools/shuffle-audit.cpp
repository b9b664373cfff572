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
// Command-line front end: accounting, calibration, audits, sweeps, shuffle
// bug audits, and trade-off curve export. Every run writes its results plus
// a run_manifest.json that can be fed back as --config to reproduce the
// exact same outputs.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "shuffleaudit/accountant.hpp"
#include "shuffleaudit/config.hpp"
#include "shuffleaudit/harness.hpp"
#include "shuffleaudit/mechanism.hpp"
#include "shuffleaudit/rng.hpp"

#ifndef SHUFFLE_AUDIT_GIT_REVISION
#define SHUFFLE_AUDIT_GIT_REVISION "unknown"
#endif

namespace {

using nlohmann::ordered_json;
using namespace shuffleaudit;

std::string format_g(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

struct OutputContext {
  std::filesystem::path dir;
  std::vector<std::string> outputs;
  std::chrono::steady_clock::time_point started =
      std::chrono::steady_clock::now();

  std::filesystem::path path(const std::string& name) {
    outputs.push_back(name);
    return dir / name;
  }
};

OutputContext make_output_dir(const std::string& flag_value) {
  std::string dir = flag_value;
  if (dir.empty()) {
    if (const char* env = std::getenv("SHUFFLE_AUDIT_OUTDIR")) dir = env;
  }
  if (dir.empty()) dir = ".";
  OutputContext ctx;
  ctx.dir = dir;
  std::filesystem::create_directories(ctx.dir);
  return ctx;
}

void write_manifest(OutputContext& ctx, const std::string& subcommand,
                    const FlatConfig& config, std::uint64_t seed) {
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                    ctx.started)
          .count();
  ordered_json manifest;
  manifest["subcommand"] = subcommand;
  manifest["master_seed"] = seed;
  manifest["git_revision"] = SHUFFLE_AUDIT_GIT_REVISION;
  manifest["wall_time_sec"] = wall;
  ordered_json cfg = ordered_json::object();
  for (const auto& [key, value] : config.entries()) cfg[key] = value;
  manifest["config"] = cfg;
  manifest["outputs"] = ctx.outputs;
  std::ofstream out(ctx.dir / "run_manifest.json");
  out << manifest.dump(2) << "\n";
}

ordered_json result_to_json(const RunResult& result) {
  ordered_json j;
  j["plan_id"] = result.plan.plan_id;
  j["threat"] = to_string(result.plan.threat);
  j["sampler"] = to_string(result.plan.sampler.kind);
  if (result.plan.sampler.kind == SamplerKind::PartialShuffle) {
    j["buffer_size"] = result.plan.sampler.buffer_size;
  }
  j["batch_size"] = result.plan.params.batch_size;
  j["steps_per_epoch"] = result.plan.params.steps_per_epoch;
  j["epochs"] = result.plan.params.epochs;
  j["noise_multiplier"] = result.plan.params.noise_multiplier;
  j["delta"] = result.plan.params.delta;
  j["observations"] = result.plan.observations;
  j["seed"] = result.plan.seed;
  if (result.plan.eps_target) j["eps_target"] = *result.plan.eps_target;
  j["idealized"] = true;  // surrogate generators, no natural-gradient bias
  j["eps_emp_mean"] = result.eps_emp;
  j["eps_emp_std"] = result.repeat_std;
  j["eps_emp_per_repeat"] = result.repeats;
  j["threshold"] = result.threshold;
  j["alpha_bar"] = result.alpha_bar;
  j["beta_bar"] = result.beta_bar;
  j["confidence"] = result.confidence;
  j["eps_capped"] = result.eps_capped;
  return j;
}

FlatConfig load_config(const std::string& config_path,
                       const std::vector<std::string>& overrides) {
  FlatConfig config;
  if (!config_path.empty()) config = FlatConfig::load(config_path);
  config.apply_overrides(overrides);
  return config;
}

void apply_common_flags(FlatConfig& config, std::uint64_t seed_flag,
                        bool seed_set, int threads_flag) {
  if (seed_set) config.set("seed", std::to_string(seed_flag));
  if (threads_flag > 0) config.set("threads", std::to_string(threads_flag));
}

// Splits "a,b,c" into trimmed pieces.
std::vector<std::string> split_list(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, sep)) {
    const auto b = item.find_first_not_of(" \t");
    if (b == std::string::npos) continue;
    const auto e = item.find_last_not_of(" \t");
    out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

// Plans file: flat configs separated by lines holding only "---".
std::vector<FlatConfig> load_plans_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open plans file: " + path);
  std::vector<FlatConfig> plans;
  std::string section, line;
  const auto flush = [&] {
    if (section.find_first_not_of(" \t\r\n") == std::string::npos) return;
    plans.push_back(FlatConfig::parse(section));
    section.clear();
  };
  while (std::getline(in, line)) {
    if (line == "---") {
      flush();
    } else {
      section += line;
      section += '\n';
    }
  }
  flush();
  return plans;
}

// Expands "T=100|1000;noise_multiplier=0.5|1.0" over a base config into the
// cartesian product of explicit plans, ids suffixed -000, -001, ...
std::vector<FlatConfig> expand_grid(const FlatConfig& base,
                                    const std::string& grid_spec) {
  std::vector<std::pair<std::string, std::vector<std::string>>> axes;
  for (const std::string& axis : split_list(grid_spec, ';')) {
    const auto eq = axis.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("--expand axis must look like key=v1|v2: " +
                                  axis);
    }
    const std::string key = axis.substr(0, eq);
    std::vector<std::string> values = split_list(axis.substr(eq + 1), '|');
    if (values.empty()) {
      throw std::invalid_argument("--expand axis has no values: " + axis);
    }
    axes.emplace_back(key, std::move(values));
  }
  if (axes.empty()) throw std::invalid_argument("--expand spec is empty");

  std::vector<FlatConfig> plans = {base};
  for (const auto& [key, values] : axes) {
    std::vector<FlatConfig> next;
    for (const FlatConfig& plan : plans) {
      for (const std::string& value : values) {
        FlatConfig copy = plan;
        copy.set(key, value);
        next.push_back(std::move(copy));
      }
    }
    plans = std::move(next);
  }
  const std::string base_id = base.get_string("plan_id", "plan");
  for (std::size_t i = 0; i < plans.size(); ++i) {
    char suffix[8];
    std::snprintf(suffix, sizeof(suffix), "-%03zu", i);
    plans[i].set("plan_id", base_id + suffix);
  }
  return plans;
}

void write_plans_file(const std::string& path,
                      const std::vector<FlatConfig>& plans) {
  std::ofstream out(path);
  for (std::size_t i = 0; i < plans.size(); ++i) {
    if (i > 0) out << "---\n";
    for (const auto& [key, value] : plans[i].entries()) {
      out << key << " = " << value << "\n";
    }
  }
}

int run_accountant(double sigma, double q, std::int64_t steps, double delta,
                   int curve_points, const std::string& curve_out,
                   bool with_rdp) {
  const PoissonAccountantParams params{sigma, q, steps, delta};
  const AccountantReport report = epsilon_report(params);
  std::cout << "sigma,q,steps,delta,epsilon,truncation_mass\n"
            << format_g(sigma) << ',' << format_g(q) << ',' << steps << ','
            << format_g(delta) << ',' << format_g(report.epsilon) << ','
            << format_g(report.truncation_mass) << "\n";
  std::cerr << "grid_points=" << report.grid_points
            << " inf_mass=" << format_g(report.inf_mass) << "\n";
  if (with_rdp) {
    const auto orders = default_rdp_orders();
    std::cerr << "rdp_epsilon=" << format_g(rdp_epsilon(params, orders))
              << " (independent upper-bound cross-check)\n";
  }
  if (curve_points > 0 && !curve_out.empty()) {
    PrivacyLossDistribution pld = compose(
        pld_single_step(sigma, q, Adjacency::Remove), steps);
    std::ofstream out(curve_out);
    out << "epsilon,delta_upper\n";
    const double max_eps = std::max(1.0, 2.0 * report.epsilon);
    for (int i = 0; i < curve_points; ++i) {
      const double eps = max_eps * i / (curve_points - 1);
      out << format_g(eps) << ','
          << format_g(pld.delta_at_epsilon(eps) + pld.truncation_mass) << "\n";
    }
  }
  return 0;
}

int run_tradeoff(double eps, double delta, int points,
                 const std::string& out_path) {
  std::ofstream file;
  std::ostream* out = &std::cout;
  if (!out_path.empty()) {
    file.open(out_path);
    out = &file;
  }
  *out << "alpha,beta\n";
  for (int i = 0; i < points; ++i) {
    const double alpha =
        points == 1 ? 0.0 : static_cast<double>(i) / (points - 1);
    *out << format_g(alpha) << ',' << format_g(tradeoff_epsdelta(eps, delta, alpha))
         << "\n";
  }
  return 0;
}

int run_audit_command(const FlatConfig& config, OutputContext& ctx,
                      bool emit_curves, const std::string& dump_path,
                      std::int64_t dump_count) {
  ExperimentPlan plan = plan_from_config(config);
  plan.emit_raw_curve = emit_curves;
  const RunResult result = run_audit(plan);

  const double eps_theory = epsilon_at_delta(
      {result.plan.params.noise_multiplier, result.plan.poisson_q(),
       result.plan.poisson_steps(), result.plan.params.delta});
  const auto rows = sweep_rows(result.plan, result, eps_theory);
  {
    std::ofstream out(ctx.path("results.csv"));
    write_results_csv(out, rows);
  }
  {
    ordered_json j = result_to_json(result);
    j["eps_theory"] = eps_theory;
    j["gap_ratio"] = eps_theory > 0 ? result.eps_emp / eps_theory : 0.0;
    std::ofstream out(ctx.path("result.json"));
    out << j.dump(2) << "\n";
  }
  {
    std::ofstream out(ctx.path("curve_cp.csv"));
    write_curve_csv(out, result.curve);
  }
  if (emit_curves) {
    std::ofstream out(ctx.path("curve_raw.csv"));
    write_curve_csv(out, result.curve_raw);
  }
  if (!dump_path.empty() && dump_count > 0) {
    // First dump_count observation matrices per world, repeat 0, for
    // offline re-scoring.
    std::ofstream out(ctx.dir / dump_path, std::ios::binary);
    ctx.outputs.push_back(dump_path);
    for (int world = 1; world >= 0; --world) {
      for (std::int64_t i = 0; i < dump_count; ++i) {
        const std::uint64_t offset =
            world == 1 ? 0
                       : static_cast<std::uint64_t>(result.plan.observations / 2);
        RandomStream stream(
            {result.plan.seed, offset + static_cast<std::uint64_t>(i)});
        const int gen_world = result.plan.null_worlds ? 0 : world;
        if (result.plan.threat == AuditModel::BatchThenShuffle) {
          write_observation(
              out, bts_observations(result.plan.params, gen_world,
                                    result.plan.sampler.kind ==
                                        SamplerKind::BatchThenShuffle,
                                    stream));
        } else {
          ThreatModel tm = ThreatModel::WorstCase;
          if (result.plan.threat == AuditModel::Natural) tm = ThreatModel::Natural;
          if (result.plan.threat == AuditModel::PartiallyInformed) {
            tm = ThreatModel::PartiallyInformed;
          }
          write_observation(
              out, surrogate_observations(tm, result.plan.params,
                                          result.plan.sampler, gen_world,
                                          stream));
        }
      }
    }
  }
  std::cout << "plan " << result.plan.plan_id
            << ": eps_emp mean=" << format_g(result.eps_emp)
            << " std=" << format_g(result.repeat_std)
            << " theory(Poisson)=" << format_g(eps_theory) << "\n";
  return 0;
}

int run_sweep_command(const std::vector<FlatConfig>& plan_configs,
                      OutputContext& ctx, const std::string& recipe) {
  std::vector<ExperimentPlan> plans;
  for (const FlatConfig& cfg : plan_configs) {
    plans.push_back(plan_from_config(cfg));
  }
  const std::vector<SweepRow> rows = sweep(plans);

  const std::string results_name =
      recipe.empty() ? "results.csv" : recipe + "_results.csv";
  {
    std::ofstream out(ctx.path(results_name));
    write_results_csv(out, rows);
  }
  // Partial failures land in a warnings file next to the results.
  std::vector<std::string> warnings;
  for (const SweepRow& row : rows) {
    if (!row.error.empty()) {
      warnings.push_back(row.plan_id + ": " + row.error);
    }
  }
  if (!warnings.empty()) {
    std::ofstream out(ctx.path("warnings.txt"));
    for (const auto& w : warnings) out << w << "\n";
  }
  ordered_json j = ordered_json::array();
  for (const SweepRow& row : rows) {
    ordered_json item;
    item["plan_id"] = row.plan_id;
    item["repeat"] = row.repeat_index;
    item["eps_emp"] = row.eps_emp;
    item["eps_theory"] = row.eps_theory;
    item["gap_ratio"] = row.gap_ratio;
    if (!row.error.empty()) item["error"] = row.error;
    j.push_back(item);
  }
  std::ofstream out(ctx.path("results.json"));
  out << j.dump(2) << "\n";
  std::cout << "sweep: " << plans.size() << " plans, " << rows.size()
            << " rows, " << warnings.size() << " failures\n";
  return 0;
}

int run_partial_shuffle_command(const FlatConfig& config, OutputContext& ctx,
                                const std::string& guesses_flag) {
  ExperimentPlan plan = plan_from_config(config);
  std::vector<std::int64_t> guesses;
  const std::string guess_source =
      !guesses_flag.empty() ? guesses_flag : config.get_string("guesses", "");
  if (!guess_source.empty()) {
    for (const std::string& g : split_list(guess_source, ',')) {
      guesses.push_back(std::stoll(g));
    }
  } else {
    guesses = default_buffer_guesses(plan.params.steps_per_epoch);
  }
  const PartialShuffleOutcome outcome = partial_shuffle_audit(plan, guesses);

  {
    std::ofstream out(ctx.path("partial_shuffle.csv"));
    out << "plan_id,sampler,buffer_K,guess_k,repeat,eps_emp\n";
    for (std::size_t g = 0; g < outcome.guesses.size(); ++g) {
      const AuditResult& res = outcome.per_guess[g];
      for (std::size_t r = 0; r < res.repeats.size(); ++r) {
        out << outcome.plan.plan_id << ','
            << to_string(outcome.plan.sampler.kind) << ','
            << outcome.plan.sampler.buffer_size << ',' << outcome.guesses[g]
            << ',' << r << ',' << format_g(res.repeats[r]) << "\n";
      }
    }
  }
  ordered_json j;
  j["plan_id"] = outcome.plan.plan_id;
  j["noise_multiplier"] = outcome.plan.params.noise_multiplier;
  j["guesses"] = outcome.guesses;
  j["best_eps_mean"] = outcome.best_eps_mean;
  j["best_eps_std"] = outcome.best_eps_std;
  j["best_eps_per_repeat"] = outcome.best_eps_per_repeat;
  j["best_guess_per_repeat"] = outcome.best_guess_per_repeat;
  std::ofstream out(ctx.path("partial_shuffle.json"));
  out << j.dump(2) << "\n";
  std::cout << "partial shuffle audit: best eps_emp mean="
            << format_g(outcome.best_eps_mean)
            << " std=" << format_g(outcome.best_eps_std) << "\n";
  return 0;
}

int run_bts_command(const FlatConfig& config, OutputContext& ctx) {
  ExperimentPlan plan = plan_from_config(config);
  plan.threat = AuditModel::BatchThenShuffle;
  const BtsOutcome outcome = bts_audit(plan);
  {
    std::ofstream out(ctx.path("batch_then_shuffle.csv"));
    out << "plan_id,variant,repeat,eps_emp\n";
    const auto emit = [&](const char* variant, const RunResult& res) {
      for (std::size_t r = 0; r < res.repeats.size(); ++r) {
        out << plan.plan_id << ',' << variant << ',' << r << ','
            << format_g(res.repeats[r]) << "\n";
      }
    };
    emit("with_bug", outcome.with_bug);
    emit("without_bug", outcome.without_bug);
  }
  ordered_json j;
  j["plan_id"] = plan.plan_id;
  j["noise_multiplier"] = outcome.with_bug.plan.params.noise_multiplier;
  j["with_bug"] = result_to_json(outcome.with_bug);
  j["without_bug"] = result_to_json(outcome.without_bug);
  std::ofstream out(ctx.path("batch_then_shuffle.json"));
  out << j.dump(2) << "\n";
  std::cout << "batch-then-shuffle audit: with_bug="
            << format_g(outcome.with_bug.eps_emp)
            << " without_bug=" << format_g(outcome.without_bug.eps_emp) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Empirical privacy audits for shuffled batched Gaussian "
               "releases, with a Poisson sub-sampling accountant baseline"};
  app.require_subcommand(1);

  std::string config_path, output_dir, curve_out, dump_path, plans_path;
  std::string expand_spec, emit_plans_path, guesses_flag, recipe;
  std::vector<std::string> overrides;
  std::uint64_t seed_flag = 0;
  bool seed_set = false;
  int threads_flag = 0;
  bool emit_curves = false, with_rdp = false;
  std::int64_t dump_count = 0;
  double sigma = 1.0, q = 0.01, delta = 1e-5, eps = 1.0, eps_target = 1.0;
  double tol = 1e-3;
  std::int64_t steps = 100;
  int points = 101, curve_points = 0;

  const auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "flat key=value config file");
    cmd->add_option("--set", overrides, "config overrides (key=value)");
    cmd->add_option("--output-dir", output_dir,
                    "output directory (default $SHUFFLE_AUDIT_OUTDIR or .)");
    cmd->add_option("--threads", threads_flag, "OpenMP worker count");
    cmd->add_option("--seed", seed_flag, "master seed")
        ->each([&](const std::string&) { seed_set = true; });
  };

  CLI::App* acc = app.add_subcommand(
      "accountant", "theoretical (eps, delta) of the sub-sampled Gaussian");
  acc->add_option("--sigma", sigma, "noise multiplier")->required();
  acc->add_option("--q", q, "sampling rate B/n")->required();
  acc->add_option("--steps", steps, "total composition steps")->required();
  acc->add_option("--delta", delta, "privacy delta");
  acc->add_option("--curve-points", curve_points, "delta(eps) curve samples");
  acc->add_option("--curve-out", curve_out, "curve CSV path");
  acc->add_flag("--rdp", with_rdp, "print the RDP cross-check");

  CLI::App* cal = app.add_subcommand(
      "calibrate", "noise multiplier hitting a target epsilon");
  cal->add_option("--eps-target", eps_target, "target epsilon")->required();
  cal->add_option("--q", q, "sampling rate B/n")->required();
  cal->add_option("--steps", steps, "total composition steps")->required();
  cal->add_option("--delta", delta, "privacy delta");
  cal->add_option("--tol", tol, "epsilon tolerance");

  CLI::App* aud = app.add_subcommand("audit", "run one audit plan");
  add_common(aud);
  aud->add_flag("--emit-curves", emit_curves,
                "also export the raw (un-bounded) trade-off curve");
  aud->add_option("--dump-observations", dump_path,
                  "binary observation dump file (relative to output dir)");
  aud->add_option("--dump-count", dump_count,
                  "matrices per world to dump (repeat 0)");

  CLI::App* swp = app.add_subcommand("sweep", "run a list of audit plans");
  add_common(swp);
  swp->add_option("--plans", plans_path,
                  "plans file (flat configs separated by --- lines)");
  swp->add_option("--expand", expand_spec,
                  "grid spec key=v1|v2;key2=w1|w2 expanded over --config");
  swp->add_option("--emit-plans", emit_plans_path,
                  "write the expanded plan list to this file");
  swp->add_option("--recipe", recipe,
                  "label results file as <recipe>_results.csv");

  CLI::App* dps = app.add_subcommand(
      "debug-partial-shuffle", "buffer-guess audit of partial shuffling");
  add_common(dps);
  dps->add_option("--guesses", guesses_flag,
                  "comma-separated batch-count guesses (default 1,10,...,100)");

  CLI::App* dbts = app.add_subcommand(
      "debug-batch-then-shuffle",
      "audit the same plan with and without the batch-then-shuffle bug");
  add_common(dbts);

  CLI::App* tro = app.add_subcommand(
      "tradeoff", "theoretical FPR/FNR envelope of (eps, delta)-DP");
  tro->add_option("--eps", eps, "epsilon")->required();
  tro->add_option("--delta", delta, "privacy delta");
  tro->add_option("--points", points, "number of alpha samples");
  tro->add_option("--out", curve_out, "output CSV (default stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (acc->parsed()) {
      return run_accountant(sigma, q, steps, delta, curve_points, curve_out,
                            with_rdp);
    }
    if (cal->parsed()) {
      const double calibrated = calibrate_sigma(eps_target, q, steps, delta, tol);
      const double round_trip =
          epsilon_at_delta({calibrated, q, steps, delta});
      std::cout << "eps_target,q,steps,delta,sigma,eps_round_trip\n"
                << format_g(eps_target) << ',' << format_g(q) << ',' << steps
                << ',' << format_g(delta) << ',' << format_g(calibrated) << ','
                << format_g(round_trip) << "\n";
      return 0;
    }
    if (tro->parsed()) return run_tradeoff(eps, delta, points, curve_out);

    // The remaining subcommands consume a config and write output files.
    FlatConfig config = load_config(config_path, overrides);
    apply_common_flags(config, seed_flag, seed_set, threads_flag);
    OutputContext ctx = make_output_dir(output_dir);
    int rc = 1;
    std::string name;
    if (aud->parsed()) {
      name = "audit";
      if (!dump_path.empty()) {
        config.set("dump_observations", dump_path);
        config.set("dump_count", std::to_string(dump_count));
      }
      rc = run_audit_command(config, ctx, emit_curves, dump_path, dump_count);
    } else if (swp->parsed()) {
      name = "sweep";
      std::vector<FlatConfig> plan_configs;
      if (!plans_path.empty()) {
        plan_configs = load_plans_file(plans_path);
        for (FlatConfig& cfg : plan_configs) {
          cfg.apply_overrides(overrides);
          apply_common_flags(cfg, seed_flag, seed_set, threads_flag);
        }
      } else if (!expand_spec.empty()) {
        plan_configs = expand_grid(config, expand_spec);
      } else {
        plan_configs = {config};
      }
      if (!emit_plans_path.empty()) {
        write_plans_file(emit_plans_path, plan_configs);
      }
      rc = run_sweep_command(plan_configs, ctx, recipe);
    } else if (dps->parsed()) {
      name = "debug-partial-shuffle";
      rc = run_partial_shuffle_command(config, ctx, guesses_flag);
    } else if (dbts->parsed()) {
      name = "debug-batch-then-shuffle";
      rc = run_bts_command(config, ctx);
    }
    if (rc == 0) {
      write_manifest(ctx, name, config, config.get_uint("seed", 1));
    }
    return rc;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::runtime_error& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
