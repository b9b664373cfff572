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
// End-to-end acceptance suite. Each criterion prints one PASS/FAIL line;
// the longer audits run at the stated desk-scale observation counts.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <chrono>
#include <cmath>
#include <cstdio>
#include <vector>

#include "doctest.h"
#include "shuffleaudit/accountant.hpp"
#include "shuffleaudit/harness.hpp"
#include "shuffleaudit/mechanism.hpp"
#include "shuffleaudit/scoring.hpp"
#include "test_helpers.hpp"

using namespace shuffleaudit;

namespace {

class CriterionTimer {
 public:
  explicit CriterionTimer(int id, const char* description)
      : id_(id), description_(description),
        start_(std::chrono::steady_clock::now()) {}

  void report(bool pass) const {
    const double secs = std::chrono::duration<double>(
                            std::chrono::steady_clock::now() - start_)
                            .count();
    std::printf("[criterion %d] %s  (%s, %.1f s)\n", id_,
                pass ? "PASS" : "FAIL", description_, secs);
    std::fflush(stdout);
  }

 private:
  int id_;
  const char* description_;
  std::chrono::steady_clock::time_point start_;
};

ExperimentPlan worst_case_plan(double sigma, std::int64_t steps,
                               std::int64_t epochs, std::int64_t n_obs,
                               std::uint64_t seed) {
  ExperimentPlan plan;
  plan.params.batch_size = 1;
  plan.params.steps_per_epoch = steps;
  plan.params.epochs = epochs;
  plan.params.noise_multiplier = sigma;
  plan.sampler = SamplerSpec::full_shuffle();
  plan.threat = AuditModel::WorstCase;
  plan.observations = n_obs;
  plan.repeats = 5;
  plan.seed = seed;
  return plan;
}

}  // namespace

TEST_CASE("criterion 1: accountant anchors") {
  CriterionTimer timer(1, "epsilon_at_delta reproduces published anchors +-5%");
  const double e05 = epsilon_at_delta({0.5, 0.01, 100, 1e-5});
  const double e10 = epsilon_at_delta({1.0, 0.01, 100, 1e-5});
  const double e15 = epsilon_at_delta({1.5, 0.01, 100, 1e-5});
  const double sst2 = epsilon_at_delta({0.79, 1.0 / 117.0, 1170, 1e-5});
  const bool pass = std::abs(e05 - 6.49) <= 0.05 * 6.49 &&
                    std::abs(e10 - 0.73) <= 0.05 * 0.73 &&
                    std::abs(e15 - 0.30) <= 0.05 * 0.30 &&
                    std::abs(sst2 - 3.00) <= 0.05 * 3.00;
  std::printf("    eps(0.5)=%.4f eps(1.0)=%.4f eps(1.5)=%.4f eps(sst2)=%.4f\n",
              e05, e10, e15, sst2);
  timer.report(pass);
  CHECK(std::abs(e05 - 6.49) <= 0.05 * 6.49);
  CHECK(std::abs(e10 - 0.73) <= 0.05 * 0.73);
  CHECK(std::abs(e15 - 0.30) <= 0.05 * 0.30);
  CHECK(std::abs(sst2 - 3.00) <= 0.05 * 3.00);
}

TEST_CASE("criterion 2: worst-case gap at desk scale") {
  CriterionTimer timer(2, "WC sigma=1 T=100 N=1e7: mean eps_emp > 0.73");
  const ExperimentPlan plan = worst_case_plan(1.0, 100, 1, 10'000'000, 202);
  const RunResult result = run_audit(plan);
  std::printf("    eps_emp mean=%.4f std=%.4f repeats:", result.eps_emp,
              result.repeat_std);
  for (double e : result.repeats) std::printf(" %.4f", e);
  std::printf("\n");
  const bool pass = result.eps_emp > 0.73 && result.repeat_std < 0.3;
  timer.report(pass);
  CHECK(result.eps_emp > 0.73);
  CHECK(result.repeat_std < 0.3);
}

TEST_CASE("criterion 3: SST-2 row replication") {
  CriterionTimer timer(3, "sigma=0.79 T=117 E=10 N=1e7: eps_emp >= 2 * 3.00");
  const ExperimentPlan plan = worst_case_plan(0.79, 117, 10, 10'000'000, 303);
  const RunResult result = run_audit(plan);
  std::printf("    eps_emp mean=%.4f std=%.4f (long-run target 9.80)\n",
              result.eps_emp, result.repeat_std);
  const bool pass = result.eps_emp >= 2.0 * 3.00;
  timer.report(pass);
  CHECK(result.eps_emp >= 6.0);
}

TEST_CASE("criterion 4: threat-model ordering") {
  CriterionTimer timer(4, "eps_target=1: WC >= PI > Natural, Natural < 1");
  ExperimentPlan plan;
  plan.params.batch_size = 100;
  plan.params.steps_per_epoch = 100;
  plan.params.epochs = 1;
  plan.sampler = SamplerSpec::full_shuffle();
  plan.observations = 1'000'000;
  plan.repeats = 5;
  plan.seed = 404;
  plan.params.noise_multiplier =
      calibrate_sigma(1.0, plan.poisson_q(), plan.poisson_steps(),
                      plan.params.delta);

  plan.threat = AuditModel::WorstCase;
  const RunResult wc = run_audit(plan);
  plan.threat = AuditModel::PartiallyInformed;
  const RunResult pi = run_audit(plan);
  plan.threat = AuditModel::Natural;
  const RunResult natural = run_audit(plan);
  std::printf("    sigma=%.4f WC=%.4f PI=%.4f Natural=%.4f\n",
              plan.params.noise_multiplier, wc.eps_emp, pi.eps_emp,
              natural.eps_emp);
  const bool pass = wc.eps_emp >= pi.eps_emp && pi.eps_emp > natural.eps_emp &&
                    natural.eps_emp < 1.0;
  timer.report(pass);
  CHECK(wc.eps_emp >= pi.eps_emp);
  CHECK(pi.eps_emp > natural.eps_emp);
  CHECK(natural.eps_emp < 1.0);
}

TEST_CASE("criterion 5: partial-shuffle detection") {
  CriterionTimer timer(5, "eps_target=0.1: no-shuffle >= 5x full, K=1000 between");
  ExperimentPlan plan;
  plan.params.batch_size = 100;
  plan.params.steps_per_epoch = 100;  // n = 10^4
  plan.params.epochs = 1;
  plan.threat = AuditModel::PartiallyInformed;
  plan.observations = 1'000'000;
  plan.repeats = 5;
  plan.seed = 505;
  plan.params.noise_multiplier =
      calibrate_sigma(0.1, plan.poisson_q(), plan.poisson_steps(),
                      plan.params.delta);
  const auto guesses = default_buffer_guesses(100);

  plan.sampler = SamplerSpec::partial_shuffle(100);  // K = B: no shuffling
  const PartialShuffleOutcome none = partial_shuffle_audit(plan, guesses);
  plan.sampler = SamplerSpec::partial_shuffle(1000);
  const PartialShuffleOutcome partial = partial_shuffle_audit(plan, guesses);
  plan.sampler = SamplerSpec::full_shuffle();
  const PartialShuffleOutcome full = partial_shuffle_audit(plan, guesses);

  std::printf("    sigma=%.4f K=B:%.4f K=1000:%.4f full:%.4f\n",
              plan.params.noise_multiplier, none.best_eps_mean,
              partial.best_eps_mean, full.best_eps_mean);
  const bool pass = none.best_eps_mean >= 5.0 * full.best_eps_mean &&
                    partial.best_eps_mean > full.best_eps_mean &&
                    partial.best_eps_mean < none.best_eps_mean;
  timer.report(pass);
  CHECK(none.best_eps_mean >= 5.0 * full.best_eps_mean);
  CHECK(partial.best_eps_mean > full.best_eps_mean);
  CHECK(partial.best_eps_mean < none.best_eps_mean);
}

TEST_CASE("criterion 6: batch-then-shuffle detection") {
  CriterionTimer timer(6, "eps_target=0.1: with-bug >= 3x without-bug");
  ExperimentPlan plan;
  plan.params.batch_size = 100;
  plan.params.steps_per_epoch = 100;
  plan.params.epochs = 1;
  plan.threat = AuditModel::BatchThenShuffle;
  plan.observations = 1'000'000;
  plan.repeats = 5;
  plan.seed = 606;
  plan.eps_target = 0.1;
  const BtsOutcome outcome = bts_audit(plan);
  std::printf("    sigma=%.4f with_bug=%.4f without_bug=%.4f\n",
              outcome.with_bug.plan.params.noise_multiplier,
              outcome.with_bug.eps_emp, outcome.without_bug.eps_emp);
  const bool pass =
      outcome.with_bug.eps_emp >= 3.0 * outcome.without_bug.eps_emp;
  timer.report(pass);
  CHECK(outcome.with_bug.eps_emp >= 3.0 * outcome.without_bug.eps_emp);
}

TEST_CASE("criterion 7: estimator exactness") {
  CriterionTimer timer(7, "CP closed forms, beta oracle, separated-case value");
  bool pass = true;

  for (std::int64_t n : {10, 100, 1000, 12345}) {
    const double expect = 1.0 - std::pow(0.05, 1.0 / static_cast<double>(n));
    pass = pass && std::abs(clopper_pearson_upper(0, n, 0.95) - expect) < 1e-9;
    CHECK(std::abs(clopper_pearson_upper(0, n, 0.95) - expect) < 1e-9);
  }

  RandomStream stream = derive_stream({707, 0});
  for (int i = 0; i < 100; ++i) {
    const std::int64_t n =
        1 + static_cast<std::int64_t>(stream.uniform_below(2000));
    const std::int64_t k = static_cast<std::int64_t>(
        stream.uniform_below(static_cast<std::uint64_t>(n + 1)));
    const double p = clopper_pearson_upper(k, n, 0.95);
    if (k == n) {
      pass = pass && p == 1.0;
      CHECK(p == 1.0);
      continue;
    }
    const double cdf = testutil::incomplete_beta_quadrature(
        static_cast<double>(k + 1), static_cast<double>(n - k), p);
    pass = pass && std::abs(cdf - 0.95) < 1e-7;
    CHECK(std::abs(cdf - 0.95) < 1e-7);
  }

  ScoreSet separated;
  separated.scores_d1.assign(1000, 1.0);
  separated.scores_d0.assign(1000, 0.0);
  const double eps = estimate_eps(separated, 0.05, 1e-5).eps_emp;
  const double c0 = 1.0 - std::pow(0.05, 1.0 / 1000.0);
  const double expect = std::log((1.0 - c0 - 1e-5) / c0);
  pass = pass && std::abs(eps - expect) < 1e-6;
  CHECK(std::abs(eps - expect) < 1e-6);
  timer.report(pass);
}

TEST_CASE("criterion 8: property suites") {
  CriterionTimer timer(8, "log-space, surrogate-law, uniformity, null audit, determinism");
  bool pass = true;

  // Scoring: log-space vs probability-domain agreement at 1e-9.
  {
    RandomStream stream = derive_stream({808, 0});
    for (int rep = 0; rep < 50; ++rep) {
      const std::int64_t t =
          1 + static_cast<std::int64_t>(stream.uniform_below(20));
      HypothesisPair hp;
      hp.mu_target_1 = 1.0;
      hp.mu_target_0 = 0.0;
      hp.mu_background = -1.0;
      hp.sigma = 0.5 + 1.5 * stream.uniform01();
      hp.support = t;
      std::vector<double> row(static_cast<std::size_t>(t));
      for (double& v : row) v = hp.mu_background + hp.sigma * stream.normal();
      long double num = 0.0L, den = 0.0L;
      for (std::int64_t i = 0; i < t; ++i) {
        long double term1 = 1.0L, term0 = 1.0L;
        for (std::int64_t u = 0; u < t; ++u) {
          const long double z1 =
              (row[u] - (u == i ? hp.mu_target_1 : hp.mu_background)) / hp.sigma;
          const long double z0 =
              (row[u] - (u == i ? hp.mu_target_0 : hp.mu_background)) / hp.sigma;
          term1 *= expl(-0.5L * z1 * z1);
          term0 *= expl(-0.5L * z0 * z0);
        }
        num += term1;
        den += term0;
      }
      const double expect = static_cast<double>(logl(num / den));
      const double got = log_lr_epoch({row.data(), row.size()}, hp);
      const bool ok =
          std::abs(got - expect) <= 1e-9 * std::max(1.0, std::abs(expect));
      pass = pass && ok;
      CHECK(ok);
    }
  }

  // Mechanism: surrogate law equals the explicit mechanism (two-sample KS).
  {
    MechanismParams params;
    params.batch_size = 2;
    params.steps_per_epoch = 5;
    params.noise_multiplier = 1.0;
    RandomStream slow = derive_stream({809, 0});
    RandomStream fast = derive_stream({810, 0});
    constexpr int kDraws = 10000;
    std::vector<double> ref, sur;
    for (int i = 0; i < kDraws; ++i) {
      const ObservationMatrix a =
          bgm_run(worst_case_records(10, 1), params,
                  SamplerSpec::full_shuffle(), slow);
      const ObservationMatrix b =
          surrogate_observations(ThreatModel::WorstCase, params,
                                 SamplerSpec::full_shuffle(), 1, fast);
      for (int t = 0; t < 5; ++t) {
        ref.push_back(a.at(0, t));
        sur.push_back(b.at(0, t));
      }
    }
    const double d = testutil::ks_distance_two_sample(ref, sur);
    const bool ok = d < testutil::ks_two_sample_crit01(ref.size(), sur.size());
    pass = pass && ok;
    CHECK(ok);
  }

  // Sampler: chi-square uniformity of the fast target index.
  {
    RandomStream stream = derive_stream({811, 0});
    std::vector<std::int64_t> counts(100, 0);
    for (int i = 0; i < 100000; ++i) {
      ++counts[static_cast<std::size_t>(
          target_batch_index(100, 1, SamplerSpec::full_shuffle(), stream))];
    }
    std::vector<double> expected(100, 1000.0);
    const bool ok = testutil::chi_square_stat(counts, expected) <
                    testutil::kChi2Crit99Dof99;
    pass = pass && ok;
    CHECK(ok);
  }

  // Estimator soundness: identical worlds audit to zero in >= 95/100 repeats.
  {
    ExperimentPlan plan;
    plan.params.batch_size = 1;
    plan.params.steps_per_epoch = 10;
    plan.params.noise_multiplier = 1.0;
    plan.threat = AuditModel::WorstCase;
    plan.null_worlds = true;
    plan.observations = 10000;
    plan.repeats = 100;
    plan.seed = 812;
    const RunResult result = run_audit(plan);
    int zeros = 0;
    for (double eps : result.repeats) zeros += eps == 0.0;
    std::printf("    null audit: %d/100 repeats at eps_emp = 0\n", zeros);
    const bool ok = zeros >= 95;
    pass = pass && ok;
    CHECK(ok);
  }

  // Determinism across thread counts.
  {
    ExperimentPlan plan;
    plan.params.batch_size = 1;
    plan.params.steps_per_epoch = 25;
    plan.params.noise_multiplier = 1.0;
    plan.threat = AuditModel::WorstCase;
    plan.observations = 20000;
    plan.repeats = 2;
    plan.seed = 813;
    plan.threads = 1;
    const RunResult one = run_audit(plan);
    plan.threads = 2;
    const RunResult two = run_audit(plan);
    const bool ok = one.repeats == two.repeats &&
                    one.threshold == two.threshold &&
                    one.alpha_bar == two.alpha_bar;
    pass = pass && ok;
    CHECK(ok);
  }
  timer.report(pass);
}
