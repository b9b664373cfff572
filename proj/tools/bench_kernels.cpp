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
// Times the OpenMP kernels against their serial reference implementations
// and checks bit-identical outputs along the way.

#include <omp.h>

#include <chrono>
#include <cstdio>
#include <cstring>
#include <vector>

#include "shuffleaudit/accountant.hpp"
#include "shuffleaudit/audit_kernels.hpp"
#include "shuffleaudit/estimator.hpp"
#include "shuffleaudit/scoring.hpp"

using namespace shuffleaudit;

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

void report(const char* name, double serial_s, double parallel_s,
            double items, bool identical) {
  std::printf("%-28s serial %8.3fs  omp %8.3fs  speedup %5.2fx  %9.1f Mitem/s  %s\n",
              name, serial_s, parallel_s, serial_s / parallel_s,
              items / parallel_s / 1e6, identical ? "outputs-match" : "MISMATCH");
}

}  // namespace

int main(int argc, char** argv) {
  std::int64_t count = 1 << 19;
  if (argc > 1) count = std::atoll(argv[1]);
  std::printf("threads available: %d, observations per kernel: %lld\n\n",
              omp_get_max_threads(), static_cast<long long>(count));

  // Worst-case surrogate generation + scoring, T = 100.
  {
    KernelPlan plan;
    plan.params.batch_size = 1;
    plan.params.steps_per_epoch = 100;
    plan.params.noise_multiplier = 1.0;
    plan.model = AuditModel::WorstCase;
    plan.world_bit = 1;
    plan.master_seed = 42;
    const HypothesisPair hp =
        hypothesis_for(AuditModel::WorstCase, plan.params, 100);

    std::vector<double> serial(count), parallel(count);
    auto t0 = std::chrono::steady_clock::now();
    generate_and_score_serial(plan, hp, serial);
    const double ts = seconds_since(t0);
    t0 = std::chrono::steady_clock::now();
    generate_and_score_omp(plan, hp, parallel);
    const double tp = seconds_since(t0);
    const bool same = std::memcmp(serial.data(), parallel.data(),
                                  serial.size() * sizeof(double)) == 0;
    report("score kernel (WC, T=100)", ts, tp,
           static_cast<double>(count) * 100.0, same);
  }

  // Batch-then-shuffle comparator path (hypergeometric placement).
  {
    KernelPlan plan;
    plan.params.batch_size = 100;
    plan.params.steps_per_epoch = 100;
    plan.params.noise_multiplier = 1.0;
    plan.model = AuditModel::BatchThenShuffle;
    plan.sampler = SamplerSpec::full_shuffle();
    plan.world_bit = 1;
    plan.master_seed = 7;
    const HypothesisPair hp =
        hypothesis_for(AuditModel::BatchThenShuffle, plan.params, 100);

    std::vector<double> serial(count), parallel(count);
    auto t0 = std::chrono::steady_clock::now();
    generate_and_score_serial(plan, hp, serial);
    const double ts = seconds_since(t0);
    t0 = std::chrono::steady_clock::now();
    generate_and_score_omp(plan, hp, parallel);
    const double tp = seconds_since(t0);
    const bool same = std::memcmp(serial.data(), parallel.data(),
                                  serial.size() * sizeof(double)) == 0;
    report("score kernel (no-bug BTS)", ts, tp,
           static_cast<double>(count) * 100.0, same);
  }

  // Clopper-Pearson table construction.
  {
    const std::int64_t trials = count;
    auto t0 = std::chrono::steady_clock::now();
    std::vector<double> serial(static_cast<std::size_t>(trials + 1));
    for (std::int64_t k = 0; k <= trials; ++k) {
      serial[static_cast<std::size_t>(k)] =
          clopper_pearson_upper(k, trials, 0.95);
    }
    const double ts = seconds_since(t0);
    t0 = std::chrono::steady_clock::now();
    const CpUpperTable table(trials, 0.95);
    const double tp = seconds_since(t0);
    bool same = true;
    for (std::int64_t k = 0; k <= trials; ++k) {
      same = same && serial[static_cast<std::size_t>(k)] == table[k];
    }
    report("clopper-pearson table", ts, tp, static_cast<double>(trials), same);
  }

  // PLD composition (no serial/parallel split; FFT timing reference).
  {
    auto t0 = std::chrono::steady_clock::now();
    const double eps = epsilon_at_delta({1.0, 0.01, 100, 1e-5});
    const double t = seconds_since(t0);
    std::printf("%-28s %8.3fs  (eps = %.4f)\n", "pld accountant (100 steps)", t,
                eps);
  }
  return 0;
}
