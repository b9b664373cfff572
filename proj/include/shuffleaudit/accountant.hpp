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
#ifndef SHUFFLEAUDIT_ACCOUNTANT_HPP_
#define SHUFFLEAUDIT_ACCOUNTANT_HPP_

#include <cstdint>
#include <span>
#include <vector>

namespace shuffleaudit {

// Parameters of the Poisson-sub-sampled Gaussian mechanism under k-fold
// composition; the theoretical baseline every audit is compared against.
struct PoissonAccountantParams {
  double noise_multiplier = 1.0;  // sigma > 0
  double sampling_rate = 1.0;     // q = B/n, in (0, 1]
  std::int64_t total_steps = 1;   // T * E
  double delta = 1e-5;

  void validate() const;
};

// Which neighbouring direction the privacy loss is taken in. Both are
// computed and the larger epsilon is reported, matching zero-out adjacency.
enum class Adjacency { Remove, Insert };

struct PldOptions {
  double grid_step = 1e-4;      // log-likelihood-ratio grid spacing
  double support_extent = 30.0; // grid capped at +/- this many log-units
  double tail_fold = 1e-16;     // single-step tail mass folded away
  double trim_tail = 1e-18;     // per-composition tail trim, tracked
};

// Discretized privacy loss distribution on a uniform log-likelihood-ratio
// grid. Finite mass lives at losses lo_index*grid_step ... and a
// distinguishable atom sits at +infinity. Discretization is pessimistic:
// delta_at_epsilon of the discrete object upper-bounds the true mechanism's
// delta at every grid epsilon, and truncation_mass bounds everything that
// tail folding may additionally have cost.
class PrivacyLossDistribution {
 public:
  double grid_step = 1e-4;
  std::int64_t lo_index = 0;
  std::vector<double> mass;    // finite-loss probability masses
  double inf_mass = 0.0;       // atom at +infinity
  double truncation_mass = 0.0;

  double total_mass() const;

  // Hockey-stick divergence of the discrete distribution (without the
  // truncation_mass allowance; callers add it per their own convention).
  double delta_at_epsilon(double epsilon) const;

  // Smallest non-negative grid epsilon with
  //   delta_at_epsilon(eps) + truncation_mass <= delta.
  // Throws std::runtime_error with grid diagnostics when unreachable.
  double epsilon_for_delta(double delta) const;
};

// Exact single-step hockey-stick divergence of the sub-sampled Gaussian:
// remove: P = (1-q) N(0,s^2) + q N(1,s^2)  vs  Q = N(0,s^2),
// insert: the two roles swapped. Valid for any real epsilon.
double subsampled_gaussian_delta(double sigma, double q, Adjacency dir,
                                 double epsilon);

// Single-step PLD, discretized so delta at grid points matches the exact
// curve (chord construction; conservative in between).
PrivacyLossDistribution pld_single_step(double sigma, double q,
                                        Adjacency dir = Adjacency::Remove,
                                        const PldOptions& opt = {});

// k-fold self-composition via FFT convolution with exponentiation by
// squaring. Tails folded outside the grid are tracked pessimistically.
PrivacyLossDistribution compose(const PrivacyLossDistribution& pld,
                                std::int64_t k, const PldOptions& opt = {});

// Theoretical epsilon at the params' delta; worst of the two directions.
double epsilon_at_delta(const PoissonAccountantParams& params,
                        const PldOptions& opt = {});

// epsilon_at_delta plus grid diagnostics for reporting.
struct AccountantReport {
  double epsilon = 0.0;
  double truncation_mass = 0.0;  // worst direction
  double inf_mass = 0.0;
  std::int64_t grid_points = 0;
};
AccountantReport epsilon_report(const PoissonAccountantParams& params,
                                const PldOptions& opt = {});

// Renyi-DP upper bound on epsilon, used as an independent cross-check.
// Never tighter than the PLD route. Orders must all exceed 1.
double rdp_epsilon(const PoissonAccountantParams& params,
                   std::span<const double> orders);
std::vector<double> default_rdp_orders();

// Smallest sigma in [0.01, 100] with |epsilon_at_delta - eps_target| <= tol,
// found by bracketing + bisection on the monotone sigma -> epsilon map.
// Throws std::runtime_error when the target is unreachable in the bracket.
double calibrate_sigma(double eps_target, double q, std::int64_t total_steps,
                       double delta, double tol = 1e-3,
                       const PldOptions& opt = {});

// Lower envelope of the (eps, delta) privacy region: the smallest FNR any
// adversary can reach at FPR alpha against an (eps, delta)-DP mechanism.
double tradeoff_epsdelta(double eps, double delta, double alpha);

}  // namespace shuffleaudit

#endif  // SHUFFLEAUDIT_ACCOUNTANT_HPP_
