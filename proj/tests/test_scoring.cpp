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
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <mpfr.h>

#include <cmath>
#include <vector>

#include "doctest.h"
#include "shuffleaudit/mechanism.hpp"
#include "shuffleaudit/rng.hpp"
#include "shuffleaudit/scoring.hpp"
#include "test_helpers.hpp"

using namespace shuffleaudit;

namespace {

// 256-bit direct evaluation of the mixture likelihood ratio: sums of plain
// Gaussian density products, no log-space tricks anywhere.
double mpfr_log_lr(const std::vector<double>& row, const HypothesisPair& hp) {
  constexpr mpfr_prec_t kPrec = 256;
  const auto density_product = [&](double target_mu, mpfr_t out) {
    // out = sum_t phi((o_t - mu)/s) prod_{t' != t} phi((o_t' - bg)/s)
    mpfr_t term, cell, z;
    mpfr_inits2(kPrec, term, cell, z, static_cast<mpfr_ptr>(nullptr));
    mpfr_set_zero(out, 1);
    for (std::size_t t = 0; t < static_cast<std::size_t>(hp.support); ++t) {
      mpfr_set_ui(term, 1, MPFR_RNDN);
      for (std::size_t u = 0; u < static_cast<std::size_t>(hp.support); ++u) {
        const double mu = u == t ? target_mu : hp.mu_background;
        mpfr_set_d(z, (row[u] - mu) / hp.sigma, MPFR_RNDN);
        mpfr_sqr(z, z, MPFR_RNDN);
        mpfr_div_si(z, z, -2, MPFR_RNDN);
        mpfr_exp(cell, z, MPFR_RNDN);  // unnormalized density; norm cancels
        mpfr_mul(term, term, cell, MPFR_RNDN);
      }
      mpfr_add(out, out, term, MPFR_RNDN);
    }
    mpfr_clears(term, cell, z, static_cast<mpfr_ptr>(nullptr));
  };

  mpfr_t num, den, ratio;
  mpfr_inits2(kPrec, num, den, ratio, static_cast<mpfr_ptr>(nullptr));
  density_product(hp.mu_target_1, num);
  if (hp.background_denominator) {
    // Denominator is the plain all-background product.
    mpfr_t z, cell;
    mpfr_inits2(kPrec, z, cell, static_cast<mpfr_ptr>(nullptr));
    mpfr_set_ui(den, 1, MPFR_RNDN);
    for (std::size_t u = 0; u < static_cast<std::size_t>(hp.support); ++u) {
      mpfr_set_d(z, (row[u] - hp.mu_background) / hp.sigma, MPFR_RNDN);
      mpfr_sqr(z, z, MPFR_RNDN);
      mpfr_div_si(z, z, -2, MPFR_RNDN);
      mpfr_exp(cell, z, MPFR_RNDN);
      mpfr_mul(den, den, cell, MPFR_RNDN);
    }
    mpfr_clears(z, cell, static_cast<mpfr_ptr>(nullptr));
  } else {
    density_product(hp.mu_target_0, den);
  }
  mpfr_div(ratio, num, den, MPFR_RNDN);
  mpfr_log(ratio, ratio, MPFR_RNDN);
  const double result = mpfr_get_d(ratio, MPFR_RNDN);
  mpfr_clears(num, den, ratio, static_cast<mpfr_ptr>(nullptr));
  return result;
}

// Probability-domain evaluation in long double, for moderate parameters.
double naive_log_lr(const std::vector<double>& row, const HypothesisPair& hp) {
  const auto mixture = [&](double target_mu) {
    long double total = 0.0L;
    for (std::size_t t = 0; t < static_cast<std::size_t>(hp.support); ++t) {
      long double term = 1.0L;
      for (std::size_t u = 0; u < static_cast<std::size_t>(hp.support); ++u) {
        const long double mu = u == t ? target_mu : hp.mu_background;
        const long double z = (row[u] - mu) / hp.sigma;
        term *= expl(-0.5L * z * z);
      }
      total += term;
    }
    return total;
  };
  long double den;
  if (hp.background_denominator) {
    den = 1.0L;
    for (std::size_t u = 0; u < static_cast<std::size_t>(hp.support); ++u) {
      const long double z = (row[u] - hp.mu_background) / hp.sigma;
      den *= expl(-0.5L * z * z);
    }
  } else {
    den = mixture(hp.mu_target_0);
  }
  return static_cast<double>(logl(mixture(hp.mu_target_1) / den));
}

HypothesisPair pi_pair(double sigma, std::int64_t support) {
  HypothesisPair hp;
  hp.mu_target_1 = 1.0;
  hp.mu_target_0 = 0.0;
  hp.mu_background = -1.0;
  hp.sigma = sigma;
  hp.support = support;
  return hp;
}

}  // namespace

TEST_CASE("equidistant observation scores zero") {
  HypothesisPair hp;
  hp.mu_target_1 = 1.0;
  hp.mu_target_0 = 0.0;
  hp.mu_background = 0.0;
  hp.sigma = 1.0;
  hp.support = 1;
  const double row[] = {0.5};
  CHECK(log_lr_epoch({row, 1}, hp) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("matches the 256-bit direct-sum oracle") {
  const std::vector<double> row = {0.3, -0.9};
  const HypothesisPair hp = pi_pair(1.0, 2);
  CHECK(std::abs(log_lr_epoch({row.data(), 2}, hp) - mpfr_log_lr(row, hp)) <
        1e-9);

  // A spread of random rows under every model shape.
  RandomStream stream = derive_stream({77, 0});
  for (int rep = 0; rep < 50; ++rep) {
    const std::int64_t support = 1 + static_cast<std::int64_t>(
                                         stream.uniform_below(8));
    std::vector<double> r(static_cast<std::size_t>(support));
    for (double& v : r) v = 3.0 * stream.normal();
    for (int model = 0; model < 3; ++model) {
      HypothesisPair cand = pi_pair(0.5 + stream.uniform01(), support);
      if (model == 1) {  // worst-case-like offsets
        cand.mu_target_1 = -6.0;
        cand.mu_target_0 = -7.0;
        cand.mu_background = -8.0;
      } else if (model == 2) {
        cand.background_denominator = true;
      }
      const double got = log_lr_epoch({r.data(), r.size()}, cand);
      const double expect = mpfr_log_lr(r, cand);
      CHECK(std::abs(got - expect) <
            1e-9 * std::max(1.0, std::abs(expect)));
    }
  }
}

TEST_CASE("translation invariance") {
  RandomStream stream = derive_stream({78, 0});
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<double> row(5);
    for (double& v : row) v = stream.normal();
    HypothesisPair hp = pi_pair(1.3, 5);
    const double base = log_lr_epoch({row.data(), 5}, hp);
    const double shift = 10.0 * stream.normal();
    for (double& v : row) v += shift;
    hp.mu_target_1 += shift;
    hp.mu_target_0 += shift;
    hp.mu_background += shift;
    const double shifted = log_lr_epoch({row.data(), 5}, hp);
    CHECK(std::abs(base - shifted) < 1e-12 * std::max(1.0, std::abs(base)) + 1e-12);
  }
}

TEST_CASE("scale consistency") {
  RandomStream stream = derive_stream({79, 0});
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<double> row(4);
    for (double& v : row) v = stream.normal();
    HypothesisPair hp = pi_pair(0.9, 4);
    const double base = log_lr_epoch({row.data(), 4}, hp);
    const double c = 0.1 + 5.0 * stream.uniform01();
    std::vector<double> scaled = row;
    for (double& v : scaled) v *= c;
    HypothesisPair hs = hp;
    hs.mu_target_1 *= c;
    hs.mu_target_0 *= c;
    hs.mu_background *= c;
    hs.sigma *= c;
    const double got = log_lr_epoch({scaled.data(), 4}, hs);
    CHECK(std::abs(base - got) < 1e-12 * std::max(1.0, std::abs(base)) + 1e-12);
  }
}

TEST_CASE("matrix score sums the epoch scores") {
  const HypothesisPair hp = pi_pair(1.0, 3);
  ObservationMatrix obs(2, 3, 1);
  for (int t = 0; t < 3; ++t) {
    obs.at(0, t) = 0.2 * t - 0.5;
    obs.at(1, t) = obs.at(0, t);
  }
  const double row_score = log_lr_epoch(obs.row(0), hp);
  CHECK(log_lr_matrix(obs, hp) ==
        doctest::Approx(2.0 * row_score).epsilon(1e-12));

  RandomStream stream = derive_stream({80, 0});
  ObservationMatrix rand_obs(3, 4, 0);
  for (double& v : rand_obs.values) v = stream.normal();
  const HypothesisPair hp4 = pi_pair(1.0, 4);
  double total = 0.0;
  for (int e = 0; e < 3; ++e) total += log_lr_epoch(rand_obs.row(e), hp4);
  CHECK(log_lr_matrix(rand_obs, hp4) ==
        doctest::Approx(total).epsilon(1e-12));
}

TEST_CASE("scores separate the two worlds on average") {
  MechanismParams params;
  params.batch_size = 2;
  params.steps_per_epoch = 10;
  params.epochs = 2;
  params.noise_multiplier = 1.0;
  const HypothesisPair hp = hypothesis_for(AuditModel::WorstCase, params, 10);
  double mean1 = 0.0, mean0 = 0.0;
  constexpr int kDraws = 10000;
  for (int world : {1, 0}) {
    RandomStream stream = derive_stream({81, static_cast<std::uint64_t>(world)});
    for (int i = 0; i < kDraws; ++i) {
      const ObservationMatrix obs = surrogate_observations(
          ThreatModel::WorstCase, params, SamplerSpec::full_shuffle(), world,
          stream);
      (world == 1 ? mean1 : mean0) += log_lr_matrix(obs, hp);
    }
  }
  CHECK(mean1 / kDraws > mean0 / kDraws);
}

TEST_CASE("hypothesis tables") {
  MechanismParams params;
  params.batch_size = 2;
  params.steps_per_epoch = 8;
  params.noise_multiplier = 1.0;
  const HypothesisPair wc = hypothesis_for(AuditModel::WorstCase, params, 8);
  CHECK(wc.mu_target_1 == 0.0);
  CHECK(wc.mu_target_0 == -1.0);
  CHECK(wc.mu_background == -2.0);
  CHECK_FALSE(wc.background_denominator);

  const HypothesisPair pi =
      hypothesis_for(AuditModel::PartiallyInformed, params, 8);
  CHECK(pi.mu_target_1 == 1.0);
  CHECK(pi.mu_target_0 == 0.0);
  CHECK(pi.mu_background == -1.0);

  params.batch_size = 4;
  const HypothesisPair bts =
      hypothesis_for(AuditModel::BatchThenShuffle, params, 8);
  CHECK(bts.mu_target_1 == 4.0);
  CHECK(bts.mu_target_0 == 3.0);
  CHECK(bts.mu_background == -4.0);

  const HypothesisPair nat = hypothesis_for(AuditModel::Natural, params, 8);
  CHECK(nat.background_denominator);
  CHECK(nat.mu_background == 0.0);
}

TEST_CASE("natural denominator is the fixed background product") {
  // The score must be the numerator mixture alone, not log(support) shifted.
  HypothesisPair nat;
  nat.mu_target_1 = 1.0;
  nat.mu_target_0 = 0.0;
  nat.mu_background = 0.0;
  nat.sigma = 1.0;
  nat.support = 4;
  nat.background_denominator = true;
  const std::vector<double> row = {0.1, -0.2, 0.05, 0.3};
  double expect = 0.0;
  {
    double m = -1e300;
    std::vector<double> a(4);
    for (int t = 0; t < 4; ++t) {
      a[t] = row[t] - 0.5;  // log phi((o-1)) - log phi(o) = o - 1/2
      m = std::max(m, a[t]);
    }
    double s = 0.0;
    for (double v : a) s += std::exp(v - m);
    expect = m + std::log(s);
  }
  CHECK(log_lr_epoch({row.data(), 4}, nat) ==
        doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("log-space agrees with the probability-domain evaluation") {
  RandomStream stream = derive_stream({82, 0});
  for (int rep = 0; rep < 200; ++rep) {
    const std::int64_t t = 1 + static_cast<std::int64_t>(stream.uniform_below(20));
    const std::int64_t e = 1 + static_cast<std::int64_t>(stream.uniform_below(3));
    const double sigma = 0.5 + 1.5 * stream.uniform01();
    HypothesisPair hp = pi_pair(sigma, t);
    if (rep % 3 == 0) hp.background_denominator = true;
    ObservationMatrix obs(e, t, 1);
    for (double& v : obs.values) v = hp.mu_background + sigma * stream.normal();
    double naive_total = 0.0;
    for (std::int64_t row = 0; row < e; ++row) {
      std::vector<double> r(obs.row(row).begin(), obs.row(row).end());
      naive_total += naive_log_lr(r, hp);
    }
    const double got = log_lr_matrix(obs, hp);
    CHECK(std::abs(got - naive_total) <=
          1e-9 * std::max(1.0, std::abs(naive_total)));
  }
}

TEST_CASE("no overflow at extreme parameter sizes") {
  MechanismParams params;
  params.batch_size = 10000;
  params.steps_per_epoch = 1000;
  params.epochs = 100;  // T*E = 1e5
  params.noise_multiplier = 0.3;
  const HypothesisPair hp = hypothesis_for(AuditModel::WorstCase, params, 1000);
  RandomStream stream = derive_stream({83, 0});
  ObservationMatrix obs(100, 1000, 1);
  const SurrogateMeans means = surrogate_means(AuditModel::WorstCase, params, 1);
  for (std::int64_t e = 0; e < 100; ++e) {
    fill_surrogate_epoch(obs.row(e), means, params, SamplerSpec::full_shuffle(),
                         stream);
  }
  const double score = log_lr_matrix(obs, hp);
  CHECK(std::isfinite(score));

  // The batch-then-shuffle triple has the widest dynamic range.
  const HypothesisPair bts =
      hypothesis_for(AuditModel::BatchThenShuffle, params, 1000);
  CHECK(std::isfinite(log_lr_epoch(obs.row(0), bts)));
}

TEST_CASE("error paths never return NaN") {
  HypothesisPair hp = pi_pair(1.0, 2);
  const std::vector<double> bad = {0.1,
                                   std::numeric_limits<double>::quiet_NaN()};
  CHECK_THROWS_AS(log_lr_epoch({bad.data(), 2}, hp), std::domain_error);
  const std::vector<double> inf = {0.1,
                                   std::numeric_limits<double>::infinity()};
  CHECK_THROWS_AS(log_lr_epoch({inf.data(), 2}, hp), std::domain_error);
  const std::vector<double> short_row = {0.1};
  CHECK_THROWS_AS(log_lr_epoch({short_row.data(), 1}, hp),
                  std::invalid_argument);
  hp.sigma = 0.0;
  const std::vector<double> ok = {0.1, 0.2};
  CHECK_THROWS_AS(log_lr_epoch({ok.data(), 2}, hp), std::invalid_argument);
  MechanismParams params;
  params.steps_per_epoch = 4;
  CHECK_THROWS_AS(hypothesis_for(AuditModel::Natural, params, 5),
                  std::invalid_argument);
}
