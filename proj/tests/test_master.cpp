// Copyright 2026 The trapstat Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "doctest.h"

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "trapstat/master.hpp"

using namespace trapstat;

namespace {

Eigen::VectorXd to_eigen(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

TEST_CASE("moments of simple distributions") {
  Eigen::VectorXd two_point(2);
  two_point << 0.5, 0.5;
  const Moments a = moments(two_point);
  CHECK(a.mean == 0.5);
  CHECK(a.variance == 0.25);
  CHECK(*a.fano == 0.5);

  const Moments b = moments(delta_distribution(5, 10));
  CHECK(b.mean == 5.0);
  CHECK(b.variance == 0.0);
  CHECK(*b.fano == 0.0);

  CHECK_FALSE(moments(delta_distribution(0, 10)).fano.has_value());

  const Moments c = moments(to_eigen(oracle::poisson(4.0, 60)));
  CHECK(std::abs(*c.fano - 1.0) <= 1e-9);
}

TEST_CASE("steady state at the fig2 preset") {
  // Frozen from an independent dense solve (numpy) with n_max = 40.
  const StateDistribution d = steady_state(build_generator(preset("fig2"), 40));
  const Moments m = moments(d);
  CHECK(m.mean == doctest::Approx(3.5961932758223494).epsilon(1e-10));
  CHECK(m.variance == doctest::Approx(2.662148721442145).epsilon(1e-9));
  CHECK(*m.fano == doctest::Approx(0.7402685332126332).epsilon(1e-9));
  CHECK(std::abs(m.mean - 3.6) <= 0.05);
  CHECK(std::abs(*m.fano - 0.74) <= 0.005);
  CHECK(std::abs(d.probs.sum() - 1.0) <= 1e-12);
  CHECK(d.probs.minCoeff() >= 0.0);
}

TEST_CASE("steady state at the fig3b preset") {
  const SteadySolution s = solve_steady(preset("fig3b"));
  CHECK(s.moments.mean == doctest::Approx(31.74832208840831).epsilon(1e-10));
  CHECK(*s.moments.fano == doctest::Approx(0.7490054833142208).epsilon(1e-9));
}

TEST_CASE("collisional blockade: zero or one atom with equal odds") {
  const Moments m = moments(steady_state(build_generator(make_params(5.1, 0.2, {{2, 2, 500.0}}), 20)));
  const StateDistribution d = steady_state(build_generator(make_params(5.1, 0.2, {{2, 2, 500.0}}), 20));
  CHECK(std::abs(d.probs(0) - 0.5) <= 0.02);
  CHECK(std::abs(d.probs(1) - 0.5) <= 0.02);
  CHECK(std::abs(m.mean - 0.5) <= 0.01);
  CHECK(std::abs(*m.fano - 0.5) <= 0.02);
}

TEST_CASE("without pair losses the steady state is Poisson") {
  for (double mean : {0.05, 1.0, 6.0, 25.0}) {
    const ModelParams p = make_params(mean * 0.5, 0.5);
    const SteadySolution s = solve_steady(p);
    CHECK(std::abs(*s.moments.fano - 1.0) <= 1e-9);
    CHECK(tv_distance(s.dist.probs, to_eigen(oracle::poisson(mean, s.n_max))) <= 1e-8);
  }
}

TEST_CASE("steady state matches dense elimination on small random chains") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(0.05, 5.0);
  for (int trial = 0; trial < 200; ++trial) {
    const int n_max = 3 + trial % 4;
    const double R = u(rng), gamma = u(rng);
    std::vector<LossChannel> chans{{2, 1 + trial % 2, u(rng)}};
    if (trial % 3 == 0) chans.push_back({3, 3, u(rng)});
    const StateDistribution d = steady_state(build_generator(make_params(R, gamma, chans), n_max));
    std::vector<oracle::Channel> oc;
    for (const auto& c : chans) oc.push_back({c.order, c.removed, c.rate_const});
    const auto ref = oracle::null_vector(oracle::dense_generator(R, gamma, oc, n_max));
    for (int n = 0; n <= n_max; ++n) {
      CHECK(std::abs(d.probs(n) - static_cast<double>(ref[n])) <= 1e-10);
    }
  }
}

TEST_CASE("non-unique steady states are rejected") {
  // Without loading or one-body losses both N = 0 and N = 1 are absorbing.
  const Generator g = build_generator(make_params(0.0, 0.0, {{2, 2, 1.0}}), 10);
  CHECK(count_closed_classes(g) == 2);
  CHECK_THROWS_AS(steady_state(g), ValidationError);
  CHECK(count_closed_classes(build_generator(make_params(0.0, 0.1, {{2, 2, 1.0}}), 10)) == 1);
}

TEST_CASE("doubling n_max leaves the steady moments unchanged") {
  for (const char* name : {"fig2", "fig3b"}) {
    const SteadySolution s = solve_steady(preset(name));
    const SteadySolution d = solve_steady(preset(name), 2 * s.n_max);
    CHECK(std::abs(d.moments.mean / s.moments.mean - 1.0) < 1e-9);
    CHECK(std::abs(d.moments.variance / s.moments.variance - 1.0) < 1e-9);
  }
}

TEST_CASE("mean-number equation") {
  const ModelParams p = preset("fig2");
  SUBCASE("vanishes at the steady state") {
    const Moments m = solve_steady(p).moments;
    CHECK(std::abs(moment_rhs(p, m)) <= 1e-6 * p.loading_rate);
  }
  SUBCASE("Poisson closure gives R - gamma N - beta' N^2") {
    const Moments m{2.5, 2.5, 1.0};
    CHECK(moment_rhs(p, m) == doctest::Approx(6000.0 - 0.2 * 2.5 - 500.0 * 2.5 * 2.5));
  }
  SUBCASE("zero variance gives R - gamma N - beta' N(N-1)") {
    const Moments m{3.0, 0.0, 0.0};
    CHECK(moment_rhs(p, m) == doctest::Approx(6000.0 - 0.2 * 3 - 500.0 * 3 * 2));
  }
  CHECK_THROWS_AS(moment_rhs(preset("fig3a-dashed"), Moments{}), ValidationError);
  CHECK_THROWS_AS(moment_rhs(make_params(1.0, 0.1, {{2, 2, 1.0}, {3, 3, 1.0}}), Moments{}),
                  ValidationError);
}

TEST_CASE("evolve from an empty trap reaches the fig2 steady state by 3 ms") {
  const Generator g = build_generator(preset("fig2"), 40);
  EvolveOptions opt;
  opt.rel_tol = 1e-8;
  opt.n_samples = 31;
  const EvolveResult r = evolve(g, delta_distribution(0, 40), 3e-3, opt);
  REQUIRE(r.series.size() == 31);
  CHECK(r.series.front().time == 0.0);
  CHECK(r.series.back().time == 3e-3);
  const Moments m = moments(r.series.back());
  CHECK(std::abs(m.mean - 3.6) <= 0.05);
  CHECK(std::abs(*m.fano - 0.74) <= 0.005);
  CHECK(r.max_mass_drift <= 1e-9);
  CHECK(r.min_raw_probability >= -1e-12);
  CHECK_FALSE(r.switched_to_steady_at.has_value());
}

TEST_CASE("pure one-body decay thins binomially") {
  const double gamma = 0.7;
  const int k = 12;
  const Generator g = build_generator(make_params(0.0, gamma), 20);
  EvolveOptions opt;
  opt.rel_tol = 1e-10;
  opt.n_samples = 11;
  const EvolveResult r = evolve(g, delta_distribution(k, 20), 4.0, opt);
  for (const auto& d : r.series) {
    const double q = std::exp(-gamma * d.time);
    CHECK(tv_distance(d.probs, to_eigen(oracle::binomial_pmf(k, q, 20))) <= 1e-8);
    const Moments m = moments(d);
    CHECK(m.mean == doctest::Approx(k * q).epsilon(1e-8));
    if (d.time > 0.0) CHECK(*m.fano == doctest::Approx(1.0 - q).epsilon(1e-7));
  }
}

TEST_CASE("a steady initial condition stays put") {
  const Generator g = build_generator(make_params(0.0, 0.3), 8);
  const EvolveResult r = evolve(g, delta_distribution(0, 8), 10.0);
  for (const auto& d : r.series) CHECK(tv_distance(d.probs, delta_distribution(0, 8).probs) == 0.0);
}

TEST_CASE("linear loading and loss fill a Poisson law at all times") {
  const double R = 20.0, gamma = 2.0;
  const Generator g = build_generator(make_params(R, gamma), 60);
  EvolveOptions opt;
  opt.rel_tol = 1e-10;
  opt.n_samples = 21;
  const EvolveResult r = evolve(g, delta_distribution(0, 60), 3.0, opt);
  for (const auto& d : r.series) {
    const double mean = R / gamma * (1.0 - std::exp(-gamma * d.time));
    CHECK(tv_distance(d.probs, to_eigen(oracle::poisson(mean, 60))) <= 1e-8);
  }
}

TEST_CASE("long evolutions end on the direct steady state") {
  for (const char* name : {"fig2", "fig3b"}) {
    const ModelParams p = preset(name);
    const SteadySolution s = solve_steady(p);
    const Generator g = build_generator(p, s.n_max);
    EvolveOptions opt;
    opt.rel_tol = 1e-9;
    opt.n_samples = 5;
    const double t_end = 200.0 * relaxation_time(p);
    const EvolveResult r = evolve(g, delta_distribution(0, s.n_max), t_end, opt);
    CHECK(r.switched_to_steady_at.has_value());
    CHECK(tv_distance(r.series.back().probs, s.dist.probs) <= 1e-6);

    opt.switch_to_steady = false;
    const EvolveResult full = evolve(g, delta_distribution(0, s.n_max), t_end, opt);
    CHECK(tv_distance(full.series.back().probs, s.dist.probs) <= 1e-6);
  }
}

TEST_CASE("evolve validates its inputs") {
  const Generator g = build_generator(preset("fig2"), 20);
  EvolveOptions opt;
  opt.rel_tol = 1e-2;
  CHECK_THROWS_AS(evolve(g, delta_distribution(0, 20), 1e-3, opt), ValidationError);
  CHECK_THROWS_AS(evolve(g, delta_distribution(0, 20), 0.0), ValidationError);
  CHECK_THROWS_AS(evolve(g, delta_distribution(0, 10), 1e-3), ValidationError);
  EvolveOptions tiny;
  tiny.max_steps = 10;
  CHECK_THROWS_AS(evolve(g, delta_distribution(0, 20), 1e-3, tiny), NumericalError);
}

TEST_CASE("spectral relaxation time of a linear chain is 1/gamma") {
  const Generator g = build_generator(make_params(3.0, 0.5), 40);
  CHECK(relaxation_time(g) == doctest::Approx(2.0).epsilon(1e-6));
}
