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


// Acceptance suite. `acceptance` runs every criterion, `acceptance <k>` runs
// criterion k only. Each criterion prints one [PASS] or [FAIL] line with the
// measured values; the exit status is nonzero if any selected criterion fails.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "trapstat/generator.hpp"
#include "trapstat/io.hpp"
#include "trapstat/master.hpp"
#include "trapstat/mc.hpp"
#include "trapstat/sweep.hpp"
#include "trapstat/vankampen.hpp"

using namespace trapstat;

namespace {

struct Verdict {
  bool pass = true;
  std::string detail;

  void check(bool ok, const std::string& what) {
    pass = pass && ok;
    if (!detail.empty()) detail += "; ";
    detail += what + (ok ? "" : " [x]");
  }
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::string fmt(const char* f, double a, double b) {
  char buf[96];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

std::string fmt(const char* f, double a, double b, double c) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

bool within(double x, double target, double tol) { return std::abs(x - target) <= tol; }

ModelParams fig1_base() { return preset("fig1"); }

ModelParams m1_variant(double gamma) { return make_params(1.0, gamma, {{2, 1, 500.0}}); }

// Master-backend sweep over the default grid, shared by criteria 3 and 4.
const std::vector<SweepRow>& fig1_sweep() {
  static const std::vector<SweepRow> rows = [] {
    SweepSpec spec;
    spec.base = fig1_base();
    spec.loading_rates = fano_sweep_grid(spec.base);
    spec.keep_distribution = true;
    return run_sweep(spec);
  }();
  return rows;
}

// ---------------------------------------------------------------------------

Verdict c1() {
  Verdict v;
  const SteadySolution s = solve_steady(preset("fig2"));
  v.check(within(s.moments.mean, 3.6, 0.05), fmt("mean %.4f (3.6 +/- 0.05)", s.moments.mean));
  v.check(within(*s.moments.fano, 0.74, 0.01), fmt("F %.4f (0.74 +/- 0.01)", *s.moments.fano));
  return v;
}

Verdict c2() {
  Verdict v;
  const SteadySolution s = solve_steady(preset("fig3b"));
  v.check(within(s.moments.mean, 32.0, 0.5), fmt("mean %.3f (32 +/- 0.5)", s.moments.mean));
  v.check(within(*s.moments.fano, 0.75, 0.005), fmt("F %.4f (0.75 +/- 0.005)", *s.moments.fano));
  const double tv = gaussian_check(s.dist);
  v.check(tv <= 0.01, fmt("Gaussian TV %.4f (<= 0.01)", tv));
  return v;
}

Verdict c3() {
  Verdict v;
  int counted = 0;
  double lo = 1.0, hi = 0.0;
  for (const auto& r : fig1_sweep()) {
    if (!r.mean || *r.mean < 2.0) continue;
    ++counted;
    lo = std::min(lo, *r.fano);
    hi = std::max(hi, *r.fano);
  }
  v.check(counted > 0, fmt("%.0f points with mean >= 2", counted));
  v.check(lo >= 0.73 && hi <= 0.77, fmt("F range [%.4f, %.4f] (within [0.73, 0.77])", lo, hi));
  return v;
}

Verdict c4() {
  Verdict v;
  const auto& rows = fig1_sweep();
  const auto best = std::min_element(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
    return a.fano.value_or(2.0) < b.fano.value_or(2.0);
  });
  const double p0 = best->distribution(0), p1 = best->distribution(1);
  v.check(*best->mean >= 0.4 && *best->mean <= 0.6, fmt("argmin mean %.4f (in [0.4, 0.6])", *best->mean));
  v.check(within(*best->fano, 0.5, 0.02), fmt("min F %.4f (0.50 +/- 0.02)", *best->fano));
  v.check(p0 >= 0.45 && p0 <= 0.55 && p1 >= 0.45 && p1 <= 0.55,
          fmt("p0 %.4f, p1 %.4f (in [0.45, 0.55])", p0, p1));
  return v;
}

Verdict c5() {
  Verdict v;
  const double R = 20.0, gamma = 0.2;
  const SteadySolution s = solve_steady(make_params(R, gamma, {}));
  v.check(std::abs(*s.moments.fano - 1.0) <= 1e-9, fmt("|F - 1| %.2e (<= 1e-9)", std::abs(*s.moments.fano - 1.0)));
  const std::vector<double> pois = oracle::poisson(R / gamma, s.n_max);
  const Eigen::Map<const Eigen::VectorXd> q(pois.data(), static_cast<Eigen::Index>(pois.size()));
  const double tv = tv_distance(s.dist.probs, q);
  v.check(tv <= 1e-8, fmt("TV to Poisson(%.0f) %.2e (<= 1e-8)", R / gamma, tv));
  return v;
}

Verdict c6() {
  Verdict v;
  ModelParams p = m1_variant(5e-3);
  p.loading_rate = loading_rate_for_mean(p, 1.0);
  const SteadySolution s = solve_steady(p);
  v.check(s.moments.mean >= 0.95 && s.moments.mean <= 1.05,
          fmt("R %.4f gives mean %.4f (in [0.95, 1.05])", p.loading_rate, s.moments.mean));
  v.check(*s.moments.fano <= 0.1, fmt("F %.4f (<= 0.1)", *s.moments.fano));

  ModelParams lim = m1_variant(1e-6);
  lim.loading_rate = p.loading_rate;
  const SteadySolution sl = solve_steady(lim);
  v.check(sl.dist.probs(1) >= 0.99, fmt("gamma 1e-6: p1 %.5f (>= 0.99)", sl.dist.probs(1)));
  return v;
}

Verdict c7() {
  Verdict v;
  bool exact = true;
  for (int rho = 1; rho <= kMaxOrder; ++rho) {
    exact = exact && vk_steady(rho, true) == 0.5 * (1.0 + 1.0 / rho) &&
            vk_steady(rho, false) == rho / (2.0 * rho - 1.0);
  }
  v.check(exact, "vk_steady closed forms exact for rho 1..8");

  const ModelParams p3 = make_params(2e4, 1e-3, {{3, 3, 1.0}});
  const SteadySolution s = solve_steady(p3);
  v.check(s.moments.mean >= 5.0 && within(*s.moments.fano, 2.0 / 3.0, 0.01),
          fmt("rho=3 master: mean %.2f, F %.4f (2/3 +/- 0.01)", s.moments.mean, *s.moments.fano));

  // Decay from N0 = 600; the deterministic mean obeys 1/x^2 = 1/x0^2 + t.
  const double x0 = 600.0;
  std::vector<double> times;
  for (double x : {40.0, 20.0, 10.0}) times.push_back(1.0 / (x * x) - 1.0 / (x0 * x0));
  const auto ens = sample(make_params(0.0, 0.0, {{3, 3, 1.0}}), std::int64_t{600}, times, 100000, 2024);
  std::string line = "rho=3 decay:";
  bool ok = true;
  for (std::size_t k = 0; k < times.size(); ++k) {
    const auto& e = ens.est_moments[k];
    const bool good = e.mean >= 10.0 && e.fano && within(*e.fano, 0.6, 0.05);
    ok = ok && good;
    line += fmt(" <N>=%.1f F=%.3f", e.mean, e.fano.value_or(0.0));
  }
  v.check(ok, line + " (3/5 +/- 0.05)");
  return v;
}

Verdict c8() {
  Verdict v;
  const ModelParams p = preset("fig2");
  const Generator gen = build_generator(p, solve_steady(p).n_max);
  EvolveOptions opt;
  opt.rel_tol = 1e-8;
  opt.switch_to_steady = false;
  const double h = 2e-6;
  const int n = 1500;
  for (int i = 0; i <= n; ++i) opt.sample_times.push_back(i * h);
  const EvolveResult r = evolve(gen, delta_distribution(0, gen.n_max()), n * h, opt);

  std::vector<double> mean(n + 1);
  for (int i = 0; i <= n; ++i) mean[i] = moments(r.series[i]).mean;
  // Fourth-order stencils: central in the interior, one-sided at the ends.
  auto derivative = [&](int i) {
    if (i >= 2 && i <= n - 2) {
      return (mean[i - 2] - 8 * mean[i - 1] + 8 * mean[i + 1] - mean[i + 2]) / (12 * h);
    }
    const int s = i < 2 ? 1 : -1;
    const auto f = [&](int k) { return mean[i + s * k]; };
    return s * (-25 * f(0) + 48 * f(1) - 36 * f(2) + 16 * f(3) - 3 * f(4)) / (12 * h);
  };
  const double tol = 10.0 * opt.rel_tol * p.loading_rate;
  double worst = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double diff = std::abs(derivative(i) - moment_rhs(p, moments(r.series[i])));
    worst = std::max(worst, diff);
  }
  v.check(worst <= tol, fmt("max |FD - rhs| %.3e (<= %.1e) over 1501 samples", worst, tol));
  return v;
}

Verdict c9() {
  Verdict v;
  SweepSpec spec;
  spec.base = fig1_base();
  for (double target : log_grid(0.1, 32.0, 10)) {
    spec.loading_rates.push_back(loading_rate_for_mean(spec.base, target));
  }
  spec.backends = {Backend::kMaster, Backend::kMonteCarlo, Backend::kVanKampen};
  spec.n_traj = 100000;
  spec.seed = 7;
  spec.threads = 0;
  const auto rows = run_sweep(spec);

  double worst_z = 0.0, worst_vk = 0.0;
  bool mc_ok = true, vk_ok = true;
  std::string vk_bad;
  for (std::size_t i = 0; i < spec.loading_rates.size(); ++i) {
    const SweepRow *master = nullptr, *mc = nullptr, *vk = nullptr;
    for (const auto& r : rows) {
      if (r.index != i) continue;
      if (r.backend == Backend::kMaster) master = &r;
      if (r.backend == Backend::kMonteCarlo) mc = &r;
      if (r.backend == Backend::kVanKampen) vk = &r;
    }
    if (!master || !master->fano || !mc || !mc->fano) {
      mc_ok = false;
      continue;
    }
    const double z = std::abs(*master->fano - *mc->fano) / *mc->stderr_fano;
    worst_z = std::max(worst_z, z);
    mc_ok = mc_ok && z <= 3.0;
    if (*master->mean >= 2.0) {
      const double d = vk && vk->fano ? std::abs(*master->fano - *vk->fano) : INFINITY;
      worst_vk = std::max(worst_vk, d);
      if (d > 0.01) {
        vk_ok = false;
        vk_bad += fmt(" mean %.2f: F_master %.4f", *master->mean, *master->fano);
      }
    }
  }
  v.check(mc_ok, fmt("max |F_master - F_mc| / se %.2f (<= 3)", worst_z));
  v.check(vk_ok, fmt("max |F_master - F_vk| %.4f (<= 0.01)", worst_vk) + vk_bad);
  return v;
}

struct NamedParams {
  const char* name;
  ModelParams params;
};

std::vector<NamedParams> acceptance_sets() {
  ModelParams m1 = m1_variant(5e-3);
  m1.loading_rate = loading_rate_for_mean(m1, 1.0);
  ModelParams blockade = fig1_base();
  blockade.loading_rate = loading_rate_for_mean(blockade, 0.5);
  return {{"fig2", preset("fig2")},
          {"fig3b", preset("fig3b")},
          {"blockade", blockade},
          {"poisson", make_params(20.0, 0.2, {})},
          {"m=1", m1},
          {"rho=3", make_params(2e4, 1e-3, {{3, 3, 1.0}})}};
}

Verdict c10() {
  Verdict v;
  double drift = 0.0, min_p = 0.0, shift = 0.0;
  for (const auto& [name, p] : acceptance_sets()) {
    const SteadySolution s = solve_steady(p);
    const Generator gen = build_generator(p, s.n_max);
    EvolveOptions opt;
    opt.n_samples = 51;
    const EvolveResult r = evolve(gen, delta_distribution(0, s.n_max), 10.0 * relaxation_time(gen), opt);
    drift = std::max(drift, r.max_mass_drift);
    min_p = std::min(min_p, r.min_raw_probability);
    for (const auto& d : r.series) min_p = std::min(min_p, d.probs.minCoeff());

    const SteadySolution wide = solve_steady(p, 2 * s.n_max);
    shift = std::max({shift, std::abs(wide.moments.mean / s.moments.mean - 1.0),
                      std::abs(wide.moments.variance / s.moments.variance - 1.0)});
  }
  v.check(drift <= 1e-9, fmt("mass drift %.2e (<= 1e-9)", drift));
  v.check(min_p >= -1e-12, fmt("min probability %.2e (>= -1e-12)", min_p));
  v.check(shift < 1e-9, fmt("doubling n_max shift %.2e (< 1e-9)", shift));

  const std::vector<double> times{1e-3, 3e-3};
  const auto one = sample(preset("fig2"), std::int64_t{0}, times, 20000, 5, {.threads = 1});
  bool same = true;
  for (unsigned t : {2u, 3u, 8u}) {
    const auto other = sample(preset("fig2"), std::int64_t{0}, times, 20000, 5, {.threads = t});
    same = same && (other.samples.array() == one.samples.array()).all();
  }
  v.check(same, "mc identical for 1, 2, 3, 8 threads");

  double null_err = 0.0;
  const std::vector<oracle::Channel> chans{{2, 2, 3.0}, {3, 1, 0.5}};
  const ModelParams small = make_params(4.0, 0.5, {{2, 2, 3.0}, {3, 1, 0.5}});
  for (int n_max : {3, 6, 12}) {
    const auto ref = oracle::null_vector(oracle::dense_generator(4.0, 0.5, chans, n_max));
    const StateDistribution got = steady_state(build_generator(small, n_max));
    for (int k = 0; k <= n_max; ++k) {
      null_err = std::max(null_err, std::abs(got.probs(k) - static_cast<double>(ref[k])));
    }
  }
  v.check(null_err <= 1e-10, fmt("null space vs brute force %.2e (<= 1e-10)", null_err));
  return v;
}

struct Criterion {
  const char* title;
  std::function<Verdict()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria{
      {"pair-loss steady state, R = 6000", c1},
      {"large-loading steady state, R = 5e5", c2},
      {"Fano plateau above mean 2", c3},
      {"collisional blockade minimum", c4},
      {"Poisson control without pair loss", c5},
      {"one-atom-loss variant", c6},
      {"higher-order closed forms", c7},
      {"mean-number equation along evolve", c8},
      {"backend triangle", c9},
      {"property suite", c10},
  };

  std::vector<int> selected;
  if (argc > 1) {
    for (int i = 1; i < argc; ++i) selected.push_back(std::atoi(argv[i]));
  } else {
    for (int k = 1; k <= static_cast<int>(criteria.size()); ++k) selected.push_back(k);
  }

  int failures = 0;
  for (int k : selected) {
    if (k < 1 || k > static_cast<int>(criteria.size())) {
      std::fprintf(stderr, "acceptance: no criterion %d\n", k);
      return 2;
    }
    const Criterion& c = criteria[static_cast<std::size_t>(k - 1)];
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v.pass = false;
      v.detail = std::string("exception: ") + e.what();
    }
    failures += v.pass ? 0 : 1;
    std::printf("[%s] C%d %s: %s\n", v.pass ? "PASS" : "FAIL", k, c.title, v.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
