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

#include "trapstat/sweep.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <exception>
#include <thread>

#include "trapstat/generator.hpp"
#include "trapstat/master.hpp"
#include "trapstat/mc.hpp"
#include "trapstat/vankampen.hpp"

namespace trapstat {

namespace {

constexpr std::array<std::pair<Backend, std::string_view>, 3> kBackendNames{{
    {Backend::kMaster, "master"},
    {Backend::kMonteCarlo, "mc"},
    {Backend::kVanKampen, "vankampen"},
}};

constexpr double kVanKampenMinMean = 2.0;
constexpr double kVanKampenMaxGammaRatio = 1e-3;

ModelParams with_loading(const ModelParams& base, double R) {
  ModelParams p = base;
  p.loading_rate = R;
  return p;
}

bool vankampen_applies(const ModelParams& p) {
  if (p.loading_rate <= 0.0 || p.channels.size() != 1) return false;
  const LossChannel& ch = p.channels.front();
  if (ch.removed != ch.order || ch.rate_const <= 0.0) return false;
  if (p.one_body_rate > kVanKampenMaxGammaRatio * ch.rate_const) return false;
  return vk_steady_mean(p) >= kVanKampenMinMean;
}

// Rows for one grid point, in backend order.
std::vector<SweepRow> run_point(const SweepSpec& spec, std::size_t index) {
  const double R = spec.loading_rates[index];
  const ModelParams params = with_loading(spec.base, R);
  std::vector<SweepRow> rows;
  std::optional<SteadySolution> steady;

  auto solve_master = [&]() -> const SteadySolution& {
    if (!steady) steady = solve_steady(params);
    return *steady;
  };

  for (const Backend backend : spec.backends) {
    SweepRow row;
    row.index = index;
    row.loading_rate = R;
    row.backend = backend;
    try {
      switch (backend) {
        case Backend::kMaster: {
          const SteadySolution& s = solve_master();
          row.mean = s.moments.mean;
          row.variance = s.moments.variance;
          row.fano = s.moments.fano;
          row.n_max = s.n_max;
          if (spec.keep_distribution) row.distribution = s.dist.probs;
          break;
        }
        case Backend::kMonteCarlo: {
          const SteadySolution& s = solve_master();
          const double t = spec.mc_relaxation_multiple *
                           relaxation_time(build_generator(params, s.n_max));
          const std::array<double, 1> times{t};
          SampleOptions opt;
          opt.threads = 1;
          const TrajectoryEnsemble ens =
              sample(params, std::int64_t{0}, times, spec.n_traj, spec.seed + index, opt);
          const MomentEstimate& e = ens.est_moments.front();
          row.mean = e.mean;
          row.variance = e.variance;
          row.fano = e.fano;
          row.stderr_fano = e.fano_se;
          row.sample_time = t;
          break;
        }
        case Backend::kVanKampen: {
          if (!vankampen_applies(params)) continue;
          const double mean = vk_steady_mean(params);
          const double f = vk_steady(params.channels.front(), /*loading=*/true);
          row.mean = mean;
          row.variance = f * mean;
          row.fano = f;
          break;
        }
      }
    } catch (const std::exception& e) {
      row.error = e.what();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

std::string_view backend_name(Backend b) {
  for (const auto& [backend, name] : kBackendNames) {
    if (backend == b) return name;
  }
  return "unknown";
}

Backend parse_backend(std::string_view name) {
  for (const auto& [backend, n] : kBackendNames) {
    if (n == name) return backend;
  }
  throw ValidationError("unknown backend '" + std::string(name) + "'");
}

void validate(const SweepSpec& spec) {
  if (spec.loading_rates.empty()) throw ValidationError("sweep grid is empty");
  for (std::size_t i = 0; i < spec.loading_rates.size(); ++i) {
    const double r = spec.loading_rates[i];
    if (!(r >= 0.0) || !std::isfinite(r)) {
      throw ValidationError("sweep grid values must be finite and >= 0");
    }
    if (i > 0 && !(r > spec.loading_rates[i - 1])) {
      throw ValidationError("sweep grid must be strictly increasing");
    }
  }
  if (spec.backends.empty()) throw ValidationError("no backend selected");
  if (spec.n_traj < 1) throw ValidationError("n_traj must be >= 1");
  if (!(spec.mc_relaxation_multiple > 0.0)) {
    throw ValidationError("mc relaxation multiple must be > 0");
  }
  // Rates other than R are checked with a representative loading rate.
  validate(with_loading(spec.base, spec.loading_rates.back()));
}

std::vector<SweepRow> run_sweep(const SweepSpec& spec) {
  validate(spec);
  const std::size_t points = spec.loading_rates.size();
  std::vector<std::vector<SweepRow>> per_point(points);
  const unsigned threads =
      std::clamp<unsigned>(spec.threads, 1, static_cast<unsigned>(points));
  if (threads == 1) {
    for (std::size_t i = 0; i < points; ++i) per_point[i] = run_point(spec, i);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < threads; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t i = w; i < points; i += threads) per_point[i] = run_point(spec, i);
      });
    }
  }
  std::vector<SweepRow> rows;
  for (auto& point : per_point) {
    for (auto& row : point) rows.push_back(std::move(row));
  }
  return rows;
}

double gaussian_check(const StateDistribution& dist) {
  const Moments m = moments(dist);
  if (m.mean < 10.0) {
    throw ValidationError("Gaussian comparison needs a mean of at least 10");
  }
  const double sigma = std::sqrt(m.variance);
  if (!(sigma > 0.0)) throw ValidationError("Gaussian comparison needs nonzero variance");
  // Normal density sampled at the integers N >= 0 and normalized; its
  // variance equals sigma^2 up to terms of order exp(-2 pi^2 sigma^2).
  const auto support = dist.probs.size();
  const auto extent = std::max<Eigen::Index>(
      support, static_cast<Eigen::Index>(std::ceil(m.mean + 40.0 * sigma)) + 1);
  Eigen::ArrayXd g(extent);
  for (Eigen::Index n = 0; n < extent; ++n) {
    const double z = (static_cast<double>(n) - m.mean) / sigma;
    g(n) = std::exp(-0.5 * z * z);
  }
  g /= g.sum();
  const double inside = (dist.probs.array() - g.head(support)).abs().sum();
  const double outside = g.tail(extent - support).sum();
  return 0.5 * (inside + outside);
}

double loading_rate_for_mean(const ModelParams& base, double target_mean) {
  if (!(target_mean > 0.0) || !std::isfinite(target_mean)) {
    throw ValidationError("target mean must be finite and > 0");
  }
  auto mean_at = [&](double log_r) {
    return solve_steady(with_loading(base, std::exp(log_r))).moments.mean;
  };
  double lo = 0.0;
  double hi = 0.0;
  int expansions = 0;
  while (mean_at(lo) > target_mean) {
    lo -= std::log(10.0);
    if (++expansions > 40) throw ValidationError("cannot bracket target mean from below");
  }
  while (mean_at(hi) < target_mean) {
    hi += std::log(10.0);
    if (++expansions > 40) throw ValidationError("cannot bracket target mean from above");
  }
  for (int it = 0; it < 200 && hi - lo > 1e-13; ++it) {
    const double mid = 0.5 * (lo + hi);
    (mean_at(mid) < target_mean ? lo : hi) = mid;
  }
  return std::exp(0.5 * (lo + hi));
}

std::vector<double> log_grid(double lo, double hi, int n) {
  if (!(lo > 0.0) || !(hi > lo) || n < 2) {
    throw ValidationError("log grid needs 0 < lo < hi and n >= 2");
  }
  std::vector<double> g(static_cast<std::size_t>(n));
  const double a = std::log(lo);
  const double b = std::log(hi);
  for (int i = 0; i < n; ++i) g[static_cast<std::size_t>(i)] = std::exp(a + (b - a) * i / (n - 1));
  g.front() = lo;
  g.back() = hi;
  return g;
}

std::vector<double> fano_sweep_grid(const ModelParams& base, double mean_lo, double mean_hi,
                                    int n) {
  return log_grid(loading_rate_for_mean(base, mean_lo), loading_rate_for_mean(base, mean_hi), n);
}

}  // namespace trapstat
