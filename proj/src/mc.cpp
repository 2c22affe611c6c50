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

#include "trapstat/mc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <thread>

#include "trapstat/philox.hpp"

namespace trapstat {

namespace {

std::int64_t draw_initial(const Eigen::VectorXd& cdf, TrajectoryStream& rng) {
  const double u = rng.uniform() * cdf(cdf.size() - 1);
  const auto it = std::upper_bound(cdf.data(), cdf.data() + cdf.size(), u);
  return std::min<std::int64_t>(it - cdf.data(), cdf.size() - 1);
}

void run_trajectory(const ModelParams& params, const Eigen::VectorXd& cdf,
                    std::span<const double> times, std::uint64_t seed,
                    Eigen::Index traj, OccupancySamples& out) {
  TrajectoryStream rng(seed, static_cast<std::uint64_t>(traj));
  std::int64_t n = draw_initial(cdf, rng);
  constexpr double kNever = std::numeric_limits<double>::infinity();

  double rate = total_rate(params, n);
  double t_next = rate > 0.0 ? rng.exponential(rate) : kNever;
  for (std::size_t k = 0; k < times.size(); ++k) {
    while (t_next <= times[k]) {
      double u = rng.uniform() * rate;
      std::int64_t jump = 0;
      if (u < params.loading_rate) {
        jump = 1;
      } else {
        u -= params.loading_rate;
        const double one_body = params.one_body_rate * static_cast<double>(n);
        if (u < one_body) {
          jump = -1;
        } else {
          u -= one_body;
          for (const auto& ch : params.channels) {
            const double r = event_rate(ch, n);
            if (r <= 0.0) continue;
            jump = -ch.removed;  // last positive channel absorbs rounding
            if (u < r) break;
            u -= r;
          }
          if (jump == 0) jump = one_body > 0.0 ? -1 : 1;
        }
      }
      n += jump;
      rate = total_rate(params, n);
      t_next = rate > 0.0 ? t_next + rng.exponential(rate) : kNever;
    }
    out(traj, static_cast<Eigen::Index>(k)) = n;
  }
}

}  // namespace

TrajectoryEnsemble sample(const ModelParams& params, const Eigen::VectorXd& initial_law,
                          std::span<const double> sample_times, std::size_t n_traj,
                          std::uint64_t seed, const SampleOptions& options) {
  validate(params);
  if (n_traj < 1) throw ValidationError("n_traj must be >= 1");
  if (sample_times.empty()) throw ValidationError("at least one sample time required");
  if (!std::is_sorted(sample_times.begin(), sample_times.end()) ||
      sample_times.front() < 0.0 || !std::isfinite(sample_times.back())) {
    throw ValidationError("sample times must be finite, >= 0 and ascending");
  }
  if (initial_law.size() == 0 || initial_law.minCoeff() < 0.0 || !(initial_law.sum() > 0.0)) {
    throw ValidationError("initial law must be a non-negative, non-empty weight vector");
  }

  Eigen::VectorXd cdf(initial_law.size());
  std::partial_sum(initial_law.begin(), initial_law.end(), cdf.begin());

  TrajectoryEnsemble ens;
  ens.params = params;
  ens.seed = seed;
  ens.sample_times.assign(sample_times.begin(), sample_times.end());
  ens.samples.resize(static_cast<Eigen::Index>(n_traj),
                     static_cast<Eigen::Index>(sample_times.size()));

  unsigned threads = options.threads ? options.threads : std::thread::hardware_concurrency();
  threads = std::clamp<unsigned>(threads, 1, static_cast<unsigned>(std::min<std::size_t>(n_traj, 1024)));
  const auto total = static_cast<Eigen::Index>(n_traj);
  auto work = [&](Eigen::Index begin, Eigen::Index end) {
    for (Eigen::Index i = begin; i < end; ++i) {
      run_trajectory(params, cdf, sample_times, seed, i, ens.samples);
    }
  };
  if (threads == 1) {
    work(0, total);
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (unsigned w = 0; w < threads; ++w) {
      const Eigen::Index begin = total * w / threads;
      const Eigen::Index end = total * (w + 1) / threads;
      pool.emplace_back(work, begin, end);
    }
  }

  ens.est_moments.reserve(sample_times.size());
  for (Eigen::Index k = 0; k < ens.samples.cols(); ++k) {
    ens.est_moments.push_back(estimate_moments(ens.samples.col(k)));
  }
  return ens;
}

TrajectoryEnsemble sample(const ModelParams& params, std::int64_t initial_occupancy,
                          std::span<const double> sample_times, std::size_t n_traj,
                          std::uint64_t seed, const SampleOptions& options) {
  if (initial_occupancy < 0) throw ValidationError("initial occupancy must be >= 0");
  Eigen::VectorXd law = Eigen::VectorXd::Zero(initial_occupancy + 1);
  law(initial_occupancy) = 1.0;
  return sample(params, law, sample_times, n_traj, seed, options);
}

StateDistribution histogram(const TrajectoryEnsemble& ens, double t) {
  const auto it = std::find(ens.sample_times.begin(), ens.sample_times.end(), t);
  if (it == ens.sample_times.end()) throw ValidationError("unknown sample time");
  const auto k = static_cast<Eigen::Index>(it - ens.sample_times.begin());
  const auto column = ens.samples.col(k);
  StateDistribution d;
  d.probs = Eigen::VectorXd::Zero(column.maxCoeff() + 1);
  for (Eigen::Index i = 0; i < column.size(); ++i) d.probs(column(i)) += 1.0;
  d.probs /= static_cast<double>(column.size());
  d.time = t;
  d.n_samples = static_cast<std::size_t>(column.size());
  return d;
}

double bootstrap_fano_se(
    const Eigen::Ref<const Eigen::Matrix<std::int64_t, Eigen::Dynamic, 1>>& occupancy,
    int n_resamples, std::uint64_t seed) {
  if (n_resamples < 2) throw ValidationError("need at least two bootstrap resamples");
  const Eigen::Index n = occupancy.size();
  if (n < 2) throw ValidationError("need at least two samples");
  Eigen::ArrayXd fanos(n_resamples);
  Eigen::Matrix<std::int64_t, Eigen::Dynamic, 1> draw(n);
  for (int b = 0; b < n_resamples; ++b) {
    TrajectoryStream rng(seed, static_cast<std::uint64_t>(b));
    for (Eigen::Index i = 0; i < n; ++i) {
      draw(i) = occupancy(static_cast<Eigen::Index>(rng.uniform() * static_cast<double>(n)));
    }
    fanos(b) = estimate_moments(draw).fano.value_or(0.0);
  }
  const double mean = fanos.mean();
  return std::sqrt((fanos - mean).square().sum() / (n_resamples - 1));
}

}  // namespace trapstat
