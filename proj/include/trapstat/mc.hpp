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

#ifndef TRAPSTAT_MC_HPP_
#define TRAPSTAT_MC_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "trapstat/distribution.hpp"
#include "trapstat/model.hpp"

namespace trapstat {

/// Sample mean, variance and Fano factor with standard errors. The Fano error
/// uses the delta method on (mean, variance), including their covariance
/// through the third central moment.
struct MomentEstimate {
  double mean = 0.0;
  double mean_se = 0.0;
  double variance = 0.0;
  double variance_se = 0.0;
  std::optional<double> fano;
  double fano_se = 0.0;
};

using OccupancySamples = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>;

struct TrajectoryEnsemble {
  ModelParams params;
  std::uint64_t seed = 0;
  std::vector<double> sample_times;
  /// samples(trajectory, time index): occupancy of each trajectory.
  OccupancySamples samples;
  std::vector<MomentEstimate> est_moments;  // one per sample time

  Eigen::Index n_traj() const { return samples.rows(); }
};

struct SampleOptions {
  /// Worker threads; 0 uses the hardware concurrency. Never affects results.
  unsigned threads = 0;
};

/// Exact event-driven realizations of the jump process. At occupancy N the
/// waiting time is exponential with rate R + gamma N + sum beta C(N, rho);
/// the event is chosen proportionally to its rate. Trajectory i draws from
/// TrajectoryStream(seed, i), so results are bit-identical for any thread
/// count. Initial occupancy is drawn from `initial_law` (probabilities over
/// 0..size-1).
TrajectoryEnsemble sample(const ModelParams& params, const Eigen::VectorXd& initial_law,
                          std::span<const double> sample_times, std::size_t n_traj,
                          std::uint64_t seed, const SampleOptions& options = {});

TrajectoryEnsemble sample(const ModelParams& params, std::int64_t initial_occupancy,
                          std::span<const double> sample_times, std::size_t n_traj,
                          std::uint64_t seed, const SampleOptions& options = {});

/// Empirical occupancy frequencies at a recorded sample time; n_samples is set
/// to the trajectory count. Throws ValidationError for an unknown time.
StateDistribution histogram(const TrajectoryEnsemble& ens, double t);

template <typename Derived>
MomentEstimate estimate_moments(const Eigen::DenseBase<Derived>& occupancy);

/// Bootstrap standard error of the Fano factor (resampling trajectories).
double bootstrap_fano_se(const Eigen::Ref<const Eigen::Matrix<std::int64_t, Eigen::Dynamic, 1>>& occupancy,
                         int n_resamples, std::uint64_t seed);

template <typename Derived>
MomentEstimate estimate_moments(const Eigen::DenseBase<Derived>& occupancy) {
  const Eigen::ArrayXd x = occupancy.derived().template cast<double>().array();
  const double n = static_cast<double>(x.size());
  MomentEstimate e;
  if (x.size() == 0) return e;
  e.mean = x.mean();
  const Eigen::ArrayXd dev = x - e.mean;
  const double m2 = dev.square().sum() / n;
  const double m3 = dev.cube().sum() / n;
  const double m4 = dev.square().square().sum() / n;
  e.variance = x.size() > 1 ? dev.square().sum() / (n - 1.0) : 0.0;
  e.mean_se = std::sqrt(e.variance / n);
  const double var_var = std::max(0.0, (m4 - m2 * m2) / n);
  e.variance_se = std::sqrt(var_var);
  if (e.mean > 0.0) {
    const double f = e.variance / e.mean;
    e.fano = f;
    const double var_mean = e.variance / n;
    const double cov = m3 / n;
    const double var_f = var_var / (e.mean * e.mean) + f * f * var_mean / (e.mean * e.mean) -
                         2.0 * f * cov / (e.mean * e.mean);
    e.fano_se = std::sqrt(std::max(0.0, var_f));
  }
  return e;
}

}  // namespace trapstat

#endif  // TRAPSTAT_MC_HPP_
