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

#ifndef TRAPSTAT_SWEEP_HPP_
#define TRAPSTAT_SWEEP_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "trapstat/distribution.hpp"
#include "trapstat/model.hpp"

namespace trapstat {

enum class Backend { kMaster, kMonteCarlo, kVanKampen };

std::string_view backend_name(Backend b);
Backend parse_backend(std::string_view name);

struct SweepSpec {
  ModelParams base;
  /// Loading rates to visit; nonempty, strictly increasing, >= 0.
  std::vector<double> loading_rates;
  std::vector<Backend> backends{Backend::kMaster};
  bool keep_distribution = false;

  std::size_t n_traj = 100000;
  /// Grid point i samples with seed + i.
  std::uint64_t seed = 1;
  /// Monte Carlo trajectories start empty and are read out after this many
  /// relaxation times (spectral gap of the master generator).
  double mc_relaxation_multiple = 30.0;
  unsigned threads = 1;
};

void validate(const SweepSpec& spec);

struct SweepRow {
  std::size_t index = 0;  // grid index
  double loading_rate = 0.0;
  Backend backend = Backend::kMaster;
  std::optional<double> mean;
  std::optional<double> variance;
  std::optional<double> fano;
  std::optional<double> stderr_fano;  // Monte Carlo only
  std::optional<std::string> error;   // set when this row failed
  int n_max = 0;                      // master rows
  double sample_time = 0.0;           // Monte Carlo rows
  Eigen::VectorXd distribution;       // master rows with keep_distribution
};

/// One row per grid point and backend, ordered by grid index then by the
/// order of spec.backends. Van Kampen rows are emitted only where the
/// expansion applies: R > 0, a single channel removing whole tuples,
/// gamma <= 1e-3 beta and leading-order mean >= 2. A failing row records its
/// error and the sweep continues.
std::vector<SweepRow> run_sweep(const SweepSpec& spec);

/// Total-variation distance between dist and the discretized normal law with
/// the same mean and variance (normal density sampled at N = 0, 1, ... and
/// normalized; its mass beyond the support counts fully). Throws
/// ValidationError when the mean is below 10.
double gaussian_check(const StateDistribution& dist);

/// Loading rate whose master steady state has the requested mean, by bisection
/// in log R (the mean increases with R). Throws ValidationError if the target
/// cannot be bracketed.
double loading_rate_for_mean(const ModelParams& base, double target_mean);

std::vector<double> log_grid(double lo, double hi, int n);

/// Log-spaced loading rates whose steady means span [mean_lo, mean_hi].
std::vector<double> fano_sweep_grid(const ModelParams& base, double mean_lo = 0.05,
                                    double mean_hi = 40.0, int n = 40);

}  // namespace trapstat

#endif  // TRAPSTAT_SWEEP_HPP_
