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

#ifndef TRAPSTAT_MASTER_HPP_
#define TRAPSTAT_MASTER_HPP_

#include <optional>
#include <vector>

#include "trapstat/distribution.hpp"
#include "trapstat/generator.hpp"
#include "trapstat/ode.hpp"

namespace trapstat {

struct EvolveOptions {
  double rel_tol = 1e-8;
  /// Absolute error floor per probability; <= 0 selects 1e-6 * rel_tol, which
  /// keeps integration noise in empty tail states far below 1e-12.
  double abs_tol = 0.0;
  /// Output times. Empty selects n_samples equally spaced points on [0, t_end].
  std::vector<double> sample_times;
  int n_samples = 101;
  std::size_t max_steps = 50'000'000;
  /// Once t >= 50 relaxation times and ||dp/dt||_1 < 1e-10 * R, finish with
  /// the direct steady-state solve instead of integrating further.
  bool switch_to_steady = true;
};

struct EvolveResult {
  std::vector<StateDistribution> series;
  OdeStats stats;
  /// max |sum(p) - 1| and min p over the raw integrator states at the outputs.
  double max_mass_drift = 0.0;
  double min_raw_probability = 0.0;
  std::optional<double> switched_to_steady_at;
};

inline constexpr double kNegativeClampTolerance = 1e-12;

/// Integrates dp/dt = A p from p0 (at time p0.time) to p0.time + t_end.
/// rel_tol must lie in [1e-12, 1e-3]. Output distributions have tiny negative
/// entries (>= -1e-12) clamped to zero and are renormalized; anything more
/// negative is a NumericalError.
EvolveResult evolve(const Generator& gen, const StateDistribution& p0,
                    double t_end, const EvolveOptions& options = {});

/// Normalized null vector of A, computed by a sparse LU solve with one balance
/// row replaced by sum(p) = 1. Throws ValidationError when the truncated chain
/// has more than one closed class (non-unique steady state), NumericalError if
/// the residual ||A p||_inf exceeds 1e-10 * max_rate.
StateDistribution steady_state(const Generator& gen);

/// Number of closed communicating classes of the truncated chain.
int count_closed_classes(const Generator& gen);

struct SteadySolution {
  StateDistribution dist;
  Moments moments;
  int n_max = 0;
  TruncationDiagnostic truncation;
};

/// Steady state with automatic truncation: starting at default_n_max, n_max is
/// doubled until the top-10% tail mass drops below 1e-14 (or the cap is hit).
/// An explicit n_max disables refinement.
SteadySolution solve_steady(const ModelParams& params,
                            std::optional<int> n_max = std::nullopt);

/// Right-hand side of the mean-number equation for a single pair-loss channel:
///   R - gamma <N> - beta' <N>(<N> - 1) - beta' Var N.
/// Throws ValidationError for any other channel configuration.
double moment_rhs(const ModelParams& params, const Moments& m);

/// Heuristic relaxation time from the rate scales alone: 1 / sqrt(R beta')
/// for pair losses (R^(1 - 1/rho) beta^(1/rho) in general), bounded by
/// 1 / gamma.
double relaxation_time(const ModelParams& params);

/// Relaxation time from the spectral gap of the generator (dense eigenvalue
/// solve; n_max <= 400, otherwise falls back to the heuristic).
double relaxation_time(const Generator& gen);

}  // namespace trapstat

#endif  // TRAPSTAT_MASTER_HPP_
