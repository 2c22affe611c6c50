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

#ifndef TRAPSTAT_VANKAMPEN_HPP_
#define TRAPSTAT_VANKAMPEN_HPP_

#include <optional>
#include <vector>

#include "trapstat/model.hpp"

namespace trapstat {

/// Linear-noise state for loading against pair losses, with
/// N(tau) = <N>_st phi(tau) + sqrt(<N>_st) xi(tau):
///   phi  deterministic occupancy fraction, order 1
///   xi2  <xi^2>, the scaled fluctuation variance
///   tau  dimensionless time t sqrt(R beta')
/// The expansion parameter 1 / sqrt(<N>_st) must be small for the state to
/// describe the atom number.
struct VanKampenState {
  double phi = 0.0;
  double xi2 = 0.0;
  double tau = 0.0;
};

/// phi below this is too close to the empty trap for the expansion; the Fano
/// factor is not reported there.
inline constexpr double kFanoPhiThreshold = 0.05;

/// <xi^2> / phi, or empty while phi <= kFanoPhiThreshold.
std::optional<double> fano(const VanKampenState& s);

/// t sqrt(R beta'). Requires R > 0 and exactly one two-body channel.
double to_dimensionless(const ModelParams& params, double t);

struct VanKampenOptions {
  double rel_tol = 1e-12;
  double abs_tol = 1e-13;
  int n_samples = 201;  // equally spaced outputs on [tau0, tau_end]
};

/// Integrates
///   dphi/dtau   = 1 - phi^2
///   d<xi^2>/dtau = -4 phi <xi^2> + 1 + 2 phi^2
/// from s0 to tau_end. Requires phi0 in [0, 1], xi2 >= 0, tau_end > s0.tau.
std::vector<VanKampenState> vk_evolve(const VanKampenState& s0, double tau_end,
                                      const VanKampenOptions& options = {});

/// tanh(tau - tau0 + atanh phi0), the exact solution of the phi equation.
double phi_closed_form(double phi0, double elapsed);

/// Steady-state Fano factor when collisions remove whole rho-tuples:
/// (1 + 1/rho) / 2 with loading, rho / (2 rho - 1) for pure decay.
double vk_steady(int rho, bool loading);

/// Channel form; throws ValidationError unless removed == order, for which no
/// closed form is known.
double vk_steady(const LossChannel& channel, bool loading);

/// Leading-order steady mean of a single rho-tuple loss channel with loading:
/// the root of R = rho beta x^rho / rho!, i.e. sqrt(R / beta') for pairs.
double vk_steady_mean(const ModelParams& params);

}  // namespace trapstat

#endif  // TRAPSTAT_VANKAMPEN_HPP_
