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

#ifndef TRAPSTAT_MODEL_HPP_
#define TRAPSTAT_MODEL_HPP_

#include <cstdint>
#include <string_view>
#include <vector>

#include "trapstat/errors.hpp"

namespace trapstat {

/// Largest collision order accepted. Binomial coefficients C(n, order) are
/// evaluated exactly in 128-bit integers, which covers every n up to
/// kMaxOccupancy for this order.
__extension__ typedef unsigned __int128 uint128;

inline constexpr int kMaxOrder = 8;
inline constexpr long kMaxOccupancy = 10000;

/// A rho-body loss process: events occur at rate rate_const * C(N, order) and
/// each event removes `removed` atoms.
struct LossChannel {
  int order = 2;
  int removed = 2;
  double rate_const = 0.0;  // s^-1 per order-tuple; (at.s)^-1 for order 2

  bool operator==(const LossChannel&) const = default;
};

/// Loading and loss kinetics of a single trap. Immutable once validated.
struct ModelParams {
  double loading_rate = 0.0;   // R, atoms/s
  double one_body_rate = 0.0;  // gamma, s^-1
  std::vector<LossChannel> channels;

  bool operator==(const ModelParams&) const = default;
};

/// Throws ValidationError unless every rate is finite and non-negative, every
/// channel has 1 <= removed <= order <= kMaxOrder, and at least one process
/// has a nonzero rate.
void validate(const ModelParams& params);

/// Validating constructor.
ModelParams make_params(double loading_rate, double one_body_rate,
                        std::vector<LossChannel> channels = {});

/// Exact binomial coefficient C(n, k); throws if it does not fit 128 bits.
uint128 binomial(long n, int k);

/// rate_const * C(n, order); zero when n < order.
double event_rate(const LossChannel& channel, long n);

/// Total jump rate out of occupancy n: R + gamma n + sum of channel rates.
double total_rate(const ModelParams& params, long n);

/// Closed-form asymptotic steady mean for the two textbook regimes:
/// sqrt(R / beta') when R >> beta' >> gamma with a single pair-loss channel,
/// and R / gamma when there are no channels or R << gamma. Only meant for
/// sizing the state space and for sanity reporting. Throws ValidationError
/// outside those regimes ("no closed form; use master backend").
double predict_steady_mean(const ModelParams& params);

/// Largest `removed` count over all channels (1 if only one-body losses).
int max_removed(const ModelParams& params);
int max_order(const ModelParams& params);

/// Rate constant of the single (2, m) channel, or throws if the parameter set
/// is not exactly one two-body channel.
const LossChannel& single_pair_channel(const ModelParams& params);

/// Named parameter sets:
///   fig1, fig3a   gamma = 0.2, beta' = 500, pair losses (R = 6000 base)
///   fig2          R = 6000, gamma = 0.2, beta' = 500, pair losses
///   fig3a-dashed  gamma = 5e-3, beta' = 500, one atom lost per collision
///   fig3b         R = 5e5, gamma = 0.2, beta' = 500, pair losses
/// beta' = 500 (at.s)^-1 throughout.
ModelParams preset(std::string_view name);
std::vector<std::string_view> preset_names();

}  // namespace trapstat

#endif  // TRAPSTAT_MODEL_HPP_
