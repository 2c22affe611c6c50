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

#include "trapstat/vankampen.hpp"

#include <cmath>

#include <Eigen/Core>

#include "trapstat/ode.hpp"

namespace trapstat {

std::optional<double> fano(const VanKampenState& s) {
  if (s.phi <= kFanoPhiThreshold) return std::nullopt;
  return s.xi2 / s.phi;
}

double to_dimensionless(const ModelParams& params, double t) {
  validate(params);
  const LossChannel& ch = single_pair_channel(params);
  if (!(params.loading_rate > 0.0) || !(ch.rate_const > 0.0)) {
    throw ValidationError("dimensionless time needs R > 0 and beta' > 0");
  }
  return t * std::sqrt(params.loading_rate * ch.rate_const);
}

double phi_closed_form(double phi0, double elapsed) {
  if (phi0 >= 1.0) return 1.0;
  return std::tanh(elapsed + std::atanh(phi0));
}

std::vector<VanKampenState> vk_evolve(const VanKampenState& s0, double tau_end,
                                      const VanKampenOptions& options) {
  if (!(s0.phi >= 0.0 && s0.phi <= 1.0)) throw ValidationError("phi0 must lie in [0, 1]");
  if (!(s0.xi2 >= 0.0) || !std::isfinite(s0.xi2)) throw ValidationError("xi2 must be >= 0");
  if (!(tau_end > s0.tau) || !std::isfinite(tau_end)) {
    throw ValidationError("tau_end must exceed the initial tau");
  }
  if (options.n_samples < 2) throw ValidationError("n_samples must be >= 2");

  std::vector<double> taus(static_cast<std::size_t>(options.n_samples));
  for (int i = 0; i < options.n_samples; ++i) {
    taus[static_cast<std::size_t>(i)] =
        s0.tau + (tau_end - s0.tau) * static_cast<double>(i) / (options.n_samples - 1);
  }
  taus.back() = tau_end;

  auto rhs = [](double, const Eigen::Vector2d& y, Eigen::Vector2d& dy) {
    const double phi = y(0);
    dy(0) = 1.0 - phi * phi;
    dy(1) = -4.0 * phi * y(1) + 1.0 + 2.0 * phi * phi;
  };

  OdeOptions ode;
  ode.rel_tol = options.rel_tol;
  ode.abs_tol = options.abs_tol;
  Eigen::Vector2d y(s0.phi, s0.xi2);
  std::vector<VanKampenState> out;
  out.reserve(taus.size());
  integrate_dopri5(rhs, y, s0.tau, std::span<const double>(taus), ode,
                   [&](double tau, const Eigen::Vector2d& state) {
                     // The phi flow preserves [0, 1]; trim rounding overshoot.
                     out.push_back({std::min(state(0), 1.0), std::max(state(1), 0.0), tau});
                     return true;
                   });
  return out;
}

double vk_steady(int rho, bool loading) {
  if (rho < 1) throw ValidationError("rho must be >= 1");
  const double r = rho;
  return loading ? 0.5 * (1.0 + 1.0 / r) : r / (2.0 * r - 1.0);
}

double vk_steady(const LossChannel& channel, bool loading) {
  if (channel.removed != channel.order) {
    throw ValidationError("no closed-form Fano factor when removed != order");
  }
  return vk_steady(channel.order, loading);
}

double vk_steady_mean(const ModelParams& params) {
  validate(params);
  if (params.channels.size() != 1 || !(params.loading_rate > 0.0)) {
    throw ValidationError("leading-order mean needs R > 0 and a single loss channel");
  }
  const LossChannel& ch = params.channels.front();
  if (ch.removed != ch.order || !(ch.rate_const > 0.0)) {
    throw ValidationError("leading-order mean needs a channel removing whole tuples");
  }
  const double rho = ch.order;
  return std::pow(params.loading_rate * std::tgamma(rho) / ch.rate_const, 1.0 / rho);
}

}  // namespace trapstat
