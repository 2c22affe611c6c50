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

#include "trapstat/model.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>

namespace trapstat {

namespace {

bool finite_non_negative(double x) { return std::isfinite(x) && x >= 0.0; }

// Strong separation used to decide that an asymptotic regime applies.
constexpr double kRegimeRatio = 10.0;

}  // namespace

void validate(const ModelParams& params) {
  if (!finite_non_negative(params.loading_rate)) {
    throw ValidationError("loading rate must be finite and >= 0");
  }
  if (!finite_non_negative(params.one_body_rate)) {
    throw ValidationError("one-body rate must be finite and >= 0");
  }
  bool any_loss = false;
  for (const auto& ch : params.channels) {
    if (ch.order < 1 || ch.order > kMaxOrder) {
      throw ValidationError("channel order must be in [1, " +
                            std::to_string(kMaxOrder) + "]");
    }
    if (ch.removed < 1 || ch.removed > ch.order) {
      throw ValidationError("channel must remove between 1 and order atoms");
    }
    if (!finite_non_negative(ch.rate_const)) {
      throw ValidationError("channel rate constant must be finite and >= 0");
    }
    any_loss = any_loss || ch.rate_const > 0.0;
  }
  if (params.loading_rate == 0.0 && params.one_body_rate == 0.0 && !any_loss) {
    throw ValidationError("all rates are zero; the dynamics are trivial");
  }
}

ModelParams make_params(double loading_rate, double one_body_rate,
                        std::vector<LossChannel> channels) {
  ModelParams p{loading_rate, one_body_rate, std::move(channels)};
  validate(p);
  return p;
}

uint128 binomial(long n, int k) {
  if (k < 0 || n < 0 || k > n) return 0;
  k = static_cast<int>(std::min<long>(k, n - k));
  using u128 = uint128;
  constexpr u128 kMax = ~u128{0};
  u128 c = 1;
  // c * (n - i) is divisible by (i + 1) at every step.
  for (int i = 0; i < k; ++i) {
    const u128 factor = static_cast<u128>(n - i);
    if (c > kMax / factor) throw ValidationError("binomial coefficient overflow");
    c = c * factor / static_cast<u128>(i + 1);
  }
  return c;
}

double event_rate(const LossChannel& channel, long n) {
  if (n < channel.order || channel.rate_const == 0.0) return 0.0;
  return channel.rate_const * static_cast<double>(binomial(n, channel.order));
}

double total_rate(const ModelParams& params, long n) {
  double rate = params.loading_rate + params.one_body_rate * static_cast<double>(n);
  for (const auto& ch : params.channels) rate += event_rate(ch, n);
  return rate;
}

int max_removed(const ModelParams& params) {
  int m = 1;
  for (const auto& ch : params.channels) m = std::max(m, ch.removed);
  return m;
}

int max_order(const ModelParams& params) {
  int m = 1;
  for (const auto& ch : params.channels) m = std::max(m, ch.order);
  return m;
}

const LossChannel& single_pair_channel(const ModelParams& params) {
  if (params.channels.size() != 1 || params.channels.front().order != 2) {
    throw ValidationError("requires exactly one two-body loss channel");
  }
  return params.channels.front();
}

double predict_steady_mean(const ModelParams& params) {
  validate(params);
  const double R = params.loading_rate;
  const double gamma = params.one_body_rate;
  const bool lossless_channels =
      std::all_of(params.channels.begin(), params.channels.end(),
                  [](const LossChannel& ch) { return ch.rate_const == 0.0; });

  if (lossless_channels) {
    if (gamma == 0.0) {
      throw ValidationError("no closed form; use master backend (no losses)");
    }
    return R / gamma;
  }
  if (params.channels.size() == 1) {
    const auto& ch = params.channels.front();
    if (ch.order == 2 && ch.removed == 2) {
      const double beta = ch.rate_const;
      if (R >= kRegimeRatio * beta && beta >= kRegimeRatio * gamma) {
        return std::sqrt(R / beta);
      }
      if (gamma > 0.0 && R * kRegimeRatio <= gamma) return R / gamma;
    }
  }
  throw ValidationError("no closed form; use master backend");
}

namespace {

struct NamedPreset {
  std::string_view name;
  double loading_rate;
  double one_body_rate;
  int removed;
};

constexpr double kBetaPair = 500.0;

constexpr std::array<NamedPreset, 5> kPresets{{
    {"fig1", 6000.0, 0.2, 2},
    {"fig2", 6000.0, 0.2, 2},
    {"fig3a", 6000.0, 0.2, 2},
    // R = 1.6 s^-1 puts the mean occupancy near one atom.
    {"fig3a-dashed", 1.6, 5e-3, 1},
    {"fig3b", 5e5, 0.2, 2},
}};

}  // namespace

ModelParams preset(std::string_view name) {
  for (const auto& p : kPresets) {
    if (p.name == name) {
      return make_params(p.loading_rate, p.one_body_rate,
                         {LossChannel{2, p.removed, kBetaPair}});
    }
  }
  throw ValidationError("unknown preset '" + std::string(name) + "'");
}

std::vector<std::string_view> preset_names() {
  std::vector<std::string_view> names;
  for (const auto& p : kPresets) names.push_back(p.name);
  return names;
}

}  // namespace trapstat
