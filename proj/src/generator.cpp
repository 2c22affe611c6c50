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

#include "trapstat/generator.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>
#include <vector>

namespace trapstat {

Generator::Generator(ModelParams params, int n_max, SparseRates rates)
    : params_(std::move(params)), n_max_(n_max), rates_(std::move(rates)) {
  max_rate_ = rates_.diagonal().cwiseAbs().maxCoeff();
}

Generator build_generator(const ModelParams& params, int n_max) {
  validate(params);
  if (n_max < 1) throw ValidationError("n_max must be >= 1");
  if (n_max < max_order(params)) {
    throw ValidationError("n_max " + std::to_string(n_max) +
                          " cannot hold a single loss event of order " +
                          std::to_string(max_order(params)));
  }
  if (n_max > kMaxOccupancy) {
    throw ValidationError("n_max exceeds " + std::to_string(kMaxOccupancy));
  }

  const double R = params.loading_rate;
  const double gamma = params.one_body_rate;
  std::vector<Eigen::Triplet<double>> entries;
  entries.reserve(static_cast<std::size_t>(n_max + 1) * (3 + params.channels.size()));

  for (int j = 0; j <= n_max; ++j) {
    double outflow = 0.0;
    if (j < n_max && R > 0.0) {
      entries.emplace_back(j + 1, j, R);
      outflow += R;
    }
    if (j > 0 && gamma > 0.0) {
      const double rate = gamma * j;
      entries.emplace_back(j - 1, j, rate);
      outflow += rate;
    }
    for (const auto& ch : params.channels) {
      const double rate = event_rate(ch, j);
      if (rate > 0.0) {
        entries.emplace_back(j - ch.removed, j, rate);
        outflow += rate;
      }
    }
    entries.emplace_back(j, j, outflow > 0.0 ? -outflow : 0.0);
  }

  SparseRates A(n_max + 1, n_max + 1);
  // Two channels with the same jump size land on the same entry; duplicates
  // are summed.
  A.setFromTriplets(entries.begin(), entries.end());
  A.makeCompressed();
  return Generator(params, n_max, std::move(A));
}

int default_n_max(const ModelParams& params) {
  double n = 10.0;
  const double R = params.loading_rate;
  bool any_channel = false;
  for (const auto& ch : params.channels) {
    if (ch.rate_const <= 0.0) continue;
    any_channel = true;
    // Deterministic balance R = m beta N^rho / rho! sets the scale; for pair
    // losses this is sqrt(R / beta).
    const double scale = std::pow(
        R * std::tgamma(ch.order + 1.0) / (ch.removed * ch.rate_const),
        1.0 / ch.order);
    n = std::max(n, std::ceil(4.0 * scale));
  }
  if (!any_channel && params.one_body_rate > 0.0) {
    n = std::max(n, std::ceil(4.0 * R / params.one_body_rate));
  }
  n = std::max<double>(n, max_order(params));
  return static_cast<int>(std::min<double>(n, kMaxOccupancy));
}

TruncationDiagnostic truncation_check(const StateDistribution& dist) {
  const Eigen::Index size = dist.probs.size();
  const auto tail = std::max<Eigen::Index>(
      1, static_cast<Eigen::Index>(std::ceil(0.1 * static_cast<double>(size))));
  TruncationDiagnostic diag;
  diag.tail_begin = size - tail;
  diag.tail_mass = dist.probs.tail(tail).cwiseMax(0.0).sum();
  diag.flagged = diag.tail_mass > kTruncationThreshold;
  return diag;
}

void write_coo_csv(std::ostream& os, const Generator& gen) {
  os << "row,col,rate\n";
  os.precision(17);
  const auto& A = gen.rates();
  for (Eigen::Index col = 0; col < A.outerSize(); ++col) {
    for (SparseRates::InnerIterator it(A, col); it; ++it) {
      os << it.row() << ',' << it.col() << ',' << it.value() << '\n';
    }
  }
}

}  // namespace trapstat
