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

#ifndef TRAPSTAT_GENERATOR_HPP_
#define TRAPSTAT_GENERATOR_HPP_

#include <iosfwd>

#include <Eigen/SparseCore>

#include "trapstat/distribution.hpp"
#include "trapstat/model.hpp"

namespace trapstat {

using SparseRates = Eigen::SparseMatrix<double, Eigen::ColMajor>;

/// Transition-rate matrix of the master equation truncated to {0..n_max}:
/// dp/dt = A p, with A(i, j) the rate of jumps j -> i. Loading out of n_max is
/// dropped (reflecting boundary) so every column sums to zero.
class Generator {
 public:
  Generator(ModelParams params, int n_max, SparseRates rates);

  int n_max() const { return n_max_; }
  Eigen::Index size() const { return rates_.rows(); }
  const SparseRates& rates() const { return rates_; }
  const ModelParams& params() const { return params_; }
  /// Largest total outflow rate, i.e. max_j |A(j, j)|.
  double max_rate() const { return max_rate_; }

 private:
  ModelParams params_;
  int n_max_;
  SparseRates rates_;
  double max_rate_;
};

/// Throws ValidationError if n_max < 1, n_max < the largest channel order, or
/// n_max > kMaxOccupancy.
Generator build_generator(const ModelParams& params, int n_max);

/// max(10, ceil(4 x) with x the deterministic balance occupancy of each
/// channel (sqrt(R / beta') for pair losses), ceil(4 R / gamma) without
/// channels), capped at kMaxOccupancy. Callers that need a guaranteed
/// truncation error should refine with truncation_check.
int default_n_max(const ModelParams& params);

struct TruncationDiagnostic {
  double tail_mass = 0.0;   // probability in the top 10% of states
  Eigen::Index tail_begin = 0;
  bool flagged = false;     // tail_mass > kTruncationThreshold
};

inline constexpr double kTruncationThreshold = 1e-8;

TruncationDiagnostic truncation_check(const StateDistribution& dist);

/// Coordinate-list dump: header "row,col,rate", one line per stored entry.
void write_coo_csv(std::ostream& os, const Generator& gen);

}  // namespace trapstat

#endif  // TRAPSTAT_GENERATOR_HPP_
