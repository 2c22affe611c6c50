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

#ifndef TRAPSTAT_DISTRIBUTION_HPP_
#define TRAPSTAT_DISTRIBUTION_HPP_

#include <cmath>
#include <cstddef>
#include <optional>

#include <Eigen/Core>

#include "trapstat/errors.hpp"

namespace trapstat {

/// Occupancy probabilities p_0..p_{n_max} at one instant.
struct StateDistribution {
  Eigen::VectorXd probs;
  double time = 0.0;
  bool dimensionless_time = false;
  /// Set for empirical distributions: number of trajectories behind them.
  std::optional<std::size_t> n_samples;

  Eigen::Index n_max() const { return probs.size() - 1; }
};

/// Point mass at occupancy n on the support {0..n_max}.
inline StateDistribution delta_distribution(Eigen::Index n, Eigen::Index n_max,
                                            double time = 0.0) {
  if (n < 0 || n > n_max) throw ValidationError("delta outside support");
  StateDistribution d;
  d.probs = Eigen::VectorXd::Zero(n_max + 1);
  d.probs(n) = 1.0;
  d.time = time;
  return d;
}

struct Moments {
  double mean = 0.0;
  double variance = 0.0;
  /// variance / mean; empty when mean == 0.
  std::optional<double> fano;
};

/// Weighted mean and central second moment of a probability vector indexed by
/// occupancy.
template <typename Derived>
Moments moments(const Eigen::MatrixBase<Derived>& probs) {
  using Scalar = typename Derived::Scalar;
  const auto n = probs.size();
  const auto occupancy = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>::LinSpaced(
      n, Scalar(0), Scalar(n - 1));
  const Scalar mass = probs.sum();
  const Scalar mean = occupancy.dot(probs) / mass;
  const Scalar variance =
      (occupancy.array() - mean).square().matrix().dot(probs) / mass;
  Moments m;
  m.mean = static_cast<double>(mean);
  m.variance = std::max(0.0, static_cast<double>(variance));
  if (m.mean > 0.0) m.fano = m.variance / m.mean;
  return m;
}

inline Moments moments(const StateDistribution& dist) {
  return moments(dist.probs);
}

/// Half the L1 distance; the shorter vector is zero-padded.
template <typename DerivedA, typename DerivedB>
double tv_distance(const Eigen::MatrixBase<DerivedA>& a,
                   const Eigen::MatrixBase<DerivedB>& b) {
  const auto common = std::min(a.size(), b.size());
  double d = (a.head(common) - b.head(common)).cwiseAbs().sum();
  d += a.tail(a.size() - common).cwiseAbs().sum();
  d += b.tail(b.size() - common).cwiseAbs().sum();
  return 0.5 * d;
}

/// Poisson(mean) probabilities on {0..n_max}, not renormalized.
inline Eigen::VectorXd poisson_pmf(double mean, Eigen::Index n_max) {
  Eigen::VectorXd p(n_max + 1);
  for (Eigen::Index k = 0; k <= n_max; ++k) {
    const double kd = static_cast<double>(k);
    p(k) = mean == 0.0 ? (k == 0 ? 1.0 : 0.0)
                       : std::exp(kd * std::log(mean) - mean - std::lgamma(kd + 1.0));
  }
  return p;
}

}  // namespace trapstat

#endif  // TRAPSTAT_DISTRIBUTION_HPP_
