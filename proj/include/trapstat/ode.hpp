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

#ifndef TRAPSTAT_ODE_HPP_
#define TRAPSTAT_ODE_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <sstream>

#include <Eigen/Core>

#include "trapstat/errors.hpp"

namespace trapstat {

struct OdeOptions {
  double rel_tol = 1e-8;
  double abs_tol = 1e-14;
  double initial_step = 0.0;  // 0 selects a step from the local scale
  std::size_t max_steps = 50'000'000;
};

struct OdeStats {
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  std::size_t rhs_evals = 0;
  double last_step = 0.0;
};

namespace detail {

template <typename Derived, typename DerivedY0, typename DerivedY1>
double scaled_error(const Eigen::MatrixBase<Derived>& err,
                    const Eigen::MatrixBase<DerivedY0>& y0,
                    const Eigen::MatrixBase<DerivedY1>& y1,
                    const OdeOptions& opt) {
  const auto scale = (opt.abs_tol + opt.rel_tol * y0.cwiseAbs().cwiseMax(y1.cwiseAbs()).array());
  return (err.array().abs() / scale).maxCoeff();
}

}  // namespace detail

/// Adaptive Dormand-Prince 5(4) integration of y' = f(t, y) from t0 through
/// every time in `sample_times` (ascending, >= t0). Steps are shortened to land
/// exactly on each sample, where `observe(t, y)` is called; returning false
/// from the observer stops the integration. `rhs(t, y, dydt)` writes into
/// dydt. Throws NumericalError on step-size underflow or when max_steps is
/// exhausted.
template <typename Vector, typename Rhs, typename Observer>
OdeStats integrate_dopri5(Rhs&& rhs, Vector& y, double t0,
                          std::span<const double> sample_times,
                          const OdeOptions& opt, Observer&& observe) {
  using std::abs;
  constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  constexpr double a21 = 1.0 / 5;
  constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                   a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                   a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                   b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                   e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

  OdeStats stats;
  double t = t0;
  Vector k1 = y, k2 = y, k3 = y, k4 = y, k5 = y, k6 = y, k7 = y;
  Vector y_new = y, y_stage = y, err = y;
  rhs(t, y, k1);
  ++stats.rhs_evals;

  double h = opt.initial_step;
  if (h <= 0.0) {
    const double d0 = (y.array().abs() / (opt.abs_tol + opt.rel_tol * y.array().abs())).maxCoeff();
    const double d1 = (k1.array().abs() / (opt.abs_tol + opt.rel_tol * y.array().abs())).maxCoeff();
    h = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
  }

  for (const double target : sample_times) {
    if (target < t) throw ValidationError("sample times must be ascending");
    while (t < target) {
      if (stats.accepted + stats.rejected >= opt.max_steps) {
        std::ostringstream msg;
        msg << "step budget exhausted at t=" << t << " (stiffness?)";
        throw NumericalError(msg.str());
      }
      const bool clamp = t + h >= target;
      const double step = clamp ? target - t : h;
      if (step <= 16.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, abs(t))) {
        if (clamp) {  // rounding residue before a sample
          t = target;
          break;
        }
        std::ostringstream msg;
        msg << "step size underflow at t=" << t;
        throw NumericalError(msg.str());
      }

      y_stage = y + step * a21 * k1;
      rhs(t + c2 * step, y_stage, k2);
      y_stage = y + step * (a31 * k1 + a32 * k2);
      rhs(t + c3 * step, y_stage, k3);
      y_stage = y + step * (a41 * k1 + a42 * k2 + a43 * k3);
      rhs(t + c4 * step, y_stage, k4);
      y_stage = y + step * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
      rhs(t + c5 * step, y_stage, k5);
      y_stage = y + step * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
      rhs(t + step, y_stage, k6);
      y_new = y + step * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
      rhs(t + step, y_new, k7);
      stats.rhs_evals += 6;
      err = step * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

      const double err_norm = detail::scaled_error(err, y, y_new, opt);
      if (!std::isfinite(err_norm)) {
        std::ostringstream msg;
        msg << "non-finite state at t=" << t;
        throw NumericalError(msg.str());
      }
      const double factor =
          err_norm == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err_norm, -0.2), 0.2, 5.0);
      if (err_norm <= 1.0) {
        t = clamp ? target : t + step;
        y.swap(y_new);
        k1.swap(k7);  // first-same-as-last
        ++stats.accepted;
        stats.last_step = step;
        // A step shortened to hit a sample does not shrink the next one.
        h = clamp ? std::max(h, step * factor) : step * factor;
      } else {
        ++stats.rejected;
        h = step * std::min(1.0, factor);
      }
    }
    if (!observe(t, static_cast<const Vector&>(y))) break;
  }
  return stats;
}

}  // namespace trapstat

#endif  // TRAPSTAT_ODE_HPP_
