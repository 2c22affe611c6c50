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

#include "trapstat/master.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/SparseLU>

namespace trapstat {

namespace {

constexpr double kSteadyResidual = 1e-10;
constexpr double kRefineTailTarget = 1e-14;
constexpr double kSwitchRelaxationTimes = 50.0;
constexpr double kSteadyDerivative = 1e-10;
constexpr int kDenseSpectrumLimit = 400;

// Clamp tiny negative rounding to zero and renormalize. Throws on anything
// beyond the tolerance.
void sanitize(Eigen::VectorXd& p, double time) {
  const double lowest = p.minCoeff();
  if (lowest < -kNegativeClampTolerance) {
    std::ostringstream msg;
    msg << "negative probability " << lowest << " at t=" << time;
    throw NumericalError(msg.str());
  }
  if (lowest < 0.0) {
    p = p.cwiseMax(0.0);
    p /= p.sum();
  }
}

std::vector<double> output_times(double t0, double t_end, const EvolveOptions& opt) {
  std::vector<double> times;
  if (!opt.sample_times.empty()) {
    times = opt.sample_times;
    if (!std::is_sorted(times.begin(), times.end())) {
      throw ValidationError("sample times must be ascending");
    }
    if (times.front() < t0 || times.back() > t0 + t_end) {
      throw ValidationError("sample times must lie in [t0, t0 + t_end]");
    }
    return times;
  }
  if (opt.n_samples < 2) throw ValidationError("n_samples must be >= 2");
  times.reserve(static_cast<std::size_t>(opt.n_samples));
  for (int i = 0; i < opt.n_samples; ++i) {
    times.push_back(t0 + t_end * static_cast<double>(i) / (opt.n_samples - 1));
  }
  times.back() = t0 + t_end;
  return times;
}

}  // namespace

EvolveResult evolve(const Generator& gen, const StateDistribution& p0,
                    double t_end, const EvolveOptions& options) {
  if (!(t_end > 0.0) || !std::isfinite(t_end)) {
    throw ValidationError("t_end must be finite and > 0");
  }
  if (!(options.rel_tol >= 1e-12 && options.rel_tol <= 1e-3)) {
    throw ValidationError("rel_tol must lie in [1e-12, 1e-3]");
  }
  if (p0.probs.size() != gen.size()) {
    throw ValidationError("initial distribution size does not match n_max");
  }
  if (std::abs(p0.probs.sum() - 1.0) > 1e-9 ||
      p0.probs.minCoeff() < -kNegativeClampTolerance) {
    throw ValidationError("initial distribution is not normalized");
  }

  const double t0 = p0.time;
  const std::vector<double> outputs = output_times(t0, t_end, options);

  // Interleave steady-state checkpoints every 10 relaxation times past the
  // switch horizon; they are observed but not emitted.
  std::vector<double> stops = outputs;
  std::vector<char> is_output(outputs.size(), 1);
  const double relax = relaxation_time(gen.params());
  const double switch_after = kSwitchRelaxationTimes * relax;
  const double derivative_scale = gen.params().loading_rate > 0.0
                                      ? gen.params().loading_rate
                                      : gen.max_rate();
  if (options.switch_to_steady && count_closed_classes(gen) == 1 &&
      t_end > switch_after && std::isfinite(relax)) {
    std::vector<std::pair<double, char>> merged;
    for (double t : outputs) merged.emplace_back(t, 1);
    for (double t = t0 + switch_after; t < t0 + t_end; t += 10.0 * relax) {
      merged.emplace_back(t, 0);
    }
    std::stable_sort(merged.begin(), merged.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    stops.clear();
    is_output.clear();
    for (const auto& [t, out] : merged) {
      stops.push_back(t);
      is_output.push_back(out);
    }
  }

  OdeOptions ode;
  ode.rel_tol = options.rel_tol;
  ode.abs_tol = options.abs_tol > 0.0 ? options.abs_tol : 1e-6 * options.rel_tol;
  ode.max_steps = options.max_steps;

  EvolveResult result;
  result.min_raw_probability = p0.probs.minCoeff();
  const SparseRates& A = gen.rates();
  Eigen::VectorXd p = p0.probs;
  Eigen::VectorXd dpdt(p.size());
  std::size_t stop_index = 0;
  std::size_t next_output = 0;

  auto emit = [&](double t, const Eigen::VectorXd& raw) {
    result.max_mass_drift = std::max(result.max_mass_drift, std::abs(raw.sum() - 1.0));
    result.min_raw_probability = std::min(result.min_raw_probability, raw.minCoeff());
    StateDistribution d;
    d.probs = raw;
    d.time = t;
    sanitize(d.probs, t);
    result.series.push_back(std::move(d));
    ++next_output;
  };

  auto observer = [&](double t, const Eigen::VectorXd& y) {
    const bool output = is_output[stop_index++] != 0;
    if (output) emit(t, y);
    if (!options.switch_to_steady || t < t0 + switch_after) return true;
    dpdt.noalias() = A * y;
    if (dpdt.lpNorm<1>() >= kSteadyDerivative * derivative_scale) return true;
    // Declared steady: the remaining outputs come from the direct solve.
    result.switched_to_steady_at = t;
    return false;
  };

  result.stats = integrate_dopri5(
      [&A](double, const Eigen::VectorXd& y, Eigen::VectorXd& out) { out.noalias() = A * y; },
      p, t0, std::span<const double>(stops), ode, observer);

  if (next_output < outputs.size()) {
    const StateDistribution steady = steady_state(gen);
    while (next_output < outputs.size()) emit(outputs[next_output], steady.probs);
  }
  return result;
}

int count_closed_classes(const Generator& gen) {
  // With loading every state reaches n_max, so all closed classes contain it.
  // Without loading every jump lowers N and the closed classes are exactly
  // the absorbing states.
  if (gen.params().loading_rate > 0.0) return 1;
  int absorbing = 0;
  const auto diag = gen.rates().diagonal();
  for (Eigen::Index j = 0; j < diag.size(); ++j) {
    if (diag(j) == 0.0) ++absorbing;
  }
  return absorbing;
}

StateDistribution steady_state(const Generator& gen) {
  const int classes = count_closed_classes(gen);
  if (classes != 1) {
    throw ValidationError("steady state is not unique (" + std::to_string(classes) +
                          " absorbing classes)");
  }
  const SparseRates& A = gen.rates();
  const Eigen::Index n = A.rows();
  const Eigen::Index norm_row = n - 1;

  std::vector<Eigen::Triplet<double>> entries;
  entries.reserve(static_cast<std::size_t>(A.nonZeros() + n));
  for (Eigen::Index col = 0; col < A.outerSize(); ++col) {
    for (SparseRates::InnerIterator it(A, col); it; ++it) {
      if (it.row() != norm_row) entries.emplace_back(it.row(), it.col(), it.value());
    }
    entries.emplace_back(norm_row, col, 1.0);
  }
  SparseRates M(n, n);
  M.setFromTriplets(entries.begin(), entries.end());
  M.makeCompressed();

  Eigen::SparseLU<SparseRates> lu;
  lu.compute(M);
  if (lu.info() != Eigen::Success) {
    throw NumericalError("steady-state factorization failed: " + lu.lastErrorMessage());
  }
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  rhs(norm_row) = 1.0;
  StateDistribution d;
  d.probs = lu.solve(rhs);
  if (lu.info() != Eigen::Success) throw NumericalError("steady-state solve failed");

  const double residual = (A * d.probs).lpNorm<Eigen::Infinity>();
  if (!(residual <= kSteadyResidual * gen.max_rate())) {
    std::ostringstream msg;
    msg << "steady-state residual " << residual << " exceeds tolerance";
    throw NumericalError(msg.str());
  }
  d.time = std::numeric_limits<double>::infinity();
  sanitize(d.probs, d.time);
  return d;
}

SteadySolution solve_steady(const ModelParams& params, std::optional<int> n_max) {
  validate(params);
  int n = n_max.value_or(default_n_max(params));
  for (;;) {
    const Generator gen = build_generator(params, n);
    SteadySolution s;
    s.dist = steady_state(gen);
    s.moments = moments(s.dist);
    s.n_max = n;
    s.truncation = truncation_check(s.dist);
    if (n_max || s.truncation.tail_mass <= kRefineTailTarget || n >= kMaxOccupancy) {
      return s;
    }
    n = static_cast<int>(std::min<long>(2L * n, kMaxOccupancy));
  }
}

double moment_rhs(const ModelParams& params, const Moments& m) {
  const LossChannel& ch = single_pair_channel(params);
  if (ch.removed != 2) {
    throw ValidationError("mean-number equation applies to pair losses only");
  }
  const double beta = ch.rate_const;
  return params.loading_rate - params.one_body_rate * m.mean -
         beta * m.mean * (m.mean - 1.0) - beta * m.variance;
}

double relaxation_time(const ModelParams& params) {
  double rate = params.one_body_rate;
  const double R = params.loading_rate;
  for (const auto& ch : params.channels) {
    if (ch.rate_const <= 0.0) continue;
    if (R > 0.0) {
      const double inv_order = 1.0 / ch.order;
      rate = std::max(rate, std::pow(R, 1.0 - inv_order) * std::pow(ch.rate_const, inv_order));
    } else {
      rate = std::max(rate, ch.rate_const);
    }
  }
  if (rate <= 0.0) rate = R;  // pure loading never relaxes; R is the only scale
  return 1.0 / rate;
}

double relaxation_time(const Generator& gen) {
  if (gen.n_max() > kDenseSpectrumLimit || count_closed_classes(gen) != 1) {
    return relaxation_time(gen.params());
  }
  const Eigen::MatrixXd dense(gen.rates());
  Eigen::EigenSolver<Eigen::MatrixXd> solver(dense, /*computeEigenvectors=*/false);
  if (solver.info() != Eigen::Success) return relaxation_time(gen.params());
  Eigen::VectorXd decay = solver.eigenvalues().real().cwiseAbs();
  std::sort(decay.begin(), decay.end());
  // decay(0) is the stationary eigenvalue.
  if (decay.size() < 2 || !(decay(1) > 0.0)) return relaxation_time(gen.params());
  return 1.0 / decay(1);
}

}  // namespace trapstat
