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

#ifndef TRAPSTAT_IO_HPP_
#define TRAPSTAT_IO_HPP_

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "trapstat/distribution.hpp"
#include "trapstat/mc.hpp"
#include "trapstat/model.hpp"
#include "trapstat/sweep.hpp"
#include "trapstat/vankampen.hpp"

namespace trapstat {

using nlohmann::json;

/// Library version, "<semver>+<git describe>".
std::string_view version();

/// Shortest round-trip decimal text for a double ("%.17g").
std::string format_double(double x);

// Model parameters as JSON:
//   {"R": 6000, "gamma": 0.2,
//    "channels": [{"rho": 2, "m": 2, "rate": 500}]}
json params_to_json(const ModelParams& params);
/// Accepts the keys above plus the shorthands "beta2" and "removed" for a
/// single two-body channel. Unknown keys are ignored here (the CLI checks
/// them). Does not validate the rates.
ModelParams params_from_json(const json& j);

json moments_to_json(const Moments& m);
json estimate_to_json(const MomentEstimate& e);

/// "t,N,p_N" rows for each distribution in the series.
void write_series_csv(std::ostream& os, const std::vector<StateDistribution>& series);
/// "N,p_N" rows.
void write_distribution_csv(std::ostream& os, const StateDistribution& dist);
json distribution_to_json(const StateDistribution& dist);

/// "traj,t,N" rows, trajectory-major.
void write_ensemble_csv(std::ostream& os, const TrajectoryEnsemble& ens);
json ensemble_summary_json(const TrajectoryEnsemble& ens);

/// "tau,phi,xi2,fano" rows; fano is empty where undefined.
void write_vankampen_csv(std::ostream& os, const std::vector<VanKampenState>& states);

/// "R,mean,variance,fano,backend,stderr_fano" rows; missing values are empty
/// and failed rows carry no numbers.
void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows);
json sweep_to_json(const std::vector<SweepRow>& rows);

}  // namespace trapstat

#endif  // TRAPSTAT_IO_HPP_
