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

#include "trapstat/io.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

namespace trapstat {

namespace {

std::string opt_field(const std::optional<double>& x) {
  return x ? format_double(*x) : std::string{};
}

json opt_json(const std::optional<double>& x) { return x ? json(*x) : json(nullptr); }

}  // namespace

std::string_view version() {
#ifdef TRAPSTAT_VERSION
  return TRAPSTAT_VERSION;
#else
  return "unknown";
#endif
}

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

json params_to_json(const ModelParams& params) {
  json channels = json::array();
  for (const auto& ch : params.channels) {
    channels.push_back({{"rho", ch.order}, {"m", ch.removed}, {"rate", ch.rate_const}});
  }
  return {{"R", params.loading_rate}, {"gamma", params.one_body_rate}, {"channels", channels}};
}

ModelParams params_from_json(const json& j) {
  if (!j.is_object()) throw ValidationError("parameters must be a JSON object");
  ModelParams p;
  try {
    p.loading_rate = j.value("R", 0.0);
    p.one_body_rate = j.value("gamma", 0.0);
    if (j.contains("channels")) {
      for (const auto& c : j.at("channels")) {
        p.channels.push_back(
            {c.at("rho").get<int>(), c.at("m").get<int>(), c.at("rate").get<double>()});
      }
    }
    if (j.contains("beta2")) {
      p.channels.push_back({2, j.value("removed", 2), j.at("beta2").get<double>()});
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed parameters: ") + e.what());
  }
  return p;
}

json moments_to_json(const Moments& m) {
  return {{"mean", m.mean}, {"variance", m.variance}, {"fano", opt_json(m.fano)}};
}

json estimate_to_json(const MomentEstimate& e) {
  return {{"mean", e.mean},         {"mean_se", e.mean_se},
          {"variance", e.variance}, {"variance_se", e.variance_se},
          {"fano", opt_json(e.fano)}, {"fano_se", e.fano_se}};
}

void write_series_csv(std::ostream& os, const std::vector<StateDistribution>& series) {
  os << "t,N,p_N\n";
  for (const auto& d : series) {
    const std::string t = format_double(d.time);
    for (Eigen::Index n = 0; n < d.probs.size(); ++n) {
      os << t << ',' << n << ',' << format_double(d.probs(n)) << '\n';
    }
  }
}

void write_distribution_csv(std::ostream& os, const StateDistribution& dist) {
  os << "N,p_N\n";
  for (Eigen::Index n = 0; n < dist.probs.size(); ++n) {
    os << n << ',' << format_double(dist.probs(n)) << '\n';
  }
}

json distribution_to_json(const StateDistribution& dist) {
  json j;
  j["probs"] = std::vector<double>(dist.probs.begin(), dist.probs.end());
  if (std::isfinite(dist.time)) {
    j["time"] = dist.time;
  } else {
    j["time"] = nullptr;  // steady state
  }
  j["time_is_dimensionless"] = dist.dimensionless_time;
  j["n_max"] = dist.n_max();
  j["moments"] = moments_to_json(moments(dist));
  if (dist.n_samples) j["n_samples"] = *dist.n_samples;
  return j;
}

void write_ensemble_csv(std::ostream& os, const TrajectoryEnsemble& ens) {
  os << "traj,t,N\n";
  std::vector<std::string> times;
  for (double t : ens.sample_times) times.push_back(format_double(t));
  for (Eigen::Index i = 0; i < ens.samples.rows(); ++i) {
    for (Eigen::Index k = 0; k < ens.samples.cols(); ++k) {
      os << i << ',' << times[static_cast<std::size_t>(k)] << ',' << ens.samples(i, k) << '\n';
    }
  }
}

json ensemble_summary_json(const TrajectoryEnsemble& ens) {
  json per_time = json::array();
  for (std::size_t k = 0; k < ens.sample_times.size(); ++k) {
    json e = estimate_to_json(ens.est_moments[k]);
    e["t"] = ens.sample_times[k];
    per_time.push_back(std::move(e));
  }
  return {{"seed", ens.seed},
          {"n_traj", ens.n_traj()},
          {"params", params_to_json(ens.params)},
          {"moments", per_time}};
}

void write_vankampen_csv(std::ostream& os, const std::vector<VanKampenState>& states) {
  os << "tau,phi,xi2,fano\n";
  for (const auto& s : states) {
    os << format_double(s.tau) << ',' << format_double(s.phi) << ',' << format_double(s.xi2)
       << ',' << opt_field(fano(s)) << '\n';
  }
}

void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
  os << "R,mean,variance,fano,backend,stderr_fano\n";
  for (const auto& r : rows) {
    os << format_double(r.loading_rate) << ',' << opt_field(r.mean) << ','
       << opt_field(r.variance) << ',' << opt_field(r.fano) << ',' << backend_name(r.backend)
       << ',' << opt_field(r.stderr_fano) << '\n';
  }
}

json sweep_to_json(const std::vector<SweepRow>& rows) {
  json out = json::array();
  for (const auto& r : rows) {
    json j = {{"index", r.index},
              {"R", r.loading_rate},
              {"backend", backend_name(r.backend)},
              {"mean", opt_json(r.mean)},
              {"variance", opt_json(r.variance)},
              {"fano", opt_json(r.fano)},
              {"stderr_fano", opt_json(r.stderr_fano)}};
    if (r.error) j["error"] = *r.error;
    if (r.n_max > 0) j["n_max"] = r.n_max;
    if (r.sample_time > 0.0) j["sample_time"] = r.sample_time;
    if (r.distribution.size() > 0) {
      j["distribution"] = std::vector<double>(r.distribution.begin(), r.distribution.end());
    }
    out.push_back(std::move(j));
  }
  return out;
}

}  // namespace trapstat
