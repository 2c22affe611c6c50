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

// trapstat: command-line front end.
//
//   trapstat steady    --preset fig2
//   trapstat evolve    --R 6000 --gamma 0.2 --beta2 500 --t-end 3e-3
//   trapstat sample    --preset fig2 --t-end 3e-3 --n-traj 100000 --seed 7
//   trapstat vankampen --phi0 0 --tau-end 20
//   trapstat sweep     --preset fig1 --backends master,mc
//
// Exit status: 0 success, 1 invalid input (one diagnostic line on stderr),
// 2 numerical failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "trapstat/generator.hpp"
#include "trapstat/io.hpp"
#include "trapstat/master.hpp"
#include "trapstat/mc.hpp"
#include "trapstat/sweep.hpp"
#include "trapstat/vankampen.hpp"

namespace {

using trapstat::json;
using trapstat::NumericalError;
using trapstat::ValidationError;

// Every option maps onto a key of the resolved configuration, which is the
// same flat JSON object accepted by --config.
class OptionTable {
 public:
  template <typename T>
  CLI::Option* add(CLI::App* app, const std::string& flag, const std::string& key,
                   const std::string& help) {
    auto value = std::make_shared<T>();
    CLI::Option* opt = app->add_option(flag, *value, help);
    entries_.push_back({opt, [value, key](json& j) { j[key] = *value; }});
    return opt;
  }

  CLI::Option* add_flag(CLI::App* app, const std::string& flag, const std::string& key,
                        const std::string& help) {
    CLI::Option* opt = app->add_flag(flag, help);
    entries_.push_back({opt, [key](json& j) { j[key] = true; }});
    return opt;
  }

  void apply(json& j) const {
    for (const auto& [opt, write] : entries_) {
      if (opt->count() > 0) write(j);
    }
  }

 private:
  std::vector<std::pair<CLI::Option*, std::function<void(json&)>>> entries_;
};

struct Command {
  CLI::App* app = nullptr;
  OptionTable options;
  std::string config_path;
  std::vector<std::string> channel_specs;
  std::shared_ptr<double> beta2 = std::make_shared<double>(0.0);
  std::shared_ptr<int> removed = std::make_shared<int>(2);
  CLI::Option* beta2_opt = nullptr;
  CLI::Option* removed_opt = nullptr;
  CLI::Option* channel_opt = nullptr;
};

const std::vector<std::string> kKnownKeys{
    "preset", "R",       "gamma",   "beta2",         "removed",       "channels",
    "n_max",  "rel_tol", "n_traj",  "seed",          "t_end",         "tau_end",
    "samples", "times",  "phi0",    "xi2_0",         "threads",       "initial",
    "backends", "grid_min_mean", "grid_max_mean", "points", "R_grid", "keep_distribution",
    "output", "format",  "manifest", "mc_relaxation_multiple"};

void add_model_options(Command& cmd) {
  CLI::App* app = cmd.app;
  app->add_option("--config", cmd.config_path,
                  "JSON file with any of the option keys (flags take precedence)");
  cmd.options.add<std::string>(app, "--preset", "preset",
                               "Named parameter set: fig1|fig2|fig3a|fig3a-dashed|fig3b");
  cmd.options.add<double>(app, "--R", "R", "Loading rate R (atoms s^-1)");
  cmd.options.add<double>(app, "--gamma", "gamma", "One-body loss rate gamma (s^-1)");
  cmd.beta2_opt = app->add_option("--beta2", *cmd.beta2,
                                  "Two-body loss constant beta' ((at.s)^-1), rate beta' N(N-1)/2");
  cmd.removed_opt = app->add_option("--removed", *cmd.removed,
                                    "Atoms removed per two-body event (1 or 2, default 2)");
  cmd.channel_opt = app->add_option(
      "--channel", cmd.channel_specs,
      "Loss channel 'rho,m,rate': rate (s^-1 per rho-tuple) x C(N,rho), removing m atoms; "
      "repeatable");
}

void add_output_options(Command& cmd, const std::string& default_format) {
  cmd.options.add<std::string>(cmd.app, "-o,--output", "output", "Output file (default stdout)");
  cmd.options.add<std::string>(cmd.app, "--format", "format",
                               "csv|json (default " + default_format + ")");
  cmd.options.add<std::string>(cmd.app, "--manifest", "manifest",
                               "Manifest path (default <output>.manifest.json)");
}

trapstat::LossChannel parse_channel(const std::string& spec) {
  std::istringstream in(spec);
  trapstat::LossChannel ch;
  char c1 = 0, c2 = 0;
  if (!(in >> ch.order >> c1 >> ch.removed >> c2 >> ch.rate_const) || c1 != ',' || c2 != ',' ||
      !(in >> std::ws).eof()) {
    throw ValidationError("malformed --channel '" + spec + "', expected rho,m,rate");
  }
  return ch;
}

json read_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot read config file '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ValidationError("malformed config file: " + std::string(e.what()));
  }
  if (!j.is_object()) throw ValidationError("config file must hold a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (std::find(kKnownKeys.begin(), kKnownKeys.end(), key) == kKnownKeys.end()) {
      throw ValidationError("unknown config key '" + key + "'");
    }
  }
  return j;
}

// Moves the beta2/removed shorthand into the channel list.
void normalize_channels(json& j) {
  if (!j.contains("beta2")) return;
  json channels = j.value("channels", json::array());
  channels.push_back({{"rho", 2}, {"m", j.value("removed", 2)}, {"rate", j.at("beta2")}});
  j["channels"] = channels;
  j.erase("beta2");
  j.erase("removed");
}

// preset < config file < flags.
json resolve(const Command& cmd) {
  json file = cmd.config_path.empty() ? json::object() : read_config(cmd.config_path);
  normalize_channels(file);
  json flags = json::object();
  cmd.options.apply(flags);

  const std::string preset_name = flags.value("preset", file.value("preset", std::string{}));
  json resolved = json::object();
  if (!preset_name.empty()) {
    resolved = trapstat::params_to_json(trapstat::preset(preset_name));
    resolved["preset"] = preset_name;
  }
  for (const auto& [k, v] : file.items()) resolved[k] = v;
  for (const auto& [k, v] : flags.items()) resolved[k] = v;

  const bool flag_channels = cmd.beta2_opt->count() > 0 || cmd.channel_opt->count() > 0;
  if (cmd.removed_opt->count() > 0 && cmd.beta2_opt->count() == 0) {
    // --removed alone adjusts the existing two-body channel(s).
    json channels = resolved.value("channels", json::array());
    for (auto& ch : channels) {
      if (ch.at("rho").get<int>() == 2) ch["m"] = *cmd.removed;
    }
    resolved["channels"] = channels;
  }
  if (flag_channels) {
    json channels = json::array();
    if (cmd.beta2_opt->count() > 0) {
      channels.push_back({{"rho", 2}, {"m", *cmd.removed}, {"rate", *cmd.beta2}});
    }
    for (const auto& spec : cmd.channel_specs) {
      const auto ch = parse_channel(spec);
      channels.push_back({{"rho", ch.order}, {"m", ch.removed}, {"rate", ch.rate_const}});
    }
    resolved["channels"] = channels;
  }
  return resolved;
}

trapstat::ModelParams model_from(const json& cfg) {
  trapstat::ModelParams p = trapstat::params_from_json(cfg);
  trapstat::validate(p);
  return p;
}

template <typename T>
T get_or(const json& cfg, const std::string& key, T fallback) {
  try {
    return cfg.contains(key) ? cfg.at(key).get<T>() : fallback;
  } catch (const json::exception&) {
    throw ValidationError("config key '" + key + "' has the wrong type");
  }
}

std::vector<double> sample_times(const json& cfg, int default_samples, bool include_zero) {
  if (cfg.contains("times")) {
    auto times = get_or<std::vector<double>>(cfg, "times", {});
    if (times.empty()) throw ValidationError("--times is empty");
    return times;
  }
  if (!cfg.contains("t_end")) throw ValidationError("--t-end or --times is required");
  const double t_end = get_or<double>(cfg, "t_end", 0.0);
  if (!(t_end > 0.0) || !std::isfinite(t_end)) throw ValidationError("--t-end must be > 0");
  const int n = get_or<int>(cfg, "samples", default_samples);
  if (n < 1) throw ValidationError("--samples must be >= 1");
  if (n == 1) return {t_end};
  std::vector<double> times;
  const int first = include_zero ? 0 : 1;
  const int last = include_zero ? n - 1 : n;
  for (int i = first; i <= last; ++i) times.push_back(t_end * i / last);
  times.back() = t_end;
  return times;
}

std::string output_format(const json& cfg, const std::string& fallback) {
  const std::string f = get_or<std::string>(cfg, "format", fallback);
  if (f != "csv" && f != "json") throw ValidationError("--format must be csv or json");
  return f;
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  return buf;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << content) || !out.flush()) {
    throw ValidationError("cannot write '" + path + "'");
  }
}

// Writes the main payload (file or stdout), the sidecar next to a file, and the
// manifest when an output path or --manifest is given.
void emit(const std::string& subcommand, const json& cfg, const std::string& payload,
          const json& tolerances, const std::optional<json>& sidecar = std::nullopt) {
  const std::string output = get_or<std::string>(cfg, "output", "");
  if (output.empty()) {
    std::cout << payload;
  } else {
    write_file(output, payload);
    if (sidecar) write_file(output + ".moments.json", sidecar->dump(2) + "\n");
  }
  std::string manifest = get_or<std::string>(cfg, "manifest", "");
  if (manifest.empty() && !output.empty()) manifest = output + ".manifest.json";
  if (!manifest.empty()) {
    const json m = {{"tool", "trapstat"},
                    {"version", std::string(trapstat::version())},
                    {"subcommand", subcommand},
                    {"config", cfg},
                    {"tolerances", tolerances},
                    {"created_utc", utc_timestamp()}};
    write_file(manifest, m.dump(2) + "\n");
  }
}

// ---------------------------------------------------------------------------

void run_steady(const json& cfg) {
  const trapstat::ModelParams params = model_from(cfg);
  std::optional<int> n_max;
  if (cfg.contains("n_max")) n_max = get_or<int>(cfg, "n_max", 0);
  const trapstat::SteadySolution s = trapstat::solve_steady(params, n_max);
  json doc = {{"params", trapstat::params_to_json(params)},
              {"n_max", s.n_max},
              {"moments", trapstat::moments_to_json(s.moments)},
              {"truncation",
               {{"tail_mass", s.truncation.tail_mass}, {"flagged", s.truncation.flagged}}},
              {"probs", std::vector<double>(s.dist.probs.begin(), s.dist.probs.end())}};
  const json tolerances = {{"residual", 1e-10}, {"tail_target", 1e-14}};
  if (output_format(cfg, "json") == "json") {
    emit("steady", cfg, doc.dump(2) + "\n", tolerances);
  } else {
    std::ostringstream os;
    trapstat::write_distribution_csv(os, s.dist);
    doc.erase("probs");
    emit("steady", cfg, os.str(), tolerances, doc);
  }
}

void run_evolve(const json& cfg) {
  const trapstat::ModelParams params = model_from(cfg);
  const int n_max = get_or<int>(cfg, "n_max", trapstat::default_n_max(params));
  const trapstat::Generator gen = trapstat::build_generator(params, n_max);
  const auto initial = get_or<long>(cfg, "initial", 0);
  trapstat::EvolveOptions opt;
  opt.rel_tol = get_or<double>(cfg, "rel_tol", 1e-8);
  opt.sample_times = sample_times(cfg, 101, /*include_zero=*/true);
  const double t_end = opt.sample_times.back();
  const trapstat::EvolveResult r =
      trapstat::evolve(gen, trapstat::delta_distribution(initial, n_max), t_end, opt);
  const json tolerances = {{"rel_tol", opt.rel_tol}, {"negative_clamp", 1e-12}};
  if (output_format(cfg, "csv") == "csv") {
    std::ostringstream os;
    trapstat::write_series_csv(os, r.series);
    emit("evolve", cfg, os.str(), tolerances);
  } else {
    json series = json::array();
    for (const auto& d : r.series) series.push_back(trapstat::distribution_to_json(d));
    json doc = {{"params", trapstat::params_to_json(params)},
                {"n_max", n_max},
                {"rel_tol", opt.rel_tol},
                {"series", series}};
    if (r.switched_to_steady_at) doc["switched_to_steady_at"] = *r.switched_to_steady_at;
    emit("evolve", cfg, doc.dump(2) + "\n", tolerances);
  }
}

void run_sample(const json& cfg) {
  const trapstat::ModelParams params = model_from(cfg);
  const auto n_traj = get_or<long long>(cfg, "n_traj", 10000);
  if (n_traj < 1) throw ValidationError("--n-traj must be >= 1");
  const auto seed = get_or<std::uint64_t>(cfg, "seed", 1);
  const auto initial = get_or<long>(cfg, "initial", 0);
  trapstat::SampleOptions opt;
  opt.threads = get_or<unsigned>(cfg, "threads", 0);
  const std::vector<double> times = sample_times(cfg, 1, /*include_zero=*/false);
  const trapstat::TrajectoryEnsemble ens = trapstat::sample(
      params, initial, times, static_cast<std::size_t>(n_traj), seed, opt);
  const json tolerances = json::object();
  if (output_format(cfg, "csv") == "csv") {
    std::ostringstream os;
    trapstat::write_ensemble_csv(os, ens);
    emit("sample", cfg, os.str(), tolerances, trapstat::ensemble_summary_json(ens));
  } else {
    emit("sample", cfg, trapstat::ensemble_summary_json(ens).dump(2) + "\n", tolerances);
  }
}

void run_vankampen(const json& cfg) {
  trapstat::VanKampenState s0;
  s0.phi = get_or<double>(cfg, "phi0", 0.0);
  s0.xi2 = get_or<double>(cfg, "xi2_0", 0.0);
  double tau_end = 0.0;
  if (cfg.contains("tau_end")) {
    tau_end = get_or<double>(cfg, "tau_end", 0.0);
  } else if (cfg.contains("t_end")) {
    tau_end = trapstat::to_dimensionless(model_from(cfg), get_or<double>(cfg, "t_end", 0.0));
  } else {
    throw ValidationError("--tau-end (or --t-end with model parameters) is required");
  }
  trapstat::VanKampenOptions opt;
  opt.n_samples = get_or<int>(cfg, "samples", 201);
  const auto states = trapstat::vk_evolve(s0, tau_end, opt);
  const json tolerances = {{"rel_tol", opt.rel_tol}, {"fano_phi_threshold", trapstat::kFanoPhiThreshold}};
  if (output_format(cfg, "csv") == "csv") {
    std::ostringstream os;
    trapstat::write_vankampen_csv(os, states);
    emit("vankampen", cfg, os.str(), tolerances);
  } else {
    json rows = json::array();
    for (const auto& s : states) {
      const auto f = trapstat::fano(s);
      rows.push_back({{"tau", s.tau}, {"phi", s.phi}, {"xi2", s.xi2},
                      {"fano", f ? json(*f) : json(nullptr)}});
    }
    emit("vankampen", cfg, json({{"states", rows}}).dump(2) + "\n", tolerances);
  }
}

void run_sweep(const json& cfg) {
  trapstat::SweepSpec spec;
  json base = cfg;
  if (!base.contains("R")) base["R"] = 0.0;
  spec.base = trapstat::params_from_json(base);
  spec.backends.clear();
  for (const auto& name : get_or<std::vector<std::string>>(cfg, "backends", {"master"})) {
    spec.backends.push_back(trapstat::parse_backend(name));
  }
  if (spec.backends.empty()) throw ValidationError("no backend selected");
  spec.n_traj = static_cast<std::size_t>(get_or<long long>(cfg, "n_traj", 100000));
  spec.seed = get_or<std::uint64_t>(cfg, "seed", 1);
  spec.threads = get_or<unsigned>(cfg, "threads", 1);
  spec.keep_distribution = get_or<bool>(cfg, "keep_distribution", false);
  spec.mc_relaxation_multiple = get_or<double>(cfg, "mc_relaxation_multiple", 30.0);
  if (cfg.contains("R_grid")) {
    spec.loading_rates = get_or<std::vector<double>>(cfg, "R_grid", {});
  } else {
    spec.loading_rates = trapstat::fano_sweep_grid(spec.base, get_or<double>(cfg, "grid_min_mean", 0.05),
                                                   get_or<double>(cfg, "grid_max_mean", 40.0),
                                                   get_or<int>(cfg, "points", 40));
  }
  const auto rows = trapstat::run_sweep(spec);
  const json tolerances = {{"master_vs_mc_se", 3.0}, {"master_vs_vankampen", 0.01}};
  if (output_format(cfg, "csv") == "csv") {
    std::ostringstream os;
    trapstat::write_sweep_csv(os, rows);
    emit("sweep", cfg, os.str(), tolerances);
  } else {
    emit("sweep", cfg, trapstat::sweep_to_json(rows).dump(2) + "\n", tolerances);
  }
}

std::string one_line(std::string s) {
  std::replace(s.begin(), s.end(), '\n', ' ');
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Atom-number statistics of a trap loaded from a reservoir with one-body and "
               "rho-body losses"};
  app.require_subcommand(1);

  Command steady, evolve, sample, vankampen, sweep;
  steady.app = app.add_subcommand("steady", "Steady-state distribution (master equation)");
  evolve.app = app.add_subcommand("evolve", "Time evolution of p_N(t) from N(0) = --initial");
  sample.app = app.add_subcommand("sample", "Exact stochastic trajectories (Monte Carlo)");
  vankampen.app = app.add_subcommand("vankampen", "Linear-noise expansion: phi, <xi^2>, F vs tau");
  sweep.app = app.add_subcommand("sweep", "Sweep the loading rate across backends");

  for (Command* c : {&steady, &evolve, &sample, &vankampen, &sweep}) add_model_options(*c);
  add_output_options(steady, "json");
  add_output_options(evolve, "csv");
  add_output_options(sample, "csv");
  add_output_options(vankampen, "csv");
  add_output_options(sweep, "csv");

  steady.options.add<int>(steady.app, "--n-max", "n_max",
                          "Truncation bound (default: automatic refinement)");

  evolve.options.add<int>(evolve.app, "--n-max", "n_max", "Truncation bound");
  evolve.options.add<double>(evolve.app, "--rel-tol", "rel_tol",
                             "Integrator relative tolerance in [1e-12, 1e-3] (default 1e-8)");
  evolve.options.add<double>(evolve.app, "--t-end", "t_end", "End time (s)");
  evolve.options.add<int>(evolve.app, "--samples", "samples",
                          "Number of equally spaced output times (default 101)");
  evolve.options.add<std::vector<double>>(evolve.app, "--times", "times", "Explicit output times (s)")
      ->delimiter(',');
  evolve.options.add<long>(evolve.app, "--initial", "initial", "Initial atom number (default 0)");

  sample.options.add<long long>(sample.app, "--n-traj", "n_traj", "Trajectories (default 10000)");
  sample.options.add<std::uint64_t>(sample.app, "--seed", "seed", "Root seed (default 1)");
  sample.options.add<double>(sample.app, "--t-end", "t_end", "Last sample time (s)");
  sample.options.add<int>(sample.app, "--samples", "samples",
                          "Equally spaced sample times in (0, t_end] (default 1)");
  sample.options.add<std::vector<double>>(sample.app, "--times", "times", "Explicit sample times (s)")
      ->delimiter(',');
  sample.options.add<long>(sample.app, "--initial", "initial", "Initial atom number (default 0)");
  sample.options.add<unsigned>(sample.app, "--threads", "threads",
                               "Worker threads (0 = all cores); results do not depend on it");

  vankampen.options.add<double>(vankampen.app, "--phi0", "phi0",
                                "Initial phi = <N>/<N>_st in [0, 1] (default 0)");
  vankampen.options.add<double>(vankampen.app, "--xi2-0", "xi2_0",
                                "Initial <xi^2> (default 0)");
  vankampen.options.add<double>(vankampen.app, "--tau-end", "tau_end",
                                "End of dimensionless time tau = t sqrt(R beta')");
  vankampen.options.add<double>(vankampen.app, "--t-end", "t_end",
                                "End time (s), converted with the model's R and beta'");
  vankampen.options.add<int>(vankampen.app, "--samples", "samples", "Output points (default 201)");

  sweep.options.add<std::vector<std::string>>(sweep.app, "--backends", "backends",
                                              "master,mc,vankampen (default master)")
      ->delimiter(',');
  sweep.options.add<std::vector<double>>(sweep.app, "--R-grid", "R_grid",
                                         "Explicit loading rates (atoms s^-1)")
      ->delimiter(',');
  sweep.options.add<double>(sweep.app, "--grid-min-mean", "grid_min_mean",
                            "Smallest steady mean of the automatic grid (default 0.05)");
  sweep.options.add<double>(sweep.app, "--grid-max-mean", "grid_max_mean",
                            "Largest steady mean of the automatic grid (default 40)");
  sweep.options.add<int>(sweep.app, "--points", "points", "Automatic grid size (default 40)");
  sweep.options.add<long long>(sweep.app, "--n-traj", "n_traj",
                               "Monte Carlo trajectories per point (default 100000)");
  sweep.options.add<std::uint64_t>(sweep.app, "--seed", "seed", "Root seed (default 1)");
  sweep.options.add<unsigned>(sweep.app, "--threads", "threads", "Worker threads (default 1)");
  sweep.options.add_flag(sweep.app, "--keep-distribution", "keep_distribution",
                         "Include full master distributions (json only)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "trapstat: error: validation: " << one_line(e.what()) << '\n';
    return 1;
  }

  try {
    if (steady.app->parsed()) run_steady(resolve(steady));
    if (evolve.app->parsed()) run_evolve(resolve(evolve));
    if (sample.app->parsed()) run_sample(resolve(sample));
    if (vankampen.app->parsed()) run_vankampen(resolve(vankampen));
    if (sweep.app->parsed()) run_sweep(resolve(sweep));
  } catch (const ValidationError& e) {
    std::cerr << "trapstat: error: validation: " << one_line(e.what()) << '\n';
    return 1;
  } catch (const NumericalError& e) {
    std::cerr << "trapstat: error: numerical: " << one_line(e.what()) << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "trapstat: error: validation: " << one_line(e.what()) << '\n';
    return 1;
  }
  return 0;
}
