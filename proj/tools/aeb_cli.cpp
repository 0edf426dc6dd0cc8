// Copyright 2026 The aebrl Authors
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

// Command-line front end: training, evaluation tables and traces.

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "aeb/checkpoint.hpp"
#include "aeb/config.hpp"
#include "aeb/eval.hpp"
#include "aeb/table.hpp"
#include "aeb/trainer.hpp"

namespace fs = std::filesystem;

namespace {

struct Options {
  std::string config_path;
  std::vector<std::string> overrides;
  std::string out_dir;
  std::string checkpoint;
  int episodes = -1;
  long long seed = -1;
  int trials = 1000;
  bool no_trauma = false;
  bool quiet = false;
  std::vector<double> ttc_values;
  double trace_ttc = 1.5;
  double trace_v_init = 16.67;
  double trace_v_ped = 3.0;
  std::string trace_side = "near";
};

std::string read_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw aeb::ConfigError("cannot read config file " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::string override_text(const Options& o) {
  std::string text;
  for (const auto& kv : o.overrides) text += kv + '\n';
  return text;
}

aeb::Config resolve_config(const Options& o, aeb::Config base = {}) {
  aeb::Config cfg = o.config_path.empty() ? base : aeb::parse_config(read_file(o.config_path), base);
  cfg = aeb::parse_config(override_text(o), cfg);
  if (o.episodes >= 0) cfg.episodes = o.episodes;
  if (o.seed >= 0) cfg.seed = static_cast<std::uint64_t>(o.seed);
  if (o.no_trauma) cfg.trauma = false;
  aeb::validate(cfg);
  return cfg;
}

fs::path output_dir(const Options& o) {
  fs::path dir = ".";
  if (const char* env = std::getenv("AEB_OUTPUT_DIR"); env && *env) dir = env;
  if (!o.out_dir.empty()) dir = o.out_dir;
  fs::create_directories(dir);
  return dir;
}

void echo_config(const aeb::Config& cfg) {
  std::istringstream lines(aeb::format_config(cfg));
  for (std::string line; std::getline(lines, line);) std::cerr << "# " << line << '\n';
}

template <class Writer>
void emit(const fs::path& path, Writer&& write) {
  std::ostringstream table;
  write(table);
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << table.str();
  std::cout << table.str();
  std::cerr << "wrote " << path.string() << '\n';
}

aeb::Checkpoint open_checkpoint(const Options& o, const fs::path& dir) {
  const std::string path = o.checkpoint.empty() ? (dir / "checkpoint.bin").string() : o.checkpoint;
  if (!fs::exists(path)) throw aeb::CheckpointError("checkpoint not found: " + path);
  aeb::Checkpoint ck = aeb::load_checkpoint(path);
  // Evaluation may override environment keys; the network must still fit.
  ck.config = resolve_config(o, ck.config);
  if (ck.config.network != aeb::NetworkShape{ck.params.sizes(), ck.params.leaky_slope})
    throw aeb::CheckpointError("checkpoint network does not match the resolved config");
  return ck;
}

aeb::ProgressFn progress_printer(bool quiet, const char* tag) {
  if (quiet) return {};
  return [tag](const aeb::EpisodeLog& l) {
    if ((l.index + 1) % 100 == 0)
      std::cerr << tag << "episode " << l.index + 1 << " return " << l.ret << " epsilon "
                << l.epsilon << '\n';
  };
}

int cmd_train(const Options& o) {
  const auto dir = output_dir(o);
  const aeb::Config cfg = resolve_config(o);
  echo_config(cfg);
  const auto result = aeb::train(cfg, progress_printer(o.quiet, ""));
  const auto ck = o.checkpoint.empty() ? (dir / "checkpoint.bin").string() : o.checkpoint;
  aeb::save_checkpoint(result.net, result.optimizer, cfg, ck);
  std::cerr << "wrote " << ck << '\n';
  emit(dir / "episodes.csv", [&](std::ostream& os) { aeb::write_episode_logs(os, result.logs); });
  return 0;
}

int cmd_ablate(const Options& o) {
  const auto dir = output_dir(o);
  aeb::Config cfg = resolve_config(o);
  echo_config(cfg);
  for (bool trauma : {true, false}) {
    cfg.trauma = trauma;
    const auto result = aeb::train(cfg, progress_printer(o.quiet, trauma ? "[on] " : "[off] "));
    const auto name = trauma ? "episodes_trauma_on.csv" : "episodes_trauma_off.csv";
    emit(dir / name, [&](std::ostream& os) { aeb::write_episode_logs(os, result.logs); });
  }
  return 0;
}

int cmd_eval_ttc(const Options& o) {
  const auto dir = output_dir(o);
  const auto ck = open_checkpoint(o, dir);
  echo_config(ck.config);
  const auto values = o.ttc_values.empty() ? aeb::default_ttc_values() : o.ttc_values;
  const auto rows = aeb::ttc_sweep(aeb::GreedyPolicy{&ck.params}, ck.config, values, o.trials,
                                   ck.config.seed);
  emit(dir / "ttc_sweep.csv", [&](std::ostream& os) { aeb::write_sweep(os, rows); });
  return 0;
}

int cmd_eval_gap(const Options& o) {
  const auto dir = output_dir(o);
  const auto ck = open_checkpoint(o, dir);
  echo_config(ck.config);
  const aeb::GreedyPolicy policy{&ck.params};
  const auto gaps = aeb::stopping_gap_stats(policy, ck.config, o.trials, ck.config.seed);
  emit(dir / "stop_gaps.csv", [&](std::ostream& os) { aeb::write_gap_stats(os, gaps); });
  const auto stay = aeb::stay_liveness(policy, ck.config, o.trials, ck.config.seed);
  emit(dir / "stay.csv", [&](std::ostream& os) {
    os << "episodes,passes,stops,other,pass_rate\n"
       << stay.episodes << ',' << stay.passes << ',' << stay.stops << ',' << stay.other << ','
       << aeb::num(stay.pass_rate) << '\n';
  });
  return 0;
}

int cmd_eval_ncap(const Options& o) {
  const auto dir = output_dir(o);
  const auto ck = open_checkpoint(o, dir);
  echo_config(ck.config);
  const auto rows = aeb::ncap_suite(aeb::GreedyPolicy{&ck.params}, ck.config);
  emit(dir / "ncap.csv", [&](std::ostream& os) { aeb::write_ncap(os, rows); });
  return 0;
}

int cmd_trace(const Options& o) {
  const auto dir = output_dir(o);
  const auto ck = open_checkpoint(o, dir);
  echo_config(ck.config);
  if (o.trace_side != "near" && o.trace_side != "far")
    throw aeb::ConfigError("--side must be 'near' or 'far'");
  const auto side = o.trace_side == "near" ? aeb::Side::Near : aeb::Side::Far;
  const auto params = aeb::make_scenario(o.trace_v_init, o.trace_ttc, side, aeb::Scenario::Cross,
                                         o.trace_v_ped, ck.config.env);
  const auto rows =
      aeb::trace_episode(aeb::GreedyPolicy{&ck.params}, ck.config, params, ck.config.seed);
  emit(dir / "trace.csv", [&](std::ostream& os) { aeb::write_trace(os, rows); });
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Autonomous braking with a deep Q-network"};
  app.require_subcommand(1);
  Options o;
  app.add_option("--config", o.config_path, "key = value config file");
  app.add_option("--set", o.overrides, "override a config key, e.g. --set safety_line=4");
  app.add_option("--out", o.out_dir, "output directory (default $AEB_OUTPUT_DIR or .)");
  app.add_flag("--quiet", o.quiet, "no progress output");

  auto* train = app.add_subcommand("train", "train a policy; writes checkpoint and episode log");
  train->add_option("--episodes", o.episodes, "training episodes");
  train->add_option("--seed", o.seed, "master seed");
  train->add_option("--checkpoint", o.checkpoint, "checkpoint path");
  train->add_flag("--no-trauma", o.no_trauma, "disable the trauma memory");

  auto* ablate = app.add_subcommand("ablate-trauma", "same-seed training with trauma on and off");
  ablate->add_option("--episodes", o.episodes, "training episodes");
  ablate->add_option("--seed", o.seed, "master seed");

  auto* ttc = app.add_subcommand("eval-ttc", "collision rate per time-to-collision");
  ttc->add_option("--checkpoint", o.checkpoint, "checkpoint path");
  ttc->add_option("--trials", o.trials, "episodes per ttc value");
  ttc->add_option("--seed", o.seed, "evaluation seed");
  ttc->add_option("--ttc", o.ttc_values, "ttc values (default 0.9 .. 3.9 step 0.2)");

  auto* gap = app.add_subcommand("eval-gap", "stopping gaps and non-crossing liveness");
  gap->add_option("--checkpoint", o.checkpoint, "checkpoint path");
  gap->add_option("--trials", o.trials, "episodes");
  gap->add_option("--seed", o.seed, "evaluation seed");

  auto* ncap = app.add_subcommand("eval-ncap", "simplified CVFA/CVNA pedestrian AEB table");
  ncap->add_option("--checkpoint", o.checkpoint, "checkpoint path");

  auto* trace = app.add_subcommand("trace", "trajectory of one crossing episode");
  trace->add_option("--checkpoint", o.checkpoint, "checkpoint path");
  trace->add_option("--ttc", o.trace_ttc, "time-to-collision, s");
  trace->add_option("--v-init", o.trace_v_init, "initial speed, m/s");
  trace->add_option("--v-ped", o.trace_v_ped, "pedestrian speed, m/s");
  trace->add_option("--side", o.trace_side, "near or far");
  trace->add_option("--seed", o.seed, "sensor-noise seed");

  CLI11_PARSE(app, argc, argv);
  try {
    if (train->parsed()) return cmd_train(o);
    if (ablate->parsed()) return cmd_ablate(o);
    if (ttc->parsed()) return cmd_eval_ttc(o);
    if (gap->parsed()) return cmd_eval_gap(o);
    if (ncap->parsed()) return cmd_eval_ncap(o);
    if (trace->parsed()) return cmd_trace(o);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
