// Copyright 2026 The moimit Authors.
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

// Command-line driver: refgen, train, eval and metrics stages.

#include <iostream>

#include <CLI11.hpp>

#include "moimit/pipeline.hpp"

namespace {

moimit::PipelineConfig load(const std::string& path, const std::string& out_dir) {
  moimit::PipelineConfig cfg = moimit::run_stage("config", [&] {
    return path.empty() ? moimit::PipelineConfig{} : moimit::load_config(path);
  });
  if (!out_dir.empty()) cfg.paths.output_dir = out_dir;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Motion imitation pipeline: human keypoints to a 7-DOF arm policy"};
  app.require_subcommand(1);

  std::string config_path, out_dir, checkpoint, reference, log_path;
  std::uint64_t seed = 0;
  bool seed_given = false;
  int runs = 1;
  bool replay = false;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "Pipeline configuration (JSON)")->check(CLI::ExistingFile);
    cmd->add_option("--out", out_dir, "Output directory (overrides paths.output_dir)");
  };

  CLI::App* refgen = app.add_subcommand("refgen", "Keypoints -> retargeted, smoothed joint-space reference");
  add_common(refgen);

  CLI::App* train = app.add_subcommand("train", "Train PPO policies on the reference motion");
  add_common(train);
  train->add_option("--seed", seed, "Seed of the first run (default: config seed)")
      ->each([&](const std::string&) { seed_given = true; });
  train->add_option("--runs", runs, "Independent seeds; the reward curve is their mean")->check(CLI::PositiveNumber);
  train->add_option("--reference", reference, "Reference motion (overrides paths.reference)");

  CLI::App* eval = app.add_subcommand("eval", "Roll out the deterministic policy and report metrics");
  add_common(eval);
  eval->add_option("--checkpoint", checkpoint, "Checkpoint written by train");
  eval->add_option("--reference", reference, "Reference to evaluate on (default: paths.reference)");
  eval->add_flag("--replay", replay, "Score the exact-replay oracle instead of a checkpoint");

  CLI::App* metrics = app.add_subcommand("metrics", "Recompute metrics and curves from an episode log");
  add_common(metrics);
  metrics->add_option("episode_log", log_path, "episode_log.csv written by eval")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    moimit::PipelineConfig cfg = load(config_path, out_dir);
    if (refgen->parsed()) {
      moimit::cmd_refgen(cfg, std::cout);
    } else if (train->parsed()) {
      if (!reference.empty()) cfg.paths.reference = reference;
      moimit::cmd_train(cfg, seed_given ? seed : cfg.seed, runs, std::cout);
    } else if (eval->parsed()) {
      if (replay) {
        moimit::cmd_replay(cfg, reference, std::cout);
      } else {
        if (checkpoint.empty()) checkpoint = (cfg.paths.output_dir / "checkpoint.txt").string();
        moimit::cmd_eval(cfg, checkpoint, reference, std::cout);
      }
    } else if (metrics->parsed()) {
      moimit::cmd_metrics(cfg, log_path, std::cout);
    }
  } catch (const moimit::StageError& e) {
    std::cerr << "moimit: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "moimit: [internal] " << e.what() << '\n';
    return 3;
  }
  return 0;
}
