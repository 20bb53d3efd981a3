#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "rlgate/config.hpp"
#include "rlgate/qlearning.hpp"

namespace rlgate {

// Per-gate artifact directory: <output_dir>/<gate>.
std::filesystem::path gate_dir(const RunConfig& config);

struct PretrainSummary {
  DragCalibrationResult drag;
  PwcWaveform drag_pwc;
  PretrainResult mse;
  bool rollout_matches = false;
};

// Calibrates DRAG, discretizes it, pre-trains fresh agents and writes
// drag.json, drag_pwc.json, pretrain_x.json, pretrain_y.json, pretrain_mse.csv.
PretrainSummary cmd_pretrain(const RunConfig& config, std::ostream& log);

struct TrainCommandOptions {
  bool fresh = false;   // start from untrained networks instead of pretrain_*.json
  bool resume = false;  // continue from train_state.json when present
};

// Runs the dual-agent training loop and writes x_agent.json, y_agent.json, train_state.json,
// train_log.jsonl and best_<n>.json. Throws MissingArtifact without inputs.
TrainState cmd_train(const RunConfig& config, const TrainCommandOptions& options, std::ostream& log);

// Loads trained (or pre-trained) agents from the gate directory.
Agents load_agents(const RunConfig& config, bool pretrained);

// Writes synth_<mode>_<n>.json/.csv/.svg and returns the evaluated gate.
GateReport cmd_synth(const RunConfig& config, int n_segments, RolloutMode mode, bool pretrained, std::ostream& log);

GateReport cmd_eval(const RunConfig& config, const std::filesystem::path& waveform_path, std::ostream& log);

// Benchmarks X and SX from their gate directories; writes bench.csv and one
// SVG per pulse under plots/.
std::vector<BenchmarkRow> cmd_bench(const RunConfig& config, std::ostream& log);

struct QlearnDemoResult {
  std::vector<double> max_deviation;
  std::vector<bool> policies_agree;
  double single_state_q = 0.0;
  double single_state_expected = 0.0;
};

// Pinned 4-state / 2-action MDPs with beta = 0.9 and a 1-state MDP.
std::vector<FiniteMdp> pinned_mdps();
QlearnDemoResult cmd_qlearn_demo(std::ostream& log);

}  // namespace rlgate
