#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rlgate/pipeline.hpp"

using namespace rlgate;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitMissing = 4;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dual-agent reinforcement-learning designer for fast single-qubit gates"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  std::string gate;
  std::vector<std::string> overrides;
  app.add_option("--config", config_path, "JSON configuration file")->check(CLI::ExistingFile);
  app.add_option("--seed", seed, "Training seed");
  app.add_option("--out", out_dir, "Output directory");
  app.add_option("--gate", gate, "Target gate: X or SX");
  app.add_option("--set", overrides, "Override a config key, e.g. --set designer.n_iter=5")->take_all();

  auto* pretrain_cmd = app.add_subcommand("pretrain", "Calibrate DRAG and pre-train both agents on it");

  bool fresh = false, resume = false;
  auto* train_cmd = app.add_subcommand("train", "Run the dual-agent training loop");
  train_cmd->add_flag("--fresh", fresh, "Start from untrained networks");
  train_cmd->add_flag("--resume", resume, "Resume from the last checkpoint");

  int segments = 0;
  std::string mode = "greedy";
  bool use_pretrained = false;
  auto* synth_cmd = app.add_subcommand("synth", "Synthesize a gate with the trained agents");
  synth_cmd->add_option("--segments", segments, "Number of segments")->required();
  synth_cmd->add_option("--mode", mode, "greedy or sampled")->check(CLI::IsMember({"greedy", "sampled"}));
  synth_cmd->add_flag("--pretrained", use_pretrained, "Use the pre-trained agents");

  std::string waveform_path;
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a waveform file");
  eval_cmd->add_option("--waveform", waveform_path, "Waveform JSON")->required();

  auto* bench_cmd = app.add_subcommand("bench", "Benchmark DRAG against RL gates for X and SX");
  auto* qlearn_cmd = app.add_subcommand("qlearn-demo", "Tabular Q-learning against value iteration");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (qlearn_cmd->parsed()) {
      const QlearnDemoResult r = cmd_qlearn_demo(std::cout);
      (void)r;
      return 0;
    }

    Json cfg = default_config_json();
    std::filesystem::path base_dir = ".";
    if (!config_path.empty()) {
      merge_config(cfg, read_json_file(config_path));
      base_dir = std::filesystem::path(config_path).parent_path();
    }
    for (const std::string& s : overrides) apply_override(cfg, s);
    if (seed) cfg["seed"] = *seed;
    if (!out_dir.empty()) cfg["output_dir"] = out_dir;
    if (!gate.empty()) cfg["gate"] = gate;
    const RunConfig config = config_from_json(cfg, base_dir);

    if (pretrain_cmd->parsed()) {
      write_text_file(gate_dir(config) / "config.json", cfg.dump(2) + "\n");
      cmd_pretrain(config, std::cout);
    } else if (train_cmd->parsed()) {
      write_text_file(gate_dir(config) / "config.json", cfg.dump(2) + "\n");
      cmd_train(config, {fresh, resume}, std::cout);
    } else if (synth_cmd->parsed()) {
      cmd_synth(config, segments, mode == "greedy" ? RolloutMode::Greedy : RolloutMode::Sampled, use_pretrained,
                std::cout);
    } else if (eval_cmd->parsed()) {
      cmd_eval(config, waveform_path, std::cout);
    } else if (bench_cmd->parsed()) {
      cmd_bench(config, std::cout);
    }
  } catch (const MissingArtifact& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitMissing;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const SchemaError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  }
  return 0;
}
