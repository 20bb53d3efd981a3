#include "rlgate/pipeline.hpp"

#include <iomanip>
#include <ostream>
#include <sstream>

namespace rlgate {

namespace {

std::string json_text(const Json& j) { return j.dump(2) + "\n"; }

const char* mode_name(RolloutMode m) { return m == RolloutMode::Greedy ? "greedy" : "sampled"; }

void print_report(std::ostream& log, const std::string& label, const GateReport& r) {
  log << std::setprecision(8) << label << ": n_seg=" << r.n_segments << " t_g=" << r.gate_time_ns
      << " ns fidelity=" << r.fidelity << " (est " << r.fidelity_est << ") leakage=" << r.leakage << " (est "
      << r.leakage_est << ")\n";
}

std::vector<std::string> read_log_lines(const std::filesystem::path& path, int keep) {
  std::vector<std::string> lines;
  if (!std::filesystem::exists(path)) return lines;
  std::istringstream in(read_text_file(path));
  for (std::string line; static_cast<int>(lines.size()) < keep && std::getline(in, line);)
    if (!line.empty()) lines.push_back(line);
  return lines;
}

std::string join_lines(const std::vector<std::string>& lines) {
  std::string out;
  for (const std::string& l : lines) out += l + "\n";
  return out;
}

}  // namespace

std::filesystem::path gate_dir(const RunConfig& config) {
  return config.output_dir / gate_name(config.environment.gate);
}

PretrainSummary cmd_pretrain(const RunConfig& config, std::ostream& log) {
  const std::filesystem::path dir = gate_dir(config);
  const GateEnvironment env(config.environment);
  PretrainSummary s;
  s.drag = calibrate_drag(config.environment.transmon, env.target_state(), config.drag);
  log << std::setprecision(8) << "DRAG calibration: amplitude=" << s.drag.params.amplitude
      << " gamma=" << s.drag.params.gamma << " ns fidelity=" << s.drag.fidelity << " leakage=" << s.drag.leakage
      << "\n";
  const DiscretizeResult disc =
      discretize(s.drag.params, config.designer.n_seg_max, ActionGrid::quadrature_x(), ActionGrid::quadrature_y(),
                 config.environment.transmon.omega_d);
  for (const std::string& w : disc.warnings) log << "warning: " << w << "\n";
  s.drag_pwc = disc.waveform;
  s.drag_pwc.tau = config.environment.tau;

  Agents agents = make_agents(config.designer, env, config.designer.seed);
  s.mse = pretrain(agents, s.drag_pwc, env, config.designer, config.designer.pretrain_passes);
  const PwcWaveform rollout =
      synthesize(agents, config.designer.n_seg_max, RolloutMode::Greedy, env, config.designer.seed);
  s.rollout_matches = rollout.segments == s.drag_pwc.segments;
  if (!s.mse.mse_x.empty())
    log << "pre-training MSE x: " << s.mse.mse_x.front() << " -> " << s.mse.mse_x.back()
        << ", y: " << s.mse.mse_y.front() << " -> " << s.mse.mse_y.back() << "\n";
  log << "greedy rollout reproduces discretized DRAG: " << (s.rollout_matches ? "yes" : "no") << "\n";

  std::ostringstream csv;
  csv << std::setprecision(10) << "pass,mse_x,mse_y\n";
  for (std::size_t p = 0; p < s.mse.mse_x.size(); ++p) csv << p << ',' << s.mse.mse_x[p] << ',' << s.mse.mse_y[p] << '\n';
  write_text_file(dir / "drag.json", json_text(drag_to_json(s.drag)));
  write_text_file(dir / "drag_pwc.json", json_text(waveform_to_json(s.drag_pwc)));
  write_text_file(dir / "pretrain_x.json", json_text(policy_to_json(agents.x)));
  write_text_file(dir / "pretrain_y.json", json_text(policy_to_json(agents.y)));
  write_text_file(dir / "pretrain_mse.csv", csv.str());
  return s;
}

Agents load_agents(const RunConfig& config, bool pretrained) {
  const std::filesystem::path dir = gate_dir(config);
  auto file = [&](const char* agent) {
    return dir / (pretrained ? std::string("pretrain_") + agent + ".json" : std::string(agent) + "_agent.json");
  };
  Agents a{policy_from_json(read_json_file(file("x"))), policy_from_json(read_json_file(file("y")))};
  if (a.x.action_count() != static_cast<int>(a.grid_x.size()) || a.y.action_count() != static_cast<int>(a.grid_y.size()))
    throw SchemaError("agent checkpoint does not match the action grids");
  return a;
}

TrainState cmd_train(const RunConfig& config, const TrainCommandOptions& options, std::ostream& log) {
  const std::filesystem::path dir = gate_dir(config);
  const GateEnvironment env(config.environment);
  Agents agents{PolicyNet(1, {}, 1), PolicyNet(1, {}, 1)};
  TrainState state;
  std::vector<std::string> lines;
  if (options.resume && std::filesystem::exists(dir / "train_state.json")) {
    agents = load_agents(config, false);
    state = train_state_from_json(read_json_file(dir / "train_state.json"));
    lines = read_log_lines(dir / "train_log.jsonl", state.iteration);
    log << "resuming at iteration " << state.iteration << "\n";
  } else {
    agents = options.fresh ? make_agents(config.designer, env, config.designer.seed) : load_agents(config, true);
    state = initial_train_state(config.designer, env);
  }

  auto checkpoint = [&](const Agents& a, const TrainState& s) {
    write_text_file(dir / "x_agent.json", json_text(policy_to_json(a.x)));
    write_text_file(dir / "y_agent.json", json_text(policy_to_json(a.y)));
    write_text_file(dir / "train_state.json", json_text(train_state_to_json(s)));
    write_text_file(dir / "train_log.jsonl", join_lines(lines));
  };

  TrainOptions opts;
  opts.record_wall_time = config.record_wall_time;
  opts.on_iteration = [&](const TrainLogRecord& rec, const Agents& a, const TrainState& s) {
    lines.push_back(train_log_line(rec));
    if (s.iteration % config.checkpoint_every == 0) checkpoint(a, s);
  };
  train(config.designer, env, agents, state, opts);
  checkpoint(agents, state);
  for (const auto& [n, r] : state.best) {
    write_text_file(dir / ("best_" + std::to_string(n) + ".json"), json_text(waveform_to_json(r.waveform)));
    print_report(log, "best greedy " + std::to_string(n) + "-segment gate", r);
  }
  log << "trained " << state.iteration << " iterations\n";
  return state;
}

GateReport cmd_synth(const RunConfig& config, int n_segments, RolloutMode mode, bool pretrained, std::ostream& log) {
  if (n_segments < 1 || n_segments > config.designer.n_seg_max)
    throw ConfigError("--segments must be in [1, " + std::to_string(config.designer.n_seg_max) + "]");
  const std::filesystem::path dir = gate_dir(config);
  const Agents agents = load_agents(config, pretrained);
  const GateEnvironment env(config.environment);
  const PwcWaveform w = synthesize(agents, n_segments, mode, env, config.designer.seed);
  const GateReport r = evaluate(w, env, env.target_state(), config.bench_shots, config.designer.seed);
  const std::string stem = std::string("synth_") + mode_name(mode) + "_" + std::to_string(n_segments);
  write_text_file(dir / (stem + ".json"), json_text(waveform_to_json(w)));
  write_text_file(dir / (stem + ".csv"), waveform_csv(w));
  write_text_file(dir / (stem + ".svg"),
                  waveform_svg(w, gate_name(config.environment.gate) + " " + mode_name(mode) + ", " +
                                      std::to_string(n_segments) + " segments"));
  print_report(log, stem, r);
  return r;
}

GateReport cmd_eval(const RunConfig& config, const std::filesystem::path& waveform_path, std::ostream& log) {
  const PwcWaveform w = waveform_from_json(read_json_file(waveform_path));
  const GateEnvironment env(config.environment);
  const GateReport r = evaluate(w, env, env.target_state(), config.bench_shots, config.designer.seed);
  print_report(log, waveform_path.filename().string(), r);
  return r;
}

std::vector<BenchmarkRow> cmd_bench(const RunConfig& config, std::ostream& log) {
  std::vector<RunConfig> per_gate;
  for (GateKind g : {GateKind::X, GateKind::SX}) {
    RunConfig c = config;
    c.environment.gate = g;
    per_gate.push_back(c);
  }
  // Load everything first so a missing artifact fails before any work.
  std::vector<DragCalibrationResult> drags;
  std::vector<Agents> agents;
  for (const RunConfig& c : per_gate) {
    drags.push_back(drag_from_json(read_json_file(gate_dir(c) / "drag.json")));
    agents.push_back(load_agents(c, false));
  }
  std::vector<GateEnvironment> envs;
  envs.reserve(per_gate.size());
  for (const RunConfig& c : per_gate) envs.emplace_back(c.environment);

  std::vector<BenchmarkInput> inputs;
  for (std::size_t i = 0; i < per_gate.size(); ++i) {
    BenchmarkInput in;
    in.env = &envs[i];
    in.drag = drags[i].params;
    in.agents = &agents[i];
    in.drag_samples = config.drag.samples;
    for (int n : {20, 15, 10}) {
      const auto path = gate_dir(per_gate[i]) / ("best_" + std::to_string(n) + ".json");
      if (std::filesystem::exists(path)) in.trained_gates[n] = waveform_from_json(read_json_file(path));
    }
    if (config.gaussian_baseline) {
      DragCalibration sweep = config.drag;
      sweep.gamma_min = sweep.gamma_max = 0.0;
      in.gaussian = calibrate_drag(per_gate[i].environment.transmon, envs[i].target_state(), sweep).params;
    }
    inputs.push_back(in);
  }
  const std::vector<BenchmarkRow> rows = benchmark(inputs, config.bench_shots, config.designer.seed);
  write_text_file(config.output_dir / "bench.csv", benchmark_csv(rows));
  for (const BenchmarkRow& r : rows) {
    const std::string stem = gate_name(r.gate) + "_" + r.variant;
    write_text_file(config.output_dir / "plots" / (stem + ".svg"),
                    waveform_svg(r.report.waveform, gate_name(r.gate) + " " + r.variant));
    write_text_file(config.output_dir / "plots" / (stem + ".csv"), waveform_csv(r.report.waveform));
  }
  log << benchmark_csv(rows);
  return rows;
}

std::vector<FiniteMdp> pinned_mdps() {
  return {FiniteMdp::random(4, 2, 0.9, 1), FiniteMdp::random(4, 2, 0.9, 2), FiniteMdp::random(4, 2, 0.9, 3)};
}

QlearnDemoResult cmd_qlearn_demo(std::ostream& log) {
  QlearnDemoResult result;
  log << std::setprecision(6);
  const std::vector<FiniteMdp> mdps = pinned_mdps();
  for (std::size_t i = 0; i < mdps.size(); ++i) {
    QLearnOptions opts;
    opts.seed = 100 + i;
    const QTable learned = q_learn(mdps[i], opts);
    const QTable exact = value_iteration(mdps[i], 1e-12);
    const double dev = max_abs_difference(learned, exact);
    const bool agree = learned.greedy_policy() == exact.greedy_policy();
    result.max_deviation.push_back(dev);
    result.policies_agree.push_back(agree);
    log << "MDP " << i + 1 << " (4 states, 2 actions, beta 0.9): max |Q - Q*| = " << dev
        << ", argmax policies " << (agree ? "agree" : "differ") << "\n";
  }
  const double beta = 0.9;
  const FiniteMdp single = FiniteMdp::single_state(1.0, beta);
  QLearnOptions opts;
  opts.seed = 200;
  result.single_state_q = q_learn(single, opts)(0, 0);
  result.single_state_expected = 1.0 / (1.0 - beta);
  log << "1-state MDP (r = 1, beta 0.9): Q = " << result.single_state_q << ", Q_* = 1/(1-beta) = "
      << result.single_state_expected << "\n";
  return result;
}

}  // namespace rlgate
