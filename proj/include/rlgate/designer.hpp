#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "rlgate/policy.hpp"
#include "rlgate/pulse.hpp"
#include "rlgate/quantum_sim.hpp"
#include "rlgate/readout.hpp"

namespace rlgate {

enum class GateKind { X, SX };

std::string gate_name(GateKind gate);
// Accepts "X" and "SX" (case-insensitive); throws std::invalid_argument otherwise.
GateKind parse_gate(std::string_view name);

// Ideal U|0> for the gate under the drive convention of segment_hamiltonian:
// X -> -i|1>, SX -> (|0> - i|1>) / sqrt(2).
StateVector gate_target_state(GateKind gate, int levels);

// Independent 64-bit stream seed from a base seed and two indices.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream, std::uint64_t index);

struct DesignerConfig {
  int n_seg_max = 20;
  int n_ep = 20;
  int n_iter = 200;
  std::size_t n_shot = 512;
  double lambda = 0.005;
  double leak_max = 0.02;
  double beta = 0.95;
  std::uint64_t seed = 1;

  std::vector<int> hidden{32, 32};
  Optimizer::Settings optimizer_x{OptimizerKind::Adam, 1e-2};
  Optimizer::Settings optimizer_y{OptimizerKind::Adam, 1e-2};

  int pretrain_passes = 50;
  // Shuffled update sweeps per pass over all batches measured so far.
  int pretrain_epochs = 5;
  double pretrain_width = 0.01;
  Optimizer::Settings pretrain_optimizer{OptimizerKind::Adam, 1e-3};

  // Throws std::invalid_argument when an invariant fails.
  void validate() const;
};

struct AgentStateX {
  double i_mean = 0.0;
  double q_mean = 0.0;
  int k = 0;
  Eigen::VectorXd vector() const;
};

struct AgentStateY {
  double ux = 0.0;
  double leak = 0.0;
  Eigen::VectorXd vector() const;
};

struct AgentStateX2Q {
  double i_mean_1 = 0.0;
  double q_mean_1 = 0.0;
  double i_mean_2 = 0.0;
  double q_mean_2 = 0.0;
  int k = 0;
};

// min{1 - lambda k, sigma_T / |c - c_T| - lambda k}; distances below 1e-12
// take the capped branch.
double reward_x(const AgentStateX& next, const ReadoutTarget& target, double lambda, int k);
// max{0, leak_max - leak}
double reward_y(const AgentStateY& next, double leak_max);
// Mean of the single-qubit rewards of both qubits.
double reward_x_2q(const AgentStateX2Q& next, const ReadoutTarget& target_1, const ReadoutTarget& target_2,
                   double lambda, int k);

struct EnvironmentSettings {
  TransmonParams transmon;
  IqClusterModel clusters = IqClusterModel::regular(3);
  GateKind gate = GateKind::X;
  std::size_t n_shot = 512;
  std::size_t calibration_shots = 10000;
  SigmaMode sigma_mode = SigmaMode::MeanStandardError;
  LeakageMode leakage_mode = LeakageMode::SecondLevelOnly;
  double tau = 1.78;
  std::uint64_t seed = 7;
};

struct Measurement {
  IqPoint mean;
  double leakage = 0.0;  // classified fraction outside the computational subspace
};

// Simulated qubit plus readout chain. Construction calibrates the
// discriminator on labelled shots of each level, the target readout c_T from
// shots on the ideal target populations, and the initial state s0, L0 from a
// measurement before any gate.
class GateEnvironment {
 public:
  explicit GateEnvironment(EnvironmentSettings settings);

  const EnvironmentSettings& settings() const { return settings_; }
  const Discriminator& discriminator() const { return discriminator_; }
  const ReadoutTarget& target_readout() const { return target_readout_; }
  const StateVector& target_state() const { return target_state_; }
  const Measurement& initial() const { return initial_; }

  // (I, Q) standardized by the pooled calibration shots, k by n_seg.
  Normalizer x_normalizer(int n_seg) const;
  // ux centred on the x grid, leakage scaled by leak_max.
  Normalizer y_normalizer(double leak_max) const;

  Matrix unitary(const PwcWaveform& waveform) const { return evolve(waveform, settings_.transmon); }
  // N_shot readout shots of U|0>.
  Measurement measure(const Matrix& unitary, std::uint64_t seed) const;
  Measurement measure(const Matrix& unitary, std::size_t n_shots, std::uint64_t seed) const;
  // Classified level populations of U|0>.
  std::vector<double> estimate_populations(const Matrix& unitary, std::size_t n_shots, std::uint64_t seed) const;

 private:
  EnvironmentSettings settings_;
  Discriminator discriminator_;
  ReadoutTarget target_readout_;
  StateVector target_state_;
  Measurement initial_;
  IqPoint calib_mean_;
  IqPoint calib_std_;
};

struct Agents {
  PolicyNet x;
  PolicyNet y;
  ActionGrid grid_x = ActionGrid::quadrature_x();
  ActionGrid grid_y = ActionGrid::quadrature_y();
  bool operator==(const Agents&) const = default;
};

// Freshly initialized networks with normalizers taken from the environment.
Agents make_agents(const DesignerConfig& config, const GateEnvironment& env, std::uint64_t seed);

struct PretrainResult {
  std::vector<double> mse_x;  // mean loss per pass
  std::vector<double> mse_y;
};

// MSE pre-training towards a discretized pulse. Each pass first measures all
// prefixes (no policy dependence), then runs config.pretrain_epochs sweeps of
// per-segment updates over that batch.
PretrainResult pretrain(Agents& agents, const PwcWaveform& drag_pwc, const GateEnvironment& env,
                        const DesignerConfig& config, int n_passes);

enum class RolloutMode { Greedy, Sampled };

// Rolls both agents out for n_segments steps. Measurement seeds come from
// `seed`; sampled mode draws actions from an engine seeded the same way.
PwcWaveform synthesize(const Agents& agents, int n_segments, RolloutMode mode, const GateEnvironment& env,
                       std::uint64_t seed);

struct GateReport {
  PwcWaveform waveform;
  double fidelity = 0.0;
  double leakage = 0.0;
  // Readout-based estimates. The fidelity estimate is the classical overlap
  // (sum_m sqrt(p_m q_m))^2 of estimated and ideal populations, blind to phase.
  double fidelity_est = 0.0;
  double leakage_est = 0.0;
  int n_segments = 0;
  double gate_time_ns = 0.0;
};

GateReport evaluate(const PwcWaveform& waveform, const GateEnvironment& env, const StateVector& target,
                    std::size_t n_shots, std::uint64_t seed);

struct TrainLogRecord {
  int iter = 0;
  double mean_reward_x = 0.0;
  double mean_reward_y = 0.0;
  double probe_fidelity = 0.0;
  double probe_leakage = 0.0;
  double wall_ms = 0.0;
};

// Loop position carried between iterations, enough to resume exactly.
struct TrainState {
  int iteration = 0;
  int k = 0;
  PwcWaveform waveform;
  AgentStateX state_x;
  double leak = 0.0;
  Optimizer optimizer_x;
  Optimizer optimizer_y;
  // Best greedy probe gate per prefix length, ranked by (1 - F) + L.
  std::map<int, GateReport> best;
};

TrainState initial_train_state(const DesignerConfig& config, const GateEnvironment& env);

struct TrainOptions {
  std::vector<int> probe_lengths{10, 15, 20};
  // Record wall-clock time per iteration; off keeps logs byte-reproducible.
  bool record_wall_time = false;
  // Called after every iteration with the updated agents and state.
  std::function<void(const TrainLogRecord&, const Agents&, const TrainState&)> on_iteration;
};

// Dual-agent training loop. Runs until state.iteration == config.n_iter. Throws
// NumericError on a non-finite reward or gradient.
std::vector<TrainLogRecord> train(const DesignerConfig& config, const GateEnvironment& env, Agents& agents,
                                  TrainState& state, const TrainOptions& options = {});

struct BenchmarkRow {
  GateKind gate = GateKind::X;
  std::string variant;  // DRAG, GAUSS, RL20, RL15, RL10
  GateReport report;
};

struct BenchmarkInput {
  const GateEnvironment* env = nullptr;
  DragParams drag;
  std::optional<DragParams> gaussian;
  const Agents* agents = nullptr;
  int drag_samples = 160;
  // Gates kept from training, by segment count; used instead of a fresh
  // greedy rollout where present.
  std::map<int, PwcWaveform> trained_gates;
};

// DRAG (and optionally Gaussian) reference rows followed by RL gates at 20, 15
// and 10 segments, for every input gate.
std::vector<BenchmarkRow> benchmark(const std::vector<BenchmarkInput>& inputs, std::size_t n_shots,
                                    std::uint64_t seed);

}  // namespace rlgate
