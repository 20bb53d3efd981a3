#include "rlgate/designer.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace rlgate {

namespace {

enum Stream : std::uint64_t {
  kCalibration = 1,
  kInitial,
  kTarget,
  kActions,
  kMeasure,
  kProbe,
  kPretrain,
  kRollout,
  kRolloutActions,
  kEvaluate,
  kPretrainOrder,
};

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double leaked_fraction(const std::vector<double>& populations, LeakageMode mode) {
  if (populations.size() < 3) return 0.0;
  if (mode == LeakageMode::SecondLevelOnly) return populations[2];
  return std::accumulate(populations.begin() + 2, populations.end(), 0.0);
}

void require_finite(double value, const char* what, int iteration, int episode) {
  if (std::isfinite(value)) return;
  throw NumericError(std::string("train: non-finite ") + what + " at iteration " + std::to_string(iteration) +
                     ", episode " + std::to_string(episode));
}

}  // namespace

std::string gate_name(GateKind gate) { return gate == GateKind::X ? "X" : "SX"; }

GateKind parse_gate(std::string_view name) {
  std::string upper(name);
  std::transform(upper.begin(), upper.end(), upper.begin(), [](unsigned char c) { return std::toupper(c); });
  if (upper == "X") return GateKind::X;
  if (upper == "SX") return GateKind::SX;
  throw std::invalid_argument("unknown gate '" + std::string(name) + "' (expected X or SX)");
}

StateVector gate_target_state(GateKind gate, int levels) {
  StateVector psi = StateVector::Zero(levels);
  if (gate == GateKind::X) {
    psi(1) = cplx(0.0, -1.0);
  } else {
    psi(0) = cplx(1.0 / std::sqrt(2.0), 0.0);
    psi(1) = cplx(0.0, -1.0 / std::sqrt(2.0));
  }
  return psi;
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream, std::uint64_t index) {
  return splitmix64(splitmix64(splitmix64(base) ^ stream) ^ index);
}

void DesignerConfig::validate() const {
  if (n_seg_max < 1) throw std::invalid_argument("DesignerConfig: n_seg_max must be >= 1");
  if (n_ep < 1 || n_ep > n_seg_max || n_seg_max % n_ep != 0)
    throw std::invalid_argument("DesignerConfig: n_ep must divide n_seg_max");
  if (n_iter < 0) throw std::invalid_argument("DesignerConfig: n_iter must be >= 0");
  if (n_shot < 2) throw std::invalid_argument("DesignerConfig: n_shot must be >= 2");
  if (!(lambda >= 0.0)) throw std::invalid_argument("DesignerConfig: lambda must be >= 0");
  if (!(leak_max > 0.0 && leak_max < 1.0)) throw std::invalid_argument("DesignerConfig: leak_max must be in (0, 1)");
  if (!(beta >= 0.0 && beta <= 1.0)) throw std::invalid_argument("DesignerConfig: beta must be in [0, 1]");
  if (pretrain_epochs < 1) throw std::invalid_argument("DesignerConfig: pretrain_epochs must be >= 1");
  if (pretrain_passes < 0) throw std::invalid_argument("DesignerConfig: pretrain_passes must be >= 0");
  if (!(pretrain_width > 0.0)) throw std::invalid_argument("DesignerConfig: pretrain_width must be > 0");
}

Eigen::VectorXd AgentStateX::vector() const { return Eigen::Vector3d(i_mean, q_mean, static_cast<double>(k)); }

Eigen::VectorXd AgentStateY::vector() const { return Eigen::Vector2d(ux, leak); }

double reward_x(const AgentStateX& next, const ReadoutTarget& target, double lambda, int k) {
  const double cap = 1.0 - lambda * k;
  const double distance = std::hypot(next.i_mean - target.mean.i, next.q_mean - target.mean.q);
  if (distance < 1e-12) return cap;
  return std::min(cap, target.sigma / distance - lambda * k);
}

double reward_y(const AgentStateY& next, double leak_max) { return std::max(0.0, leak_max - next.leak); }

double reward_x_2q(const AgentStateX2Q& next, const ReadoutTarget& target_1, const ReadoutTarget& target_2,
                   double lambda, int k) {
  const double r1 = reward_x({next.i_mean_1, next.q_mean_1, k}, target_1, lambda, k);
  const double r2 = reward_x({next.i_mean_2, next.q_mean_2, k}, target_2, lambda, k);
  return 0.5 * (r1 + r2);
}

GateEnvironment::GateEnvironment(EnvironmentSettings settings) : settings_(std::move(settings)) {
  settings_.transmon.validate();
  settings_.clusters.validate();
  if (static_cast<int>(settings_.clusters.levels()) != settings_.transmon.levels)
    throw std::invalid_argument("GateEnvironment: cluster model must have one cluster per transmon level");
  if (settings_.n_shot < 2 || settings_.calibration_shots < 10)
    throw std::invalid_argument("GateEnvironment: too few shots");
  if (!(settings_.tau > 0.0)) throw std::invalid_argument("GateEnvironment: tau must be > 0");

  const int levels = settings_.transmon.levels;
  std::vector<IqBatch> labelled;
  for (int m = 0; m < levels; ++m) {
    std::vector<double> pops(levels, 0.0);
    pops[m] = 1.0;
    labelled.push_back(sample_readout(pops, settings_.clusters, settings_.calibration_shots,
                                      derive_seed(settings_.seed, kCalibration, m)));
  }
  discriminator_ = fit_discriminator(labelled);

  double n = 0.0, si = 0.0, sq = 0.0, sii = 0.0, sqq = 0.0;
  for (const IqBatch& b : labelled) {
    for (const IqPoint& p : b.samples) {
      n += 1.0;
      si += p.i;
      sq += p.q;
      sii += p.i * p.i;
      sqq += p.q * p.q;
    }
  }
  calib_mean_ = {si / n, sq / n};
  calib_std_ = {std::sqrt(std::max(sii / n - calib_mean_.i * calib_mean_.i, 0.0)),
                std::sqrt(std::max(sqq / n - calib_mean_.q * calib_mean_.q, 0.0))};
  if (calib_std_.i <= 0.0) calib_std_.i = 1.0;
  if (calib_std_.q <= 0.0) calib_std_.q = 1.0;

  target_state_ = gate_target_state(settings_.gate, levels);
  std::vector<double> target_pops(levels);
  for (int m = 0; m < levels; ++m) target_pops[m] = std::norm(target_state_(m));
  target_readout_ = calibrate_target(target_pops, settings_.clusters, settings_.n_shot,
                                     derive_seed(settings_.seed, kTarget, 0), settings_.sigma_mode);
  initial_ = measure(Matrix::Identity(levels, levels), derive_seed(settings_.seed, kInitial, 0));
}

Normalizer GateEnvironment::x_normalizer(int n_seg) const {
  Normalizer n;
  n.offset = Eigen::Vector3d(calib_mean_.i, calib_mean_.q, 0.0);
  n.scale = Eigen::Vector3d(calib_std_.i, calib_std_.q, static_cast<double>(n_seg));
  return n;
}

Normalizer GateEnvironment::y_normalizer(double leak_max) const {
  const ActionGrid gx = ActionGrid::quadrature_x();
  Normalizer n;
  n.offset = Eigen::Vector2d(0.5 * (gx.min() + gx.max()), 0.0);
  n.scale = Eigen::Vector2d(0.5 * (gx.max() - gx.min()), leak_max);
  return n;
}

std::vector<double> GateEnvironment::estimate_populations(const Matrix& unitary, std::size_t n_shots,
                                                          std::uint64_t seed) const {
  const std::vector<double> pops = populations_from_ground(unitary);
  return rlgate::estimate_populations(sample_readout(pops, settings_.clusters, n_shots, seed), discriminator_);
}

Measurement GateEnvironment::measure(const Matrix& unitary, std::uint64_t seed) const {
  return measure(unitary, settings_.n_shot, seed);
}

Measurement GateEnvironment::measure(const Matrix& unitary, std::size_t n_shots, std::uint64_t seed) const {
  const std::vector<double> pops = populations_from_ground(unitary);
  const IqBatch batch = sample_readout(pops, settings_.clusters, n_shots, seed);
  const std::vector<double> est = rlgate::estimate_populations(batch, discriminator_);
  return {batch_mean(batch), leaked_fraction(est, settings_.leakage_mode)};
}

Agents make_agents(const DesignerConfig& config, const GateEnvironment& env, std::uint64_t seed) {
  Agents a{PolicyNet::initialized(3, config.hidden, static_cast<int>(ActionGrid::quadrature_x().size()),
                                  derive_seed(seed, 1, 0)),
           PolicyNet::initialized(2, config.hidden, static_cast<int>(ActionGrid::quadrature_y().size()),
                                  derive_seed(seed, 2, 0))};
  a.x.normalizer = env.x_normalizer(config.n_seg_max);
  a.y.normalizer = env.y_normalizer(config.leak_max);
  a.x.action_values = a.grid_x.values();
  a.y.action_values = a.grid_y.values();
  return a;
}

PretrainResult pretrain(Agents& agents, const PwcWaveform& drag_pwc, const GateEnvironment& env,
                        const DesignerConfig& config, int n_passes) {
  PretrainResult result;
  const std::size_t n = drag_pwc.size();
  if (n == 0 || n_passes <= 0) return result;
  Optimizer opt_x(config.pretrain_optimizer);
  Optimizer opt_y(config.pretrain_optimizer);
  // Measured states of every pass so far; sweeps replay all of them.
  std::vector<std::pair<std::size_t, Measurement>> data;
  for (int pass = 0; pass < n_passes; ++pass) {
    for (std::size_t k = 0; k < n; ++k) {
      const Measurement m =
          k == 0 ? env.initial()
                 : env.measure(env.unitary(drag_pwc.prefix(k)),
                               derive_seed(config.seed, kPretrain, static_cast<std::uint64_t>(pass) * n + k));
      data.emplace_back(k, m);
    }
    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 rng(derive_seed(config.seed, kPretrainOrder, static_cast<std::uint64_t>(pass)));
    double loss_x = 0.0, loss_y = 0.0;
    for (int epoch = 0; epoch < config.pretrain_epochs; ++epoch) {
      std::shuffle(order.begin(), order.end(), rng);
      for (std::size_t idx : order) {
        const auto& [k, m] = data[idx];
        const Segment& seg = drag_pwc.segments[k];
        const AgentStateX sx{m.mean.i, m.mean.q, static_cast<int>(k)};
        const AgentStateY sy{seg.ux, m.leakage};
        const double lx =
            mse_pretrain_step(agents.x, sx.vector(), seg.ux, agents.grid_x.values(), config.pretrain_width, opt_x);
        const double ly =
            mse_pretrain_step(agents.y, sy.vector(), seg.uy, agents.grid_y.values(), config.pretrain_width, opt_y);
        if (epoch == 0) {
          loss_x += lx;
          loss_y += ly;
        }
      }
    }
    // Mean loss of the first sweep, before this pass's updates took effect.
    result.mse_x.push_back(loss_x / static_cast<double>(data.size()));
    result.mse_y.push_back(loss_y / static_cast<double>(data.size()));
  }
  return result;
}

PwcWaveform synthesize(const Agents& agents, int n_segments, RolloutMode mode, const GateEnvironment& env,
                       std::uint64_t seed) {
  if (n_segments < 1) throw std::invalid_argument("synthesize: n_segments must be >= 1");
  PwcWaveform w;
  w.tau = env.settings().tau;
  w.omega_d = env.settings().transmon.omega_d;
  std::mt19937_64 rng(derive_seed(seed, kRolloutActions, 0));
  AgentStateX sx{env.initial().mean.i, env.initial().mean.q, 0};
  double leak = env.initial().leakage;
  for (int k = 0; k < n_segments; ++k) {
    const Eigen::VectorXd px = agents.x.forward(sx.vector());
    const std::size_t ax = mode == RolloutMode::Greedy ? greedy_action(px) : sample_action(px, rng);
    const AgentStateY sy{agents.grid_x[ax], leak};
    const Eigen::VectorXd py = agents.y.forward(sy.vector());
    const std::size_t ay = mode == RolloutMode::Greedy ? greedy_action(py) : sample_action(py, rng);
    w.segments.push_back({agents.grid_x[ax], agents.grid_y[ay]});
    if (k + 1 == n_segments) break;
    const Measurement m = env.measure(env.unitary(w), derive_seed(seed, kRollout, static_cast<std::uint64_t>(k)));
    sx = {m.mean.i, m.mean.q, k + 1};
    leak = m.leakage;
  }
  return w;
}

GateReport evaluate(const PwcWaveform& waveform, const GateEnvironment& env, const StateVector& target,
                    std::size_t n_shots, std::uint64_t seed) {
  GateReport r;
  r.waveform = waveform;
  r.n_segments = static_cast<int>(waveform.size());
  r.gate_time_ns = waveform.duration();
  const Matrix u = env.unitary(waveform);
  r.fidelity = fidelity(u, target);
  r.leakage = leakage(u, env.settings().leakage_mode);
  const std::vector<double> est = env.estimate_populations(u, n_shots, derive_seed(seed, kEvaluate, 0));
  double overlap = 0.0;
  for (std::size_t m = 0; m < est.size(); ++m)
    overlap += std::sqrt(est[m] * std::norm(target(static_cast<Eigen::Index>(m))));
  r.fidelity_est = overlap * overlap;
  r.leakage_est = leaked_fraction(est, env.settings().leakage_mode);
  return r;
}

TrainState initial_train_state(const DesignerConfig& config, const GateEnvironment& env) {
  TrainState s;
  s.waveform.tau = env.settings().tau;
  s.waveform.omega_d = env.settings().transmon.omega_d;
  s.state_x = {env.initial().mean.i, env.initial().mean.q, 0};
  s.leak = env.initial().leakage;
  s.optimizer_x = Optimizer(config.optimizer_x);
  s.optimizer_y = Optimizer(config.optimizer_y);
  return s;
}

std::vector<TrainLogRecord> train(const DesignerConfig& config, const GateEnvironment& env, Agents& agents,
                                  TrainState& state, const TrainOptions& options) {
  config.validate();
  std::vector<TrainLogRecord> log;
  const StateVector& target = env.target_state();
  while (state.iteration < config.n_iter) {
    const auto started = std::chrono::steady_clock::now();
    const int i = state.iteration;
    std::mt19937_64 rng(derive_seed(config.seed, kActions, static_cast<std::uint64_t>(i)));
    Trajectory traj_x, traj_y;
    for (int j = 0; j < config.n_ep; ++j) {
      if (state.k == config.n_seg_max) {
        state.k = 0;
        state.waveform.segments.clear();
        state.state_x = {env.initial().mean.i, env.initial().mean.q, 0};
        state.leak = env.initial().leakage;
      }
      const Eigen::VectorXd sx = state.state_x.vector();
      const std::size_t ax = sample_action(agents.x.forward(sx), rng);
      const AgentStateY sy{agents.grid_x[ax], state.leak};
      const std::size_t ay = sample_action(agents.y.forward(sy.vector()), rng);
      state.waveform.segments.push_back({agents.grid_x[ax], agents.grid_y[ay]});

      const std::uint64_t episode = static_cast<std::uint64_t>(i) * static_cast<std::uint64_t>(config.n_ep) + j;
      const Measurement m = env.measure(env.unitary(state.waveform), derive_seed(config.seed, kMeasure, episode));
      ++state.k;
      const AgentStateX next_x{m.mean.i, m.mean.q, state.k};
      const double rx = reward_x(next_x, env.target_readout(), config.lambda, state.k);
      const AgentStateY next_y{sy.ux, m.leakage};
      const double ry = reward_y(next_y, config.leak_max);
      require_finite(rx, "x reward", i, j);
      require_finite(ry, "y reward", i, j);

      traj_x.push_back({sx, ax, rx});
      traj_y.push_back({sy.vector(), ay, ry});
      state.state_x = next_x;
      state.leak = m.leakage;
    }
    reinforce_update(agents.x, traj_x, config.beta, state.optimizer_x);
    reinforce_update(agents.y, traj_y, config.beta, state.optimizer_y);
    ++state.iteration;

    TrainLogRecord rec;
    rec.iter = i;
    for (std::size_t j = 0; j < traj_x.size(); ++j) {
      rec.mean_reward_x += traj_x[j].reward / static_cast<double>(traj_x.size());
      rec.mean_reward_y += traj_y[j].reward / static_cast<double>(traj_y.size());
    }
    const std::uint64_t probe_seed = derive_seed(config.seed, kProbe, 0);
    const PwcWaveform probe = synthesize(agents, config.n_seg_max, RolloutMode::Greedy, env, probe_seed);
    const GateReport full = evaluate(probe, env, target, config.n_shot, probe_seed);
    rec.probe_fidelity = full.fidelity;
    rec.probe_leakage = full.leakage;
    for (int len : options.probe_lengths) {
      if (len < 1 || len > config.n_seg_max) continue;
      const GateReport r = evaluate(probe.prefix(static_cast<std::size_t>(len)), env, target, config.n_shot, probe_seed);
      auto it = state.best.find(len);
      if (it == state.best.end() ||
          (1.0 - r.fidelity) + r.leakage < (1.0 - it->second.fidelity) + it->second.leakage)
        state.best[len] = r;
    }
    if (options.record_wall_time)
      rec.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
    log.push_back(rec);
    if (options.on_iteration) options.on_iteration(rec, agents, state);
  }
  return log;
}

std::vector<BenchmarkRow> benchmark(const std::vector<BenchmarkInput>& inputs, std::size_t n_shots,
                                    std::uint64_t seed) {
  std::vector<BenchmarkRow> rows;
  for (const BenchmarkInput& in : inputs) {
    if (in.env == nullptr || in.agents == nullptr) throw std::invalid_argument("benchmark: missing environment or agents");
    const GateEnvironment& env = *in.env;
    const GateKind gate = env.settings().gate;
    const double omega_d = env.settings().transmon.omega_d;
    const std::uint64_t s = derive_seed(seed, static_cast<std::uint64_t>(gate), 0);
    auto reference = [&](const char* name, const DragParams& p) {
      GateReport r = evaluate(sample_drag(p, in.drag_samples, omega_d), env, env.target_state(), n_shots, s);
      // Counted in drive segments of length tau, not generator samples.
      r.n_segments = static_cast<int>(std::lround(r.gate_time_ns / env.settings().tau));
      rows.push_back({gate, name, std::move(r)});
    };
    reference("DRAG", in.drag);
    if (in.gaussian) reference("GAUSS", *in.gaussian);
    for (int n : {20, 15, 10}) {
      const auto kept = in.trained_gates.find(n);
      const PwcWaveform w = kept != in.trained_gates.end() ? kept->second
                                                            : synthesize(*in.agents, n, RolloutMode::Greedy, env, s);
      rows.push_back({gate, "RL" + std::to_string(n), evaluate(w, env, env.target_state(), n_shots, s)});
    }
  }
  return rows;
}

}  // namespace rlgate
