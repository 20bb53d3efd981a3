#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace rlgate {

// Per-dimension affine standardization (x - offset) / scale.
struct Normalizer {
  Eigen::VectorXd offset;
  Eigen::VectorXd scale;

  static Normalizer identity(int dim);
  Eigen::VectorXd apply(const Eigen::VectorXd& x) const { return (x - offset).cwiseQuotient(scale); }
  bool operator==(const Normalizer& o) const { return offset == o.offset && scale == o.scale; }
};

// Feed-forward softmax policy: tanh hidden layers, linear output logits.
// Parameters live in one flat vector, layer by layer, each layer as its
// column-major weight matrix followed by its bias.
class PolicyNet {
 public:
  PolicyNet(int input_dim, std::vector<int> hidden, int action_count);

  // Xavier-uniform hidden weights, zero biases, output weights scaled by 0.1.
  static PolicyNet initialized(int input_dim, std::vector<int> hidden, int action_count, std::uint64_t seed);

  int input_dim() const { return input_dim_; }
  int action_count() const { return widths_.back(); }
  std::size_t layer_count() const { return widths_.size() - 1; }
  const std::vector<int>& hidden() const { return hidden_; }

  Eigen::Map<Eigen::MatrixXd> weight(std::size_t layer);
  Eigen::Map<const Eigen::MatrixXd> weight(std::size_t layer) const;
  Eigen::Map<Eigen::VectorXd> bias(std::size_t layer);
  Eigen::Map<const Eigen::VectorXd> bias(std::size_t layer) const;

  Eigen::VectorXd& parameters() { return params_; }
  const Eigen::VectorXd& parameters() const { return params_; }

  Normalizer normalizer;
  // Amplitude carried by each action index; informational, stored in checkpoints.
  std::vector<double> action_values;

  Eigen::VectorXd logits(const Eigen::VectorXd& state) const;
  // Softmax probabilities; throws std::invalid_argument on dimension mismatch.
  Eigen::VectorXd forward(const Eigen::VectorXd& state) const;

  // d log pi(action | state) / d parameters
  Eigen::VectorXd grad_log_prob(const Eigen::VectorXd& state, std::size_t action) const;

  // Mean squared error between pi(. | state) and target; writes its gradient.
  double mse_loss(const Eigen::VectorXd& state, const Eigen::VectorXd& target, Eigen::VectorXd* grad = nullptr) const;

  bool operator==(const PolicyNet& o) const;

 private:
  struct Offsets {
    std::size_t w = 0;
    std::size_t b = 0;
  };
  // Backpropagates dL/dlogits into a parameter gradient.
  Eigen::VectorXd backward(const std::vector<Eigen::VectorXd>& activations, const Eigen::VectorXd& dlogits) const;
  std::vector<Eigen::VectorXd> activations(const Eigen::VectorXd& state) const;

  int input_dim_;
  std::vector<int> hidden_;
  std::vector<int> widths_;
  std::vector<Offsets> offsets_;
  Eigen::VectorXd params_;
};

// Thrown when an update would produce non-finite parameters.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class OptimizerKind { SgdMomentum, Adam };

// First-order optimizer with per-parameter state. step() moves parameters
// along +direction (ascent); pass a negated gradient to descend.
class Optimizer {
 public:
  struct Settings {
    OptimizerKind kind = OptimizerKind::SgdMomentum;
    double learning_rate = 1e-2;
    double momentum = 0.9;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
  };

  Optimizer() = default;
  explicit Optimizer(Settings settings) : settings_(settings) {}

  void step(Eigen::VectorXd& params, const Eigen::VectorXd& direction);
  void reset();
  const Settings& settings() const { return settings_; }
  Settings& settings() { return settings_; }

  // Moment buffers and step count, for checkpointing.
  const Eigen::VectorXd& first_moment() const { return first_; }
  const Eigen::VectorXd& second_moment() const { return second_; }
  std::uint64_t steps() const { return steps_; }
  void restore(Eigen::VectorXd first, Eigen::VectorXd second, std::uint64_t steps);

 private:
  Settings settings_;
  Eigen::VectorXd first_;
  Eigen::VectorXd second_;
  std::uint64_t steps_ = 0;
};

struct TrajectoryStep {
  Eigen::VectorXd state;
  std::size_t action = 0;
  double reward = 0.0;
};
using Trajectory = std::vector<TrajectoryStep>;

// G_j = sum_{m >= j} beta^(m-j) r_m
std::vector<double> discounted_returns(const Trajectory& traj, double beta);

// Ascent direction of sum_j (G_j - b) log pi(u_j | s_j), b the mean of G_j.
Eigen::VectorXd reinforce_gradient(const PolicyNet& net, const Trajectory& traj, double beta);

// Applies one REINFORCE step. Throws NumericError (parameters untouched) if
// the gradient is not finite. Returns the gradient norm.
double reinforce_update(PolicyNet& net, const Trajectory& traj, double beta, Optimizer& optimizer);
// Plain gradient-ascent variant.
double reinforce_update(PolicyNet& net, const Trajectory& traj, double beta, double learning_rate);

std::size_t sample_action(const Eigen::VectorXd& probabilities, std::mt19937_64& rng);
std::size_t greedy_action(const Eigen::VectorXd& probabilities);

// Normalized grid-discretized Gaussian centred at center; width -> 0 gives
// a one-hot vector at the nearest grid point.
Eigen::VectorXd gaussian_target(const std::vector<double>& grid, double center, double width);

// One descent step on the MSE between pi(. | state) and gaussian_target.
// Returns the loss before the step.
double mse_pretrain_step(PolicyNet& net, const Eigen::VectorXd& state, double target_center,
                         const std::vector<double>& grid, double width, Optimizer& optimizer);
double mse_pretrain_step(PolicyNet& net, const Eigen::VectorXd& state, double target_center,
                         const std::vector<double>& grid, double width, double learning_rate);

}  // namespace rlgate
