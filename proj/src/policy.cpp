#include "rlgate/policy.hpp"

#include <cmath>
#include <limits>
#include <numeric>

namespace rlgate {

Normalizer Normalizer::identity(int dim) { return {Eigen::VectorXd::Zero(dim), Eigen::VectorXd::Ones(dim)}; }

PolicyNet::PolicyNet(int input_dim, std::vector<int> hidden, int action_count)
    : normalizer(Normalizer::identity(input_dim)), input_dim_(input_dim), hidden_(std::move(hidden)) {
  if (input_dim < 1 || action_count < 1) throw std::invalid_argument("PolicyNet: dimensions must be positive");
  widths_.push_back(input_dim);
  for (int h : hidden_) {
    if (h < 1) throw std::invalid_argument("PolicyNet: hidden width must be positive");
    widths_.push_back(h);
  }
  widths_.push_back(action_count);
  std::size_t at = 0;
  for (std::size_t l = 0; l + 1 < widths_.size(); ++l) {
    Offsets o;
    o.w = at;
    at += static_cast<std::size_t>(widths_[l + 1]) * static_cast<std::size_t>(widths_[l]);
    o.b = at;
    at += static_cast<std::size_t>(widths_[l + 1]);
    offsets_.push_back(o);
  }
  params_ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(at));
}

PolicyNet PolicyNet::initialized(int input_dim, std::vector<int> hidden, int action_count, std::uint64_t seed) {
  PolicyNet net(input_dim, std::move(hidden), action_count);
  std::mt19937_64 engine(seed);
  for (std::size_t l = 0; l < net.layer_count(); ++l) {
    auto w = net.weight(l);
    const double limit = std::sqrt(6.0 / static_cast<double>(w.rows() + w.cols()));
    const double gain = l + 1 == net.layer_count() ? 0.1 : 1.0;
    std::uniform_real_distribution<double> uniform(-limit, limit);
    for (Eigen::Index j = 0; j < w.cols(); ++j)
      for (Eigen::Index i = 0; i < w.rows(); ++i) w(i, j) = gain * uniform(engine);
  }
  return net;
}

Eigen::Map<Eigen::MatrixXd> PolicyNet::weight(std::size_t layer) {
  return {params_.data() + offsets_[layer].w, widths_[layer + 1], widths_[layer]};
}
Eigen::Map<const Eigen::MatrixXd> PolicyNet::weight(std::size_t layer) const {
  return {params_.data() + offsets_[layer].w, widths_[layer + 1], widths_[layer]};
}
Eigen::Map<Eigen::VectorXd> PolicyNet::bias(std::size_t layer) {
  return {params_.data() + offsets_[layer].b, widths_[layer + 1]};
}
Eigen::Map<const Eigen::VectorXd> PolicyNet::bias(std::size_t layer) const {
  return {params_.data() + offsets_[layer].b, widths_[layer + 1]};
}

std::vector<Eigen::VectorXd> PolicyNet::activations(const Eigen::VectorXd& state) const {
  if (state.size() != input_dim_) throw std::invalid_argument("PolicyNet: state dimension mismatch");
  std::vector<Eigen::VectorXd> acts;
  acts.reserve(widths_.size());
  acts.push_back(normalizer.apply(state));
  for (std::size_t l = 0; l < layer_count(); ++l) {
    Eigen::VectorXd z = weight(l) * acts.back() + bias(l);
    if (l + 1 < layer_count()) z = z.array().tanh();
    acts.push_back(std::move(z));
  }
  return acts;
}

Eigen::VectorXd PolicyNet::logits(const Eigen::VectorXd& state) const { return activations(state).back(); }

namespace {

Eigen::VectorXd softmax(const Eigen::VectorXd& z) {
  const Eigen::VectorXd e = (z.array() - z.maxCoeff()).exp();
  return e / e.sum();
}

}  // namespace

Eigen::VectorXd PolicyNet::forward(const Eigen::VectorXd& state) const { return softmax(logits(state)); }

Eigen::VectorXd PolicyNet::backward(const std::vector<Eigen::VectorXd>& acts, const Eigen::VectorXd& dlogits) const {
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(params_.size());
  Eigen::VectorXd delta = dlogits;
  for (std::size_t l = layer_count(); l-- > 0;) {
    const Eigen::VectorXd& input = acts[l];
    Eigen::Map<Eigen::MatrixXd>(grad.data() + offsets_[l].w, widths_[l + 1], widths_[l]) = delta * input.transpose();
    Eigen::Map<Eigen::VectorXd>(grad.data() + offsets_[l].b, widths_[l + 1]) = delta;
    if (l > 0) delta = (weight(l).transpose() * delta).cwiseProduct((1.0 - input.array().square()).matrix());
  }
  return grad;
}

Eigen::VectorXd PolicyNet::grad_log_prob(const Eigen::VectorXd& state, std::size_t action) const {
  const auto acts = activations(state);
  Eigen::VectorXd d = -softmax(acts.back());
  d(static_cast<Eigen::Index>(action)) += 1.0;
  return backward(acts, d);
}

double PolicyNet::mse_loss(const Eigen::VectorXd& state, const Eigen::VectorXd& target, Eigen::VectorXd* grad) const {
  const auto acts = activations(state);
  const Eigen::VectorXd p = softmax(acts.back());
  if (target.size() != p.size()) throw std::invalid_argument("PolicyNet::mse_loss: target size mismatch");
  const Eigen::VectorXd diff = p - target;
  const double n = static_cast<double>(p.size());
  if (grad != nullptr) {
    const Eigen::VectorXd dp = 2.0 * diff / n;
    const Eigen::VectorXd dz = p.cwiseProduct((dp.array() - p.dot(dp)).matrix());
    *grad = backward(acts, dz);
  }
  return diff.squaredNorm() / n;
}

bool PolicyNet::operator==(const PolicyNet& o) const {
  return input_dim_ == o.input_dim_ && widths_ == o.widths_ && params_ == o.params_ && normalizer == o.normalizer &&
         action_values == o.action_values;
}

void Optimizer::reset() {
  first_.resize(0);
  second_.resize(0);
  steps_ = 0;
}

void Optimizer::restore(Eigen::VectorXd first, Eigen::VectorXd second, std::uint64_t steps) {
  if (first.size() != second.size()) throw std::invalid_argument("Optimizer::restore: moment size mismatch");
  first_ = std::move(first);
  second_ = std::move(second);
  steps_ = steps;
}

void Optimizer::step(Eigen::VectorXd& params, const Eigen::VectorXd& direction) {
  if (first_.size() != params.size()) {
    first_ = Eigen::VectorXd::Zero(params.size());
    second_ = Eigen::VectorXd::Zero(params.size());
    steps_ = 0;
  }
  ++steps_;
  const Settings& s = settings_;
  if (s.kind == OptimizerKind::SgdMomentum) {
    first_ = s.momentum * first_ + direction;
    params += s.learning_rate * first_;
    return;
  }
  first_ = s.beta1 * first_ + (1.0 - s.beta1) * direction;
  second_ = s.beta2 * second_ + (1.0 - s.beta2) * direction.cwiseAbs2();
  const double c1 = 1.0 - std::pow(s.beta1, static_cast<double>(steps_));
  const double c2 = 1.0 - std::pow(s.beta2, static_cast<double>(steps_));
  params.array() += s.learning_rate * (first_.array() / c1) / ((second_.array() / c2).sqrt() + s.epsilon);
}

std::vector<double> discounted_returns(const Trajectory& traj, double beta) {
  std::vector<double> g(traj.size());
  double acc = 0.0;
  for (std::size_t j = traj.size(); j-- > 0;) {
    acc = traj[j].reward + beta * acc;
    g[j] = acc;
  }
  return g;
}

Eigen::VectorXd reinforce_gradient(const PolicyNet& net, const Trajectory& traj, double beta) {
  if (traj.empty()) throw std::invalid_argument("reinforce_gradient: empty trajectory");
  const std::vector<double> g = discounted_returns(traj, beta);
  const double baseline = std::accumulate(g.begin(), g.end(), 0.0) / static_cast<double>(g.size());
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(net.parameters().size());
  for (std::size_t j = 0; j < traj.size(); ++j) {
    const double advantage = g[j] - baseline;
    if (advantage != 0.0) grad += advantage * net.grad_log_prob(traj[j].state, traj[j].action);
  }
  return grad;
}

double reinforce_update(PolicyNet& net, const Trajectory& traj, double beta, Optimizer& optimizer) {
  const Eigen::VectorXd grad = reinforce_gradient(net, traj, beta);
  if (!grad.allFinite()) throw NumericError("reinforce_update: non-finite policy gradient");
  Eigen::VectorXd next = net.parameters();
  optimizer.step(next, grad);
  if (!next.allFinite()) throw NumericError("reinforce_update: non-finite parameters after step");
  net.parameters() = std::move(next);
  return grad.norm();
}

double reinforce_update(PolicyNet& net, const Trajectory& traj, double beta, double learning_rate) {
  Optimizer sgd({OptimizerKind::SgdMomentum, learning_rate, 0.0});
  return reinforce_update(net, traj, beta, sgd);
}

std::size_t sample_action(const Eigen::VectorXd& probabilities, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  const double u = uniform(rng) * probabilities.sum();
  double cdf = 0.0;
  const auto n = static_cast<std::size_t>(probabilities.size());
  for (std::size_t i = 0; i + 1 < n; ++i) {
    cdf += probabilities(static_cast<Eigen::Index>(i));
    if (u < cdf) return i;
  }
  return n - 1;
}

std::size_t greedy_action(const Eigen::VectorXd& probabilities) {
  Eigen::Index best = 0;
  probabilities.maxCoeff(&best);
  return static_cast<std::size_t>(best);
}

Eigen::VectorXd gaussian_target(const std::vector<double>& grid, double center, double width) {
  Eigen::VectorXd t(static_cast<Eigen::Index>(grid.size()));
  double closest = std::numeric_limits<double>::infinity();
  for (double v : grid) closest = std::min(closest, (v - center) * (v - center));
  // Exponents are shifted by the nearest grid point so tiny widths stay finite.
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double d2 = (grid[i] - center) * (grid[i] - center);
    t(static_cast<Eigen::Index>(i)) = std::exp(-(d2 - closest) / (2.0 * width * width));
  }
  return t / t.sum();
}

double mse_pretrain_step(PolicyNet& net, const Eigen::VectorXd& state, double target_center,
                         const std::vector<double>& grid, double width, Optimizer& optimizer) {
  const Eigen::VectorXd target = gaussian_target(grid, target_center, width);
  Eigen::VectorXd grad;
  const double loss = net.mse_loss(state, target, &grad);
  if (!grad.allFinite()) throw NumericError("mse_pretrain_step: non-finite gradient");
  optimizer.step(net.parameters(), -grad);
  return loss;
}

double mse_pretrain_step(PolicyNet& net, const Eigen::VectorXd& state, double target_center,
                         const std::vector<double>& grid, double width, double learning_rate) {
  Optimizer sgd({OptimizerKind::SgdMomentum, learning_rate, 0.0});
  return mse_pretrain_step(net, state, target_center, grid, width, sgd);
}

}  // namespace rlgate
