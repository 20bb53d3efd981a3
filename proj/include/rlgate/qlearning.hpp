#pragma once

#include <cstdint>
#include <vector>

namespace rlgate {

// Dense table Q(s, u).
class QTable {
 public:
  QTable(std::size_t n_states, std::size_t n_actions, double init = 0.0);

  std::size_t n_states() const { return n_states_; }
  std::size_t n_actions() const { return n_actions_; }
  double& operator()(std::size_t s, std::size_t u) { return values_[s * n_actions_ + u]; }
  double operator()(std::size_t s, std::size_t u) const { return values_[s * n_actions_ + u]; }
  double max_value(std::size_t s) const;
  std::size_t greedy_action(std::size_t s) const;
  std::vector<std::size_t> greedy_policy() const;
  const std::vector<double>& values() const { return values_; }

  bool operator==(const QTable&) const = default;

 private:
  std::size_t n_states_;
  std::size_t n_actions_;
  std::vector<double> values_;
};

double max_abs_difference(const QTable& a, const QTable& b);

// Finite MDP with kernel T(s'|s,u), reward r(s,u,s') and discount beta.
struct FiniteMdp {
  std::size_t n_states = 0;
  std::size_t n_actions = 0;
  std::vector<double> transition;  // [s][u][s'] row-major
  std::vector<double> reward;      // [s][u][s'] row-major
  double beta = 0.9;

  double t(std::size_t s, std::size_t u, std::size_t sn) const { return transition[(s * n_actions + u) * n_states + sn]; }
  double r(std::size_t s, std::size_t u, std::size_t sn) const { return reward[(s * n_actions + u) * n_states + sn]; }

  // Rows sum to 1 within 1e-12, 0 <= beta < 1 (beta = 0 is the myopic limit). Throws std::invalid_argument.
  void validate() const;

  // Dense Dirichlet(1) transition rows and state-action rewards U[0, 1]
  // (constant in s'), drawn from a fixed seed.
  static FiniteMdp random(std::size_t n_states, std::size_t n_actions, double beta, std::uint64_t seed);
  // One state, one action, reward r per step: Q* = r / (1 - beta).
  static FiniteMdp single_state(double reward, double beta);
};

// Q(s,u) += alpha [r + beta max_v Q(s',v) - Q(s,u)]
void q_update(QTable& q, std::size_t s, std::size_t u, double r, std::size_t s_next, double alpha, double beta);

// Step size alpha_n = alpha0 / (1 + n / tau_decay), n the visit count of the
// updated pair. tau_decay = 1 / (1 - beta) is the rescaled-linear choice.
struct LearningRateSchedule {
  double alpha0 = 1.0;
  double tau_decay = 10.0;
  double operator()(std::uint64_t visits) const { return alpha0 / (1.0 + static_cast<double>(visits) / tau_decay); }
};

struct Exploration {
  // Probability of a uniformly random action; Q-learning is off-policy so
  // epsilon = 1 is a valid behaviour policy.
  double epsilon = 1.0;
};

struct QLearnOptions {
  LearningRateSchedule schedule;
  Exploration exploration;
  std::uint64_t n_steps = 1'000'000;
  std::uint64_t seed = 0;
  std::size_t start_state = 0;
  // Return the running mean of the iterates over the last half of the run
  // instead of the last iterate.
  bool average_iterates = true;
};

QTable q_learn(const FiniteMdp& mdp, const QLearnOptions& options);

// Bellman optimality iteration until the sup-norm change drops below
// tol (1 - beta) / beta, so the returned table is within tol of Q*.
QTable value_iteration(const FiniteMdp& mdp, double tol);

// max over (s,u) of |Q(s,u) - E[r + beta max_v Q(s',v)]|
double bellman_residual(const FiniteMdp& mdp, const QTable& q);

}  // namespace rlgate
