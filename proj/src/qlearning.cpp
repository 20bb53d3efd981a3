#include "rlgate/qlearning.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace rlgate {

QTable::QTable(std::size_t n_states, std::size_t n_actions, double init)
    : n_states_(n_states), n_actions_(n_actions), values_(n_states * n_actions, init) {}

double QTable::max_value(std::size_t s) const {
  const auto row = values_.begin() + static_cast<std::ptrdiff_t>(s * n_actions_);
  return *std::max_element(row, row + static_cast<std::ptrdiff_t>(n_actions_));
}

std::size_t QTable::greedy_action(std::size_t s) const {
  const auto row = values_.begin() + static_cast<std::ptrdiff_t>(s * n_actions_);
  return static_cast<std::size_t>(std::max_element(row, row + static_cast<std::ptrdiff_t>(n_actions_)) - row);
}

std::vector<std::size_t> QTable::greedy_policy() const {
  std::vector<std::size_t> policy(n_states_);
  for (std::size_t s = 0; s < n_states_; ++s) policy[s] = greedy_action(s);
  return policy;
}

double max_abs_difference(const QTable& a, const QTable& b) {
  if (a.values().size() != b.values().size()) throw std::invalid_argument("max_abs_difference: shape mismatch");
  double m = 0.0;
  for (std::size_t i = 0; i < a.values().size(); ++i) m = std::max(m, std::abs(a.values()[i] - b.values()[i]));
  return m;
}

void FiniteMdp::validate() const {
  if (n_states == 0 || n_actions == 0) throw std::invalid_argument("FiniteMdp: empty");
  if (transition.size() != n_states * n_actions * n_states || reward.size() != transition.size())
    throw std::invalid_argument("FiniteMdp: table size mismatch");
  if (!(beta >= 0.0 && beta < 1.0)) throw std::invalid_argument("FiniteMdp: beta must be in [0, 1)");
  for (std::size_t s = 0; s < n_states; ++s) {
    for (std::size_t u = 0; u < n_actions; ++u) {
      double sum = 0.0;
      for (std::size_t sn = 0; sn < n_states; ++sn) {
        if (t(s, u, sn) < 0.0) throw std::invalid_argument("FiniteMdp: negative transition probability");
        sum += t(s, u, sn);
      }
      if (std::abs(sum - 1.0) > 1e-12) throw std::invalid_argument("FiniteMdp: transition row does not sum to 1");
    }
  }
}

FiniteMdp FiniteMdp::random(std::size_t n_states, std::size_t n_actions, double beta, std::uint64_t seed) {
  std::mt19937_64 engine(seed);
  std::exponential_distribution<double> exponential(1.0);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  FiniteMdp mdp{n_states, n_actions, {}, {}, beta};
  mdp.transition.resize(n_states * n_actions * n_states);
  mdp.reward.resize(mdp.transition.size());
  for (std::size_t su = 0; su < n_states * n_actions; ++su) {
    // Normalized exponentials are a Dirichlet(1, ..., 1) draw.
    double total = 0.0;
    for (std::size_t sn = 0; sn < n_states; ++sn) total += mdp.transition[su * n_states + sn] = exponential(engine);
    double partial = 0.0;
    for (std::size_t sn = 0; sn + 1 < n_states; ++sn) partial += mdp.transition[su * n_states + sn] /= total;
    mdp.transition[su * n_states + n_states - 1] = 1.0 - partial;
    const double r = uniform(engine);
    std::fill_n(mdp.reward.begin() + static_cast<std::ptrdiff_t>(su * n_states), n_states, r);
  }
  mdp.validate();
  return mdp;
}

FiniteMdp FiniteMdp::single_state(double reward, double beta) {
  FiniteMdp mdp{1, 1, {1.0}, {reward}, beta};
  mdp.validate();
  return mdp;
}

void q_update(QTable& q, std::size_t s, std::size_t u, double r, std::size_t s_next, double alpha, double beta) {
  const double target = r + beta * q.max_value(s_next);
  q(s, u) += alpha * (target - q(s, u));
}

QTable q_learn(const FiniteMdp& mdp, const QLearnOptions& options) {
  mdp.validate();
  std::mt19937_64 engine(options.seed);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> any_action(0, mdp.n_actions - 1);

  QTable q(mdp.n_states, mdp.n_actions);
  QTable mean = q;
  std::vector<std::uint64_t> visits(mdp.n_states * mdp.n_actions, 0);
  const std::uint64_t average_from = options.n_steps / 2;
  std::uint64_t averaged = 0;

  std::size_t s = options.start_state;
  for (std::uint64_t step = 0; step < options.n_steps; ++step) {
    const std::size_t u = uniform(engine) < options.exploration.epsilon ? any_action(engine) : q.greedy_action(s);
    const double draw = uniform(engine);
    std::size_t sn = 0;
    double cdf = mdp.t(s, u, 0);
    while (sn + 1 < mdp.n_states && draw >= cdf) cdf += mdp.t(s, u, ++sn);

    const std::uint64_t n = ++visits[s * mdp.n_actions + u];
    q_update(q, s, u, mdp.r(s, u, sn), sn, options.schedule(n), mdp.beta);
    s = sn;

    if (options.average_iterates && step >= average_from) {
      ++averaged;
      const double w = 1.0 / static_cast<double>(averaged);
      for (std::size_t i = 0; i < mdp.n_states; ++i)
        for (std::size_t a = 0; a < mdp.n_actions; ++a) mean(i, a) += w * (q(i, a) - mean(i, a));
    }
  }
  return options.average_iterates && averaged > 0 ? mean : q;
}

namespace {

QTable bellman_apply(const FiniteMdp& mdp, const QTable& q) {
  QTable next(mdp.n_states, mdp.n_actions);
  for (std::size_t s = 0; s < mdp.n_states; ++s) {
    for (std::size_t u = 0; u < mdp.n_actions; ++u) {
      double v = 0.0;
      for (std::size_t sn = 0; sn < mdp.n_states; ++sn) v += mdp.t(s, u, sn) * (mdp.r(s, u, sn) + mdp.beta * q.max_value(sn));
      next(s, u) = v;
    }
  }
  return next;
}

}  // namespace

QTable value_iteration(const FiniteMdp& mdp, double tol) {
  if (!(tol > 0.0)) throw std::invalid_argument("value_iteration: tol must be > 0");
  mdp.validate();
  // beta = 0 is the myopic limit: one application is exact.
  const double stop = mdp.beta > 0.0 ? tol * (1.0 - mdp.beta) / mdp.beta : std::numeric_limits<double>::infinity();
  QTable q(mdp.n_states, mdp.n_actions);
  while (true) {
    QTable next = bellman_apply(mdp, q);
    const double change = max_abs_difference(next, q);
    q = std::move(next);
    if (change < stop) return q;
  }
}

double bellman_residual(const FiniteMdp& mdp, const QTable& q) { return max_abs_difference(bellman_apply(mdp, q), q); }

}  // namespace rlgate
