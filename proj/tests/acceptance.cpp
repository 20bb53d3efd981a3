// Acceptance run: one PASS/FAIL line per criterion. Exits non-zero if any fails.
#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <random>
#include <sstream>

#include "rlgate/pipeline.hpp"

using namespace rlgate;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;
std::map<int, std::string> lines;

void report(int n, double budget_s, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool in_time = s <= budget_s;
  const bool pass = o.pass && in_time;
  if (!pass) ++failures;
  std::ostringstream line;
  line << "criterion " << n << ": " << (pass ? "PASS" : "FAIL") << "  " << o.detail << std::fixed
       << std::setprecision(1) << " [" << s << " s, budget " << budget_s << " s]";
  lines[n] = line.str();
}

std::string fmt(double x) {
  std::ostringstream o;
  o << std::setprecision(6) << x;
  return o.str();
}

fs::path fresh_dir(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("rlgate_acceptance_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

RunConfig default_run(const fs::path& out) {
  RunConfig c = config_from_json(default_config_json());
  c.output_dir = out;
  return c;
}

// Identical relative file sets with identical bytes.
bool same_tree(const fs::path& a, const fs::path& b, std::string* diff) {
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(a))
    if (e.is_regular_file()) files.push_back(fs::relative(e.path(), a));
  std::size_t count_b = 0;
  for (const auto& e : fs::recursive_directory_iterator(b)) count_b += e.is_regular_file();
  if (count_b != files.size()) {
    *diff = "file sets differ";
    return false;
  }
  for (const fs::path& f : files)
    if (!fs::exists(b / f) || read_text_file(a / f) != read_text_file(b / f)) {
      *diff = f.string() + " differs";
      return false;
    }
  return true;
}

double surrogate(const PolicyNet& net, const Trajectory& traj, double beta) {
  const std::vector<double> g = discounted_returns(traj, beta);
  double b = 0.0;
  for (double x : g) b += x / static_cast<double>(g.size());
  double total = 0.0;
  for (std::size_t j = 0; j < traj.size(); ++j)
    total += (g[j] - b) * std::log(net.forward(traj[j].state)(static_cast<Eigen::Index>(traj[j].action)));
  return total;
}

}  // namespace

int main() {
  const fs::path main_dir = fresh_dir("main");
  const RunConfig config = default_run(main_dir);
  std::ostringstream quiet;
  PretrainSummary pre;

  report(1, 30, [] {
    std::ostringstream log;
    const QlearnDemoResult r = cmd_qlearn_demo(log);
    bool pass = true;
    std::string detail = "max|Q - Q_VI| =";
    for (std::size_t i = 0; i < r.max_deviation.size(); ++i) {
      pass = pass && r.max_deviation[i] < 1e-3 && r.policies_agree[i];
      detail += " " + fmt(r.max_deviation[i]) + (r.policies_agree[i] ? "" : "(policy differs)");
    }
    return Outcome{pass, detail + " (bound 1e-3)"};
  });

  report(2, 10, [] {
    std::mt19937_64 rng(2024);
    std::normal_distribution<double> g(0.0, 1.0);
    double worst = 0.0;
    for (int inst = 0; inst < 10; ++inst) {
      PolicyNet net = PolicyNet::initialized(3, {8, 8}, 6, 100 + inst);
      std::uniform_int_distribution<std::size_t> act(0, 5);
      Trajectory traj;
      for (int j = 0; j < 8; ++j) traj.push_back({Eigen::Vector3d(g(rng), g(rng), g(rng)), act(rng), g(rng)});
      const Eigen::VectorXd analytic = reinforce_gradient(net, traj, 0.95);
      Eigen::VectorXd numeric(analytic.size());
      for (Eigen::Index i = 0; i < analytic.size(); ++i) {
        PolicyNet plus = net, minus = net;
        plus.parameters()(i) += 1e-5;
        minus.parameters()(i) -= 1e-5;
        numeric(i) = (surrogate(plus, traj, 0.95) - surrogate(minus, traj, 0.95)) / 2e-5;
      }
      worst = std::max(worst, (analytic - numeric).norm() / numeric.norm());
    }
    return Outcome{worst <= 1e-4, "worst relative error " + fmt(worst) + " over 10 instances (bound 1e-4)"};
  });

  // Criteria 4 and 5 share the default pre-training run.
  report(4, 120, [&] {
    pre = cmd_pretrain(config, quiet);
    const StateVector target = gate_target_state(GateKind::X, config.environment.transmon.levels);
    DragCalibration sweep = config.drag;
    sweep.gamma_min = sweep.gamma_max = 0.0;
    const DragCalibrationResult gauss = calibrate_drag(config.environment.transmon, target, sweep);
    const bool pass = pre.drag.fidelity >= 0.999 && pre.drag.leakage <= 1e-3 && gauss.leakage >= 2 * pre.drag.leakage;
    return Outcome{pass, "DRAG F=" + fmt(pre.drag.fidelity) + " L=" + fmt(pre.drag.leakage) +
                             "; Gaussian F=" + fmt(gauss.fidelity) + " L=" + fmt(gauss.leakage)};
  });

  report(3, 60, [&] {
    const TransmonParams& p = config.environment.transmon;
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> ux(0.0, 0.2), uy(-0.1, 0.1);
    double worst = 0.0;
    for (int n = 0; n < 200; ++n) {
      PwcWaveform w;
      for (int k = 0; k < 20; ++k) w.segments.push_back({ux(rng), uy(rng)});
      worst = std::max(worst, unitarity_error(evolve(w, p)));
    }
    const PwcWaveform drag = sample_drag(pre.drag.params, config.drag.samples, p.omega_d);
    worst = std::max(worst, unitarity_error(evolve(drag, p)));
    const StateVector target = gate_target_state(GateKind::X, p.levels);
    const Matrix lab = lab_frame_evolve(drag, p, 128);
    worst = std::max(worst, unitarity_error(lab));
    const double gap = std::abs(fidelity(lab, target) - fidelity(evolve(drag, p), target));
    return Outcome{worst < 1e-10 && gap < 1e-3,
                   "max |U^dag U - I| = " + fmt(worst) + ", rotating vs lab fidelity gap " + fmt(gap)};
  });

  report(5, 120, [&] {
    return Outcome{pre.rollout_matches, pre.rollout_matches ? "greedy rollout equals the 20 discretized DRAG segments"
                                                            : "greedy rollout differs from discretized DRAG"};
  });

  report(6, 600, [&] {
    const TrainState s = cmd_train(config, {}, quiet);
    const GateReport& r20 = s.best.at(20);
    const GateReport& r10 = s.best.at(10);
    const bool f20 = r20.fidelity >= pre.drag.fidelity - 0.002;
    const bool l20 = r20.leakage <= 2 * pre.drag.leakage;
    const bool f10 = r10.fidelity >= 0.99;
    return Outcome{f20 && l20 && f10, "RL20 F=" + fmt(r20.fidelity) + (f20 ? " ok" : " low") +
                                          " L=" + fmt(r20.leakage) + (l20 ? " ok" : " high") +
                                          "; RL10 F=" + fmt(r10.fidelity) + (f10 ? " ok" : " low") +
                                          "; DRAG F=" + fmt(pre.drag.fidelity) + " L=" + fmt(pre.drag.leakage)};
  });

  report(7, 10, [] {
    const ReadoutTarget t{{0.0, 0.0}, 1.0};
    const ReadoutTarget t2{{4.0, 0.0}, 1.0};
    auto x = [](double d, int k) { return AgentStateX{d, 0.0, k}; };
    const bool ok[9] = {
        reward_x(x(0.5, 0), t, 0.005, 0) == 1.0,
        reward_x(x(2.0, 0), t, 0.0, 0) == 0.5,
        std::abs(reward_x(x(2.0, 10), t, 0.01, 10) - 0.4) < 1e-15,
        reward_y({0.1, 0.02}, 0.02) == 0.0,
        reward_y({0.1, 0.0}, 0.02) == 0.02,
        std::abs(reward_y({0.1, 0.002}, 0.01) - 0.008) < 1e-15,
        reward_x_2q({0.5, 0.0, 4.5, 0.0, 0}, t, t2, 0.0, 0) == 1.0,
        reward_x_2q({0.5, 0.0, 6.0, 0.0, 0}, t, t2, 0.0, 0) == 0.75,
        reward_x_2q({0.5, 0.0, 0.0, 2.0, 3}, t, t, 0.01, 3) == reward_x_2q({0.0, 2.0, 0.5, 0.0, 3}, t, t, 0.01, 3),
    };
    int passed = 0;
    for (bool b : ok) passed += b;
    return Outcome{passed == 9, std::to_string(passed) + "/9 substitution examples exact"};
  });

  report(8, 30, [] {
    const IqClusterModel model = IqClusterModel::regular(3);
    std::vector<IqBatch> labelled;
    for (std::size_t m = 0; m < 3; ++m) {
      std::vector<double> pops(3, 0.0);
      pops[m] = 1.0;
      labelled.push_back(sample_readout(pops, model, 10000, 800 + m));
    }
    const Discriminator disc = fit_discriminator(labelled);
    double worst = 0.0;
    for (double leak : {0.0, 0.02, 0.05, 0.1})
      for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const std::vector<double> pops{0.5 * (1 - leak), 0.5 * (1 - leak), leak};
        const auto est = estimate_populations(sample_readout(pops, model, 10000, 1000 + seed), disc);
        worst = std::max(worst, std::abs(est[2] - leak));
      }
    return Outcome{worst <= 0.01, "worst |L_est - L| = " + fmt(worst) + " over 80 batches (bound 0.01)"};
  });

  report(9, 120, [&] {
    std::string diff;
    const fs::path rerun = fresh_dir("rerun");
    RunConfig again = default_run(rerun);
    cmd_pretrain(again, quiet);
    std::vector<fs::path> runs;
    for (const char* name : {"smoke_a", "smoke_b"}) {
      const fs::path d = fresh_dir(name);
      fs::create_directories(d / "X");
      for (const char* f : {"pretrain_x.json", "pretrain_y.json"}) fs::copy_file(rerun / "X" / f, d / "X" / f);
      RunConfig smoke = default_run(d);
      smoke.designer.n_iter = 5;
      smoke.checkpoint_every = 1;
      cmd_train(smoke, {}, quiet);
      runs.push_back(d);
    }
    for (const char* f : {"pretrain_x.json", "pretrain_y.json", "drag.json", "drag_pwc.json", "pretrain_mse.csv"})
      if (read_text_file(main_dir / "X" / f) != read_text_file(rerun / "X" / f))
        return Outcome{false, std::string("pretrain rerun: ") + f + " differs"};
    const bool same = same_tree(runs[0], runs[1], &diff);
    return Outcome{same, same ? "pretrain artifacts and 5-iteration train logs and checkpoints byte-identical"
                              : "train smoke rerun: " + diff};
  });

  for (const auto& [n, line] : lines) std::cout << line << "\n";
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << "\n";
  return failures == 0 ? 0 : 1;
}
