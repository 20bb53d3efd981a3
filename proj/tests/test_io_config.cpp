#include <doctest.h>

#include <filesystem>
#include <sstream>

#include "rlgate/config.hpp"
#include "rlgate/io.hpp"

using namespace rlgate;

namespace {

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("rlgate_io_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("waveform JSON round trip") {
  PwcWaveform w;
  w.segments = {{0.15, -0.01}, {0.0, 0.1}};
  CHECK(waveform_from_json(waveform_to_json(w)) == w);
  CHECK_THROWS_AS(waveform_from_json(Json{{"tau_ns", 1.0}}), SchemaError);
}

TEST_CASE("policy JSON round trip keeps every bit") {
  PolicyNet net = PolicyNet::initialized(3, {7, 4}, 21, 9);
  net.normalizer.offset = Eigen::Vector3d(0.1, 0.2, 0.3);
  net.normalizer.scale = Eigen::Vector3d(1.5, 2.5, 20.0);
  net.action_values = ActionGrid::quadrature_x().values();
  const Json j = policy_to_json(net);
  CHECK(j.at("schema") == kPolicySchema);
  CHECK(policy_from_json(Json::parse(j.dump())) == net);
  Json wrong = j;
  wrong["schema"] = "other/1";
  CHECK_THROWS_AS(policy_from_json(wrong), SchemaError);
}

TEST_CASE("train state JSON round trip") {
  TrainState s;
  s.iteration = 7;
  s.k = 13;
  s.waveform.segments.assign(13, {0.02, -0.03});
  s.state_x = {0.25, -1.5, 13};
  s.leak = 0.004;
  s.optimizer_x = Optimizer({OptimizerKind::Adam, 1e-2});
  Eigen::VectorXd p = Eigen::VectorXd::Ones(4);
  s.optimizer_x.step(p, Eigen::Vector4d(1, 2, 3, 4));
  GateReport r;
  r.waveform.segments.assign(10, {0.1, 0.0});
  r.fidelity = 0.997;
  r.n_segments = 10;
  s.best[10] = r;
  const TrainState back = train_state_from_json(Json::parse(train_state_to_json(s).dump()));
  CHECK(back.iteration == 7);
  CHECK(back.k == 13);
  CHECK(back.waveform == s.waveform);
  CHECK(back.state_x.q_mean == -1.5);
  CHECK(back.optimizer_x.first_moment() == s.optimizer_x.first_moment());
  CHECK(back.optimizer_x.second_moment() == s.optimizer_x.second_moment());
  CHECK(back.optimizer_x.steps() == 1);
  CHECK(back.best.at(10).fidelity == 0.997);
}

TEST_CASE("cluster model and DRAG JSON round trip") {
  const IqClusterModel m = IqClusterModel::regular(3);
  const IqClusterModel back = cluster_model_from_json(cluster_model_to_json(m));
  CHECK(back.centers == m.centers);
  CHECK(back.covariances[2] == m.covariances[2]);
  const DragCalibrationResult d{{0.151, 8.9, 0.24, 35.6}, 0.99998, 2e-7};
  const DragCalibrationResult db = drag_from_json(drag_to_json(d));
  CHECK(db.params.gamma == 0.24);
  CHECK(db.fidelity == d.fidelity);
}

TEST_CASE("train log lines") {
  const TrainLogRecord r{3, 0.5, 0.01, 0.99, 1e-4, 0.0};
  const std::string line = train_log_line(r);
  CHECK(line.find('\n') == std::string::npos);
  const TrainLogRecord back = train_log_from_json(Json::parse(line));
  CHECK(back.iter == 3);
  CHECK(back.probe_fidelity == 0.99);
  CHECK(Json::parse(line).contains("wall_ms"));
}

TEST_CASE("labelled batch CSV round trip") {
  std::vector<IqBatch> b(2);
  b[0].samples = {{0.5, 1.25}, {-3.0, 2.0}};
  b[1].samples = {{6.0, 0.0}};
  const std::string csv = labelled_batches_csv(b);
  CHECK(csv.rfind("label,i,q\n", 0) == 0);
  const auto back = labelled_batches_from_csv(csv);
  REQUIRE(back.size() == 2);
  CHECK(back[0].samples == b[0].samples);
  CHECK(back[1].samples == b[1].samples);
  CHECK_THROWS_AS(labelled_batches_from_csv("label,i,q\nx,1,2\n"), SchemaError);
}

TEST_CASE("waveform CSV and SVG use generator ticks") {
  PwcWaveform w;
  w.segments = {{0.1, 0.0}, {0.2, -0.1}};
  const std::string csv = waveform_csv(w);
  std::istringstream in(csv);
  std::string line;
  int rows = -1;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 2 * 8);
  const std::string svg = waveform_svg(w, "X RL10");
  CHECK(svg.find("<svg") != std::string::npos);
  CHECK(svg.find("dt = 0.222222") != std::string::npos);
}

TEST_CASE("benchmark CSV columns") {
  BenchmarkRow r;
  r.variant = "DRAG";
  r.report.n_segments = 20;
  r.report.gate_time_ns = 35.6;
  const std::string csv = benchmark_csv({r, r});
  CHECK(csv.rfind("gate,variant,n_seg,t_g_ns,fidelity_exact,fidelity_est,leakage_exact,leakage_est\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
}

TEST_CASE("file helpers") {
  const auto dir = scratch("files");
  write_text_file(dir / "a" / "b.json", "{\"x\": 1}");
  CHECK(read_json_file(dir / "a" / "b.json").at("x") == 1);
  CHECK_FALSE(std::filesystem::exists(dir / "a" / "b.json.tmp"));
  CHECK_THROWS_AS(read_text_file(dir / "missing.json"), MissingArtifact);
  write_text_file(dir / "bad.json", "{not json");
  CHECK_THROWS_AS(read_json_file(dir / "bad.json"), SchemaError);
}

TEST_CASE("default config builds the default run") {
  const RunConfig c = config_from_json(default_config_json());
  CHECK(c.designer.n_iter == 200);
  CHECK(c.designer.n_shot == 512);
  CHECK(c.environment.n_shot == 512);
  CHECK(c.environment.tau == doctest::Approx(1.78));
  CHECK(c.drag.t_g == doctest::Approx(35.6));
  CHECK(c.environment.transmon.omega_q == doctest::Approx(kTwoPi * 5.0));
  CHECK(c.environment.gate == GateKind::X);
}

TEST_CASE("config overrides and errors") {
  Json j = default_config_json();
  apply_override(j, "designer.n_iter=5");
  apply_override(j, "gate=SX");
  apply_override(j, "environment.sigma_mode=shot_spread");
  const RunConfig c = config_from_json(j);
  CHECK(c.designer.n_iter == 5);
  CHECK(c.environment.gate == GateKind::SX);
  CHECK(c.environment.sigma_mode == SigmaMode::ShotSpread);

  Json bad = default_config_json();
  CHECK_THROWS_AS(apply_override(bad, "designer.n_iterations=5"), ConfigError);
  CHECK_THROWS_AS(apply_override(bad, "no_equals_sign"), ConfigError);
  CHECK_THROWS_AS(merge_config(bad, Json{{"designer", {{"typo", 1}}}}), ConfigError);

  Json neg = default_config_json();
  apply_override(neg, "designer.n_ep=7");
  CHECK_THROWS_AS(config_from_json(neg), ConfigError);
  Json gate = default_config_json();
  apply_override(gate, "gate=CZ");
  CHECK_THROWS_AS(config_from_json(gate), ConfigError);
  Json file = default_config_json();
  apply_override(file, "environment.cluster_model=nowhere.json");
  CHECK_THROWS_AS(config_from_json(file, scratch("cfg")), MissingArtifact);
}

TEST_CASE("cluster model loaded from file") {
  const auto dir = scratch("clusters");
  IqClusterModel m = IqClusterModel::regular(3, 0.5, 8.0);
  write_text_file(dir / "clusters.json", cluster_model_to_json(m).dump());
  Json j = default_config_json();
  apply_override(j, "environment.cluster_model=clusters.json");
  const RunConfig c = config_from_json(j, dir);
  CHECK(c.environment.clusters.centers == m.centers);
}
