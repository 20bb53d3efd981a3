#include "rlgate/config.hpp"

#include <string>

namespace rlgate {

namespace {

SigmaMode sigma_mode_from(const std::string& s) {
  if (s == "shot_spread") return SigmaMode::ShotSpread;
  if (s == "mean_standard_error") return SigmaMode::MeanStandardError;
  throw ConfigError("environment.sigma_mode must be shot_spread or mean_standard_error");
}

LeakageMode leakage_mode_from(const std::string& s) {
  if (s == "second_level") return LeakageMode::SecondLevelOnly;
  if (s == "all_noncomputational") return LeakageMode::AllNonComputational;
  throw ConfigError("environment.leakage_mode must be second_level or all_noncomputational");
}

}  // namespace

Json default_config_json() {
  const TransmonParams tp;
  const EnvironmentSettings env;
  const DesignerConfig d;
  const DragCalibration drag;
  const IqClusterModel clusters = IqClusterModel::regular(3);
  return {
      {"gate", "X"},
      {"seed", d.seed},
      {"output_dir", "out"},
      {"environment",
       {{"omega_q_ghz", tp.omega_q / kTwoPi},
        {"alpha_ghz", tp.alpha / kTwoPi},
        {"levels", tp.levels},
        {"drive_scale", tp.drive_scale},
        {"omega_d_ghz", tp.omega_d / kTwoPi},
        {"tau_ns", env.tau},
        {"calibration_shots", env.calibration_shots},
        {"sigma_mode", "mean_standard_error"},
        {"leakage_mode", "second_level"},
        {"cluster_model", ""},
        {"cluster_sigma", std::sqrt(clusters.covariances[0](0, 0))},
        {"cluster_separation", IqClusterModel::kDefaultSeparation},
        {"seed", env.seed}}},
      {"designer",
       {{"n_seg_max", d.n_seg_max},
        {"n_ep", d.n_ep},
        {"n_iter", d.n_iter},
        {"n_shot", d.n_shot},
        {"lambda", d.lambda},
        {"leak_max", d.leak_max},
        {"beta", d.beta},
        {"hidden", d.hidden},
        {"optimizer_x", optimizer_settings_to_json(d.optimizer_x)},
        {"optimizer_y", optimizer_settings_to_json(d.optimizer_y)},
        {"pretrain",
         {{"passes", d.pretrain_passes},
          {"epochs", d.pretrain_epochs},
          {"width", d.pretrain_width},
          {"optimizer", optimizer_settings_to_json(d.pretrain_optimizer)}}}}},
      {"drag",
       {{"samples", drag.samples},
        {"sigma_fraction", drag.sigma_fraction},
        {"amplitude_max", drag.amplitude_max},
        {"amplitude_step", drag.amplitude_step},
        {"gamma_min", drag.gamma_min},
        {"gamma_max", drag.gamma_max},
        {"gamma_step", drag.gamma_step}}},
      {"train", {{"checkpoint_every", 10}, {"record_wall_time", false}}},
      {"bench", {{"shots", 10000}, {"gaussian_baseline", false}}},
  };
}

void merge_config(Json& base, const Json& patch, const std::string& path) {
  if (!patch.is_object()) throw ConfigError("config" + (path.empty() ? "" : " key " + path) + " must be an object");
  for (const auto& [key, value] : patch.items()) {
    const std::string full = path.empty() ? key : path + "." + key;
    if (!base.contains(key)) throw ConfigError("unknown config key " + full);
    Json& target = base[key];
    if (target.is_object())
      merge_config(target, value, full);
    else
      target = value;
  }
}

void apply_override(Json& config, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos || eq == 0) throw ConfigError("--set expects key=value, got " + std::string(assignment));
  const std::string key(assignment.substr(0, eq));
  const std::string text(assignment.substr(eq + 1));
  Json value = Json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;

  Json patch = value;
  std::string rest = key;
  std::vector<std::string> parts;
  for (std::size_t pos; (pos = rest.find('.')) != std::string::npos; rest = rest.substr(pos + 1))
    parts.push_back(rest.substr(0, pos));
  parts.push_back(rest);
  for (auto it = parts.rbegin(); it != parts.rend(); ++it) patch = Json{{*it, patch}};
  merge_config(config, patch);
}

RunConfig config_from_json(const Json& j, const std::filesystem::path& base_dir) {
  RunConfig c;
  try {
    const Json& e = j.at("environment");
    TransmonParams& tp = c.environment.transmon;
    tp.omega_q = kTwoPi * e.at("omega_q_ghz").get<double>();
    tp.alpha = kTwoPi * e.at("alpha_ghz").get<double>();
    tp.levels = e.at("levels").get<int>();
    tp.drive_scale = e.at("drive_scale").get<double>();
    tp.omega_d = kTwoPi * e.at("omega_d_ghz").get<double>();
    tp.validate();
    c.environment.tau = e.at("tau_ns").get<double>();
    c.environment.calibration_shots = e.at("calibration_shots").get<std::size_t>();
    c.environment.sigma_mode = sigma_mode_from(e.at("sigma_mode").get<std::string>());
    c.environment.leakage_mode = leakage_mode_from(e.at("leakage_mode").get<std::string>());
    c.environment.seed = e.at("seed").get<std::uint64_t>();
    c.environment.gate = parse_gate(j.at("gate").get<std::string>());

    const std::string cluster_path = e.at("cluster_model").get<std::string>();
    if (!cluster_path.empty()) {
      std::filesystem::path p(cluster_path);
      if (p.is_relative()) p = base_dir / p;
      c.environment.clusters = cluster_model_from_json(read_json_file(p));
    } else {
      c.environment.clusters =
          IqClusterModel::regular(tp.levels, e.at("cluster_sigma").get<double>(), e.at("cluster_separation").get<double>());
    }

    const Json& d = j.at("designer");
    DesignerConfig& dc = c.designer;
    dc.n_seg_max = d.at("n_seg_max").get<int>();
    dc.n_ep = d.at("n_ep").get<int>();
    dc.n_iter = d.at("n_iter").get<int>();
    dc.n_shot = d.at("n_shot").get<std::size_t>();
    dc.lambda = d.at("lambda").get<double>();
    dc.leak_max = d.at("leak_max").get<double>();
    dc.beta = d.at("beta").get<double>();
    dc.hidden = d.at("hidden").get<std::vector<int>>();
    dc.optimizer_x = optimizer_settings_from_json(d.at("optimizer_x"));
    dc.optimizer_y = optimizer_settings_from_json(d.at("optimizer_y"));
    const Json& pre = d.at("pretrain");
    dc.pretrain_passes = pre.at("passes").get<int>();
    dc.pretrain_epochs = pre.at("epochs").get<int>();
    dc.pretrain_width = pre.at("width").get<double>();
    dc.pretrain_optimizer = optimizer_settings_from_json(pre.at("optimizer"));
    dc.seed = j.at("seed").get<std::uint64_t>();
    dc.validate();
    c.environment.n_shot = dc.n_shot;

    const Json& g = j.at("drag");
    c.drag.samples = g.at("samples").get<int>();
    c.drag.sigma_fraction = g.at("sigma_fraction").get<double>();
    c.drag.amplitude_max = g.at("amplitude_max").get<double>();
    c.drag.amplitude_step = g.at("amplitude_step").get<double>();
    c.drag.gamma_min = g.at("gamma_min").get<double>();
    c.drag.gamma_max = g.at("gamma_max").get<double>();
    c.drag.gamma_step = g.at("gamma_step").get<double>();
    c.drag.t_g = c.environment.tau * dc.n_seg_max;
    if (c.drag.samples < 1 || !(c.drag.amplitude_step > 0.0) || !(c.drag.gamma_step > 0.0) ||
        c.drag.gamma_max < c.drag.gamma_min)
      throw ConfigError("invalid drag calibration sweep");

    c.output_dir = j.at("output_dir").get<std::string>();
    c.checkpoint_every = j.at("train").at("checkpoint_every").get<int>();
    if (c.checkpoint_every < 1) throw ConfigError("train.checkpoint_every must be >= 1");
    c.record_wall_time = j.at("train").at("record_wall_time").get<bool>();
    c.bench_shots = j.at("bench").at("shots").get<std::size_t>();
    c.gaussian_baseline = j.at("bench").at("gaussian_baseline").get<bool>();
  } catch (const Json::exception& ex) {
    throw ConfigError(std::string("config: ") + ex.what());
  } catch (const SchemaError& ex) {
    throw ConfigError(ex.what());
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& ex) {
    throw ConfigError(ex.what());
  }
  return c;
}

}  // namespace rlgate
