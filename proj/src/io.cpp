#include "rlgate/io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace rlgate {

namespace {

void require_schema(const Json& j, const char* schema) {
  if (!j.is_object() || j.value("schema", std::string()) != schema)
    throw SchemaError(std::string("expected schema ") + schema);
}

Json vector_to_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Eigen::VectorXd vector_from_json(const Json& j) {
  const auto values = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

std::string kind_name(OptimizerKind k) { return k == OptimizerKind::Adam ? "adam" : "sgd_momentum"; }

OptimizerKind kind_from_name(const std::string& s) {
  if (s == "adam") return OptimizerKind::Adam;
  if (s == "sgd_momentum") return OptimizerKind::SgdMomentum;
  throw SchemaError("unknown optimizer kind '" + s + "'");
}

std::string format_double(double v) {
  std::ostringstream out;
  out << std::setprecision(10) << v;
  return out.str();
}

}  // namespace

Json waveform_to_json(const PwcWaveform& w) {
  Json segs = Json::array();
  for (const Segment& s : w.segments) segs.push_back({s.ux, s.uy});
  return {{"tau_ns", w.tau}, {"omega_d_ghz", w.omega_d / kTwoPi}, {"segments", segs}};
}

PwcWaveform waveform_from_json(const Json& j) {
  try {
    PwcWaveform w;
    w.tau = j.at("tau_ns").get<double>();
    w.omega_d = kTwoPi * j.at("omega_d_ghz").get<double>();
    for (const Json& s : j.at("segments")) {
      if (!s.is_array() || s.size() != 2) throw SchemaError("waveform: segments must be [ux, uy] pairs");
      w.segments.push_back({s[0].get<double>(), s[1].get<double>()});
    }
    if (!(w.tau > 0.0)) throw SchemaError("waveform: tau_ns must be > 0");
    return w;
  } catch (const Json::exception& e) {
    throw SchemaError(std::string("waveform: ") + e.what());
  }
}

Json cluster_model_to_json(const IqClusterModel& m) {
  Json centers = Json::array(), covs = Json::array();
  for (const IqPoint& c : m.centers) centers.push_back({c.i, c.q});
  for (const Eigen::Matrix2d& s : m.covariances) covs.push_back({{s(0, 0), s(0, 1)}, {s(1, 0), s(1, 1)}});
  return {{"centers", centers}, {"covariances", covs}};
}

IqClusterModel cluster_model_from_json(const Json& j) {
  try {
    IqClusterModel m;
    for (const Json& c : j.at("centers")) m.centers.push_back({c.at(0).get<double>(), c.at(1).get<double>()});
    for (const Json& s : j.at("covariances")) {
      Eigen::Matrix2d cov;
      cov << s.at(0).at(0).get<double>(), s.at(0).at(1).get<double>(), s.at(1).at(0).get<double>(),
          s.at(1).at(1).get<double>();
      m.covariances.push_back(cov);
    }
    m.validate();
    return m;
  } catch (const Json::exception& e) {
    throw SchemaError(std::string("cluster model: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw SchemaError(e.what());
  }
}

Json policy_to_json(const PolicyNet& net) {
  return {{"schema", kPolicySchema},
          {"input_dim", net.input_dim()},
          {"hidden", net.hidden()},
          {"action_count", net.action_count()},
          {"action_values", net.action_values},
          {"normalizer", {{"offset", vector_to_json(net.normalizer.offset)}, {"scale", vector_to_json(net.normalizer.scale)}}},
          {"parameters", vector_to_json(net.parameters())}};
}

PolicyNet policy_from_json(const Json& j) {
  require_schema(j, kPolicySchema);
  try {
    PolicyNet net(j.at("input_dim").get<int>(), j.at("hidden").get<std::vector<int>>(), j.at("action_count").get<int>());
    const Eigen::VectorXd params = vector_from_json(j.at("parameters"));
    if (params.size() != net.parameters().size()) throw SchemaError("policy: parameter count mismatch");
    net.parameters() = params;
    net.action_values = j.at("action_values").get<std::vector<double>>();
    net.normalizer.offset = vector_from_json(j.at("normalizer").at("offset"));
    net.normalizer.scale = vector_from_json(j.at("normalizer").at("scale"));
    if (net.normalizer.offset.size() != net.input_dim() || net.normalizer.scale.size() != net.input_dim())
      throw SchemaError("policy: normalizer dimension mismatch");
    return net;
  } catch (const Json::exception& e) {
    throw SchemaError(std::string("policy: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw SchemaError(e.what());
  }
}

Json optimizer_settings_to_json(const Optimizer::Settings& s) {
  return {{"kind", kind_name(s.kind)}, {"learning_rate", s.learning_rate}, {"momentum", s.momentum},
          {"beta1", s.beta1},          {"beta2", s.beta2},                 {"epsilon", s.epsilon}};
}

Optimizer::Settings optimizer_settings_from_json(const Json& j) {
  Optimizer::Settings s;
  s.kind = kind_from_name(j.value("kind", kind_name(s.kind)));
  s.learning_rate = j.value("learning_rate", s.learning_rate);
  s.momentum = j.value("momentum", s.momentum);
  s.beta1 = j.value("beta1", s.beta1);
  s.beta2 = j.value("beta2", s.beta2);
  s.epsilon = j.value("epsilon", s.epsilon);
  return s;
}

Json optimizer_to_json(const Optimizer& opt) {
  return {{"settings", optimizer_settings_to_json(opt.settings())},
          {"first", vector_to_json(opt.first_moment())},
          {"second", vector_to_json(opt.second_moment())},
          {"steps", opt.steps()}};
}

Optimizer optimizer_from_json(const Json& j) {
  Optimizer opt(optimizer_settings_from_json(j.at("settings")));
  opt.restore(vector_from_json(j.at("first")), vector_from_json(j.at("second")), j.at("steps").get<std::uint64_t>());
  return opt;
}

Json gate_report_to_json(const GateReport& r) {
  return {{"waveform", waveform_to_json(r.waveform)}, {"fidelity", r.fidelity},   {"leakage", r.leakage},
          {"fidelity_est", r.fidelity_est},           {"leakage_est", r.leakage_est}, {"n_segments", r.n_segments},
          {"gate_time_ns", r.gate_time_ns}};
}

GateReport gate_report_from_json(const Json& j) {
  GateReport r;
  r.waveform = waveform_from_json(j.at("waveform"));
  r.fidelity = j.at("fidelity").get<double>();
  r.leakage = j.at("leakage").get<double>();
  r.fidelity_est = j.at("fidelity_est").get<double>();
  r.leakage_est = j.at("leakage_est").get<double>();
  r.n_segments = j.at("n_segments").get<int>();
  r.gate_time_ns = j.at("gate_time_ns").get<double>();
  return r;
}

Json train_state_to_json(const TrainState& s) {
  Json best = Json::object();
  for (const auto& [n, r] : s.best) best[std::to_string(n)] = gate_report_to_json(r);
  return {{"schema", kTrainStateSchema},
          {"iteration", s.iteration},
          {"k", s.k},
          {"waveform", waveform_to_json(s.waveform)},
          {"state_x", {s.state_x.i_mean, s.state_x.q_mean, s.state_x.k}},
          {"leak", s.leak},
          {"optimizer_x", optimizer_to_json(s.optimizer_x)},
          {"optimizer_y", optimizer_to_json(s.optimizer_y)},
          {"best", best}};
}

TrainState train_state_from_json(const Json& j) {
  require_schema(j, kTrainStateSchema);
  try {
    TrainState s;
    s.iteration = j.at("iteration").get<int>();
    s.k = j.at("k").get<int>();
    s.waveform = waveform_from_json(j.at("waveform"));
    const Json& sx = j.at("state_x");
    s.state_x = {sx.at(0).get<double>(), sx.at(1).get<double>(), sx.at(2).get<int>()};
    s.leak = j.at("leak").get<double>();
    s.optimizer_x = optimizer_from_json(j.at("optimizer_x"));
    s.optimizer_y = optimizer_from_json(j.at("optimizer_y"));
    for (const auto& [key, value] : j.at("best").items()) s.best[std::stoi(key)] = gate_report_from_json(value);
    return s;
  } catch (const Json::exception& e) {
    throw SchemaError(std::string("train state: ") + e.what());
  }
}

Json drag_to_json(const DragCalibrationResult& r) {
  return {{"schema", kDragSchema},       {"amplitude", r.params.amplitude}, {"sigma_ns", r.params.sigma},
          {"gamma_ns", r.params.gamma},  {"t_g_ns", r.params.t_g},          {"fidelity", r.fidelity},
          {"leakage", r.leakage}};
}

DragCalibrationResult drag_from_json(const Json& j) {
  require_schema(j, kDragSchema);
  try {
    DragCalibrationResult r;
    r.params = {j.at("amplitude").get<double>(), j.at("sigma_ns").get<double>(), j.at("gamma_ns").get<double>(),
                j.at("t_g_ns").get<double>()};
    r.fidelity = j.at("fidelity").get<double>();
    r.leakage = j.at("leakage").get<double>();
    return r;
  } catch (const Json::exception& e) {
    throw SchemaError(std::string("drag: ") + e.what());
  }
}

std::string train_log_line(const TrainLogRecord& r) {
  const Json j = {{"iter", r.iter},
                  {"mean_reward_x", r.mean_reward_x},
                  {"mean_reward_y", r.mean_reward_y},
                  {"probe_fidelity", r.probe_fidelity},
                  {"probe_leakage", r.probe_leakage},
                  {"wall_ms", r.wall_ms}};
  return j.dump();
}

TrainLogRecord train_log_from_json(const Json& j) {
  TrainLogRecord r;
  r.iter = j.at("iter").get<int>();
  r.mean_reward_x = j.at("mean_reward_x").get<double>();
  r.mean_reward_y = j.at("mean_reward_y").get<double>();
  r.probe_fidelity = j.at("probe_fidelity").get<double>();
  r.probe_leakage = j.at("probe_leakage").get<double>();
  r.wall_ms = j.at("wall_ms").get<double>();
  return r;
}

std::string labelled_batches_csv(const std::vector<IqBatch>& batches) {
  std::ostringstream out;
  out << std::setprecision(17) << "label,i,q\n";
  for (std::size_t m = 0; m < batches.size(); ++m)
    for (const IqPoint& p : batches[m].samples) out << m << ',' << p.i << ',' << p.q << '\n';
  return out.str();
}

std::vector<IqBatch> labelled_batches_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "label,i,q") throw SchemaError("labelled CSV: missing header");
  std::vector<IqBatch> batches;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string label, i, q;
    if (!std::getline(row, label, ',') || !std::getline(row, i, ',') || !std::getline(row, q))
      throw SchemaError("labelled CSV: malformed row '" + line + "'");
    std::size_t m = 0;
    IqPoint p;
    try {
      m = std::stoul(label);
      p = {std::stod(i), std::stod(q)};
    } catch (const std::exception&) {
      throw SchemaError("labelled CSV: malformed row '" + line + "'");
    }
    if (batches.size() <= m) batches.resize(m + 1);
    batches[m].samples.push_back(p);
  }
  return batches;
}

std::string waveform_csv(const PwcWaveform& w) {
  std::ostringstream out;
  out << "tick,t_ns,ux,uy\n";
  const long per_segment = std::max(1L, std::lround(w.tau / kSampleDt));
  long tick = 0;
  for (const Segment& s : w.segments) {
    for (long t = 0; t < per_segment; ++t, ++tick)
      out << tick << ',' << format_double(tick * w.tau / per_segment) << ',' << format_double(s.ux) << ','
          << format_double(s.uy) << '\n';
  }
  return out.str();
}

std::string benchmark_csv(const std::vector<BenchmarkRow>& rows) {
  std::ostringstream out;
  out << "gate,variant,n_seg,t_g_ns,fidelity_exact,fidelity_est,leakage_exact,leakage_est\n";
  for (const BenchmarkRow& r : rows) {
    out << gate_name(r.gate) << ',' << r.variant << ',' << r.report.n_segments << ','
        << format_double(r.report.gate_time_ns) << ',' << format_double(r.report.fidelity) << ','
        << format_double(r.report.fidelity_est) << ',' << format_double(r.report.leakage) << ','
        << format_double(r.report.leakage_est) << '\n';
  }
  return out.str();
}

std::string waveform_svg(const PwcWaveform& w, const std::string& title) {
  constexpr double width = 720, height = 360, left = 70, right = 20, top = 40, bottom = 50;
  const double t_end = std::max(w.duration() / kSampleDt, 1.0);
  double amp = 0.05;
  for (const Segment& s : w.segments) amp = std::max({amp, std::abs(s.ux), std::abs(s.uy)});
  amp = std::ceil(amp * 20.0) / 20.0;
  const double pw = width - left - right, ph = height - top - bottom;
  auto x_of = [&](double ticks) { return left + pw * ticks / t_end; };
  auto y_of = [&](double a) { return top + ph * (0.5 - 0.5 * a / amp); };

  std::ostringstream out;
  out << std::setprecision(6);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << width / 2 << "\" y=\"20\" text-anchor=\"middle\">" << title << "</text>\n";
  out << "<line x1=\"" << left << "\" y1=\"" << y_of(0) << "\" x2=\"" << left + pw << "\" y2=\"" << y_of(0)
      << "\" stroke=\"#999\"/>\n";
  out << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
      << "\" fill=\"none\" stroke=\"black\"/>\n";
  const double step = t_end > 100 ? 20.0 : 8.0;
  for (double t = 0; t <= t_end + 1e-9; t += step) {
    out << "<line x1=\"" << x_of(t) << "\" y1=\"" << top + ph << "\" x2=\"" << x_of(t) << "\" y2=\"" << top + ph + 5
        << "\" stroke=\"black\"/>";
    out << "<text x=\"" << x_of(t) << "\" y=\"" << top + ph + 18 << "\" text-anchor=\"middle\">" << t << "</text>\n";
  }
  for (double a : {-amp, 0.0, amp})
    out << "<text x=\"" << left - 6 << "\" y=\"" << y_of(a) + 4 << "\" text-anchor=\"end\">" << a << "</text>\n";
  out << "<text x=\"" << left + pw / 2 << "\" y=\"" << height - 10 << "\" text-anchor=\"middle\">time (dt = "
      << kSampleDt << " ns)</text>\n";
  out << "<text x=\"16\" y=\"" << top + ph / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " << top + ph / 2
      << ")\">amplitude</text>\n";

  auto polyline = [&](bool quad_y, const char* colour) {
    out << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"1.5\" points=\"";
    const double seg_ticks = w.tau / kSampleDt;
    for (std::size_t k = 0; k < w.segments.size(); ++k) {
      const double a = quad_y ? w.segments[k].uy : w.segments[k].ux;
      out << x_of(k * seg_ticks) << ',' << y_of(a) << ' ' << x_of((k + 1) * seg_ticks) << ',' << y_of(a) << ' ';
    }
    out << "\"/>\n";
  };
  polyline(false, "#1f77b4");
  polyline(true, "#d62728");
  out << "<text x=\"" << left + 10 << "\" y=\"" << top + 16 << "\" fill=\"#1f77b4\">x quadrature</text>\n";
  out << "<text x=\"" << left + 110 << "\" y=\"" << top + 16 << "\" fill=\"#d62728\">y quadrature</text>\n";
  out << "</svg>\n";
  return out.str();
}

Json read_json_file(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  try {
    return Json::parse(text);
  } catch (const Json::exception& e) {
    throw SchemaError(path.string() + ": " + e.what());
  }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << text;
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingArtifact("missing file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace rlgate
