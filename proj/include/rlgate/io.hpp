#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "rlgate/designer.hpp"
#include "rlgate/pulse.hpp"
#include "rlgate/readout.hpp"

namespace rlgate {

using Json = nlohmann::json;

// Thrown when a required input file does not exist.
class MissingArtifact : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Thrown when a file exists but does not match its schema.
class SchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

constexpr double kSampleDt = 0.222222;  // ns, waveform generator resolution

constexpr const char* kPolicySchema = "rlgate.policy/1";
constexpr const char* kTrainStateSchema = "rlgate.train_state/1";
constexpr const char* kDragSchema = "rlgate.drag/1";

// {"tau_ns", "omega_d_ghz", "segments": [[ux, uy], ...]}
Json waveform_to_json(const PwcWaveform& w);
PwcWaveform waveform_from_json(const Json& j);

// {"centers": [[i, q], ...], "covariances": [[[a, b], [b, c]], ...]}
Json cluster_model_to_json(const IqClusterModel& m);
IqClusterModel cluster_model_from_json(const Json& j);

Json policy_to_json(const PolicyNet& net);
PolicyNet policy_from_json(const Json& j);

Json optimizer_to_json(const Optimizer& opt);
Optimizer optimizer_from_json(const Json& j);
Json optimizer_settings_to_json(const Optimizer::Settings& s);
Optimizer::Settings optimizer_settings_from_json(const Json& j);

Json gate_report_to_json(const GateReport& r);
GateReport gate_report_from_json(const Json& j);

Json train_state_to_json(const TrainState& s);
TrainState train_state_from_json(const Json& j);

Json drag_to_json(const DragCalibrationResult& r);
DragCalibrationResult drag_from_json(const Json& j);

// One compact JSON object per line.
std::string train_log_line(const TrainLogRecord& r);
TrainLogRecord train_log_from_json(const Json& j);

// Labelled shots: "label,i,q" with a header row.
std::string labelled_batches_csv(const std::vector<IqBatch>& batches);
std::vector<IqBatch> labelled_batches_from_csv(const std::string& text);

// One row per generator tick: tick, t_ns, ux, uy. Each segment spans
// round(tau / kSampleDt) ticks.
std::string waveform_csv(const PwcWaveform& w);

// gate, variant, n_seg, t_g_ns, fidelity_exact, fidelity_est, leakage_exact, leakage_est
std::string benchmark_csv(const std::vector<BenchmarkRow>& rows);

// Step plot of both quadratures against time in units of kSampleDt.
std::string waveform_svg(const PwcWaveform& w, const std::string& title);

Json read_json_file(const std::filesystem::path& path);
// Writes text atomically (temporary file then rename); creates parent directories.
void write_text_file(const std::filesystem::path& path, const std::string& text);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace rlgate
