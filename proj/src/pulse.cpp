#include "rlgate/pulse.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace rlgate {

ActionGrid::ActionGrid(double min_value, double max_value, double spacing) : spacing_(spacing) {
  if (!(spacing > 0.0) || max_value < min_value) throw std::invalid_argument("ActionGrid: bad range");
  const auto lo = static_cast<long>(std::lround(min_value / spacing));
  const auto hi = static_cast<long>(std::lround(max_value / spacing));
  // Integer multiples keep 0.0 and the endpoints exact.
  for (long i = lo; i <= hi; ++i) values_.push_back(static_cast<double>(i) * spacing);
}

ActionGrid ActionGrid::quadrature_x() { return ActionGrid(0.0, 0.20, 0.01); }
ActionGrid ActionGrid::quadrature_y() { return ActionGrid(-0.10, 0.10, 0.01); }

std::size_t ActionGrid::nearest_clamped(double amplitude, bool* clamped) const {
  bool was_clamped = false;
  if (amplitude < min()) {
    amplitude = min();
    was_clamped = true;
  } else if (amplitude > max()) {
    amplitude = max();
    was_clamped = true;
  }
  if (clamped != nullptr) *clamped = was_clamped;

  // Work in units of the spacing, rounding half toward zero.
  const double scaled = amplitude / spacing_;
  const double lower = std::floor(scaled);
  const double frac = scaled - lower;
  constexpr double kTieEps = 1e-9;
  double target;
  if (std::abs(frac - 0.5) <= kTieEps) {
    target = scaled >= 0.0 ? lower : lower + 1.0;
  } else {
    target = frac < 0.5 ? lower : lower + 1.0;
  }
  const double first = std::round(values_.front() / spacing_);
  auto idx = static_cast<long>(target - first);
  idx = std::max(0L, std::min(idx, static_cast<long>(values_.size()) - 1));
  return static_cast<std::size_t>(idx);
}

std::size_t ActionGrid::index_of(double amplitude) const {
  const double half = 0.5 * spacing_ * (1.0 + 1e-9);
  if (!(amplitude >= min() - half && amplitude <= max() + half)) {
    std::ostringstream msg;
    msg << "ActionGrid: amplitude " << amplitude << " outside [" << min() << ", " << max() << "]";
    throw std::out_of_range(msg.str());
  }
  return nearest_clamped(amplitude);
}

std::size_t grid_index(const ActionGrid& grid, double amplitude) { return grid.index_of(amplitude); }

void DragParams::validate() const {
  if (!(amplitude >= 0.0)) throw std::invalid_argument("DragParams: amplitude must be >= 0");
  if (!(sigma > 0.0)) throw std::invalid_argument("DragParams: sigma must be > 0");
  if (!(t_g > 0.0)) throw std::invalid_argument("DragParams: t_g must be > 0");
}

Quadratures drag_envelope(const DragParams& p, double t) {
  p.validate();
  if (t < 0.0 || t > p.t_g) throw std::out_of_range("drag_envelope: t outside [0, t_g]");
  const double x = t - 0.5 * p.t_g;
  const double s2 = p.sigma * p.sigma;
  const double g = std::exp(-x * x / (2.0 * s2));
  const double base = std::exp(-p.t_g * p.t_g / (8.0 * s2));
  return {p.amplitude * (g - base), p.gamma * p.amplitude * (-x / s2) * g};
}

PwcWaveform sample_drag(const DragParams& p, int n_seg, double omega_d) {
  if (n_seg < 1) throw std::invalid_argument("sample_drag: n_seg must be >= 1");
  PwcWaveform w;
  w.tau = p.t_g / n_seg;
  w.omega_d = omega_d;
  w.segments.reserve(static_cast<std::size_t>(n_seg));
  for (int k = 0; k < n_seg; ++k) {
    const Quadratures q = drag_envelope(p, (k + 0.5) * w.tau);
    w.segments.push_back({q.cx, q.cy});
  }
  return w;
}

DiscretizeResult snap_to_grid(const PwcWaveform& w, const ActionGrid& grid_x, const ActionGrid& grid_y) {
  DiscretizeResult out{w, {}};
  for (std::size_t k = 0; k < w.segments.size(); ++k) {
    bool cx_clamped = false;
    bool cy_clamped = false;
    Segment& s = out.waveform.segments[k];
    const double ux = grid_x[grid_x.nearest_clamped(s.ux, &cx_clamped)];
    const double uy = grid_y[grid_y.nearest_clamped(s.uy, &cy_clamped)];
    if (cx_clamped || cy_clamped) {
      std::ostringstream msg;
      msg << "segment " << k << ": amplitude (" << s.ux << ", " << s.uy << ") clamped to grid range";
      out.warnings.push_back(msg.str());
    }
    s = {ux, uy};
  }
  return out;
}

DiscretizeResult discretize(const DragParams& p, int n_seg, const ActionGrid& grid_x, const ActionGrid& grid_y,
                            double omega_d) {
  return snap_to_grid(sample_drag(p, n_seg, omega_d), grid_x, grid_y);
}

}  // namespace rlgate

namespace rlgate {

namespace {

DragCalibrationResult best_amplitude(const TransmonParams& params, const StateVector& target,
                                     const DragCalibration& sweep, double gamma) {
  DragCalibrationResult best;
  best.fidelity = -1.0;
  auto consider = [&](double amplitude) {
    const DragParams p{amplitude, sweep.sigma_fraction * sweep.t_g, gamma, sweep.t_g};
    const Matrix u = evolve(sample_drag(p, sweep.samples, params.omega_d), params);
    const double f = fidelity(u, target);
    if (f > best.fidelity) best = {p, f, leakage(u)};
  };
  const double coarse = 5.0 * sweep.amplitude_step;
  const auto n_coarse = static_cast<int>(std::lround(sweep.amplitude_max / coarse));
  for (int i = 0; i <= n_coarse; ++i) consider(i * coarse);
  const double center = best.params.amplitude;
  for (int i = -5; i <= 5; ++i) {
    const double a = center + i * sweep.amplitude_step;
    if (i != 0 && a >= 0.0 && a <= sweep.amplitude_max) consider(a);
  }
  return best;
}

std::vector<double> gamma_grid(const DragCalibration& sweep) {
  std::vector<double> g;
  const auto n = static_cast<int>(std::lround((sweep.gamma_max - sweep.gamma_min) / sweep.gamma_step));
  for (int i = 0; i <= std::max(n, 0); ++i) g.push_back(sweep.gamma_min + i * sweep.gamma_step);
  return g;
}

DragCalibrationResult pick(const std::vector<DragCalibrationResult>& results) {
  const DragCalibrationResult* best = &results.front();
  for (const auto& r : results)
    if ((1.0 - r.fidelity) + r.leakage < (1.0 - best->fidelity) + best->leakage) best = &r;
  return *best;
}

}  // namespace

DragCalibrationResult calibrate_drag(const TransmonParams& params, const StateVector& target,
                                     const DragCalibration& sweep) {
  const std::vector<double> gammas = gamma_grid(sweep);
  std::vector<DragCalibrationResult> results(gammas.size());
  const auto n = static_cast<std::ptrdiff_t>(gammas.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < n; ++i) results[i] = best_amplitude(params, target, sweep, gammas[i]);
  return pick(results);
}

DragCalibrationResult calibrate_drag_serial(const TransmonParams& params, const StateVector& target,
                                            const DragCalibration& sweep) {
  std::vector<DragCalibrationResult> results;
  for (double g : gamma_grid(sweep)) results.push_back(best_amplitude(params, target, sweep, g));
  return pick(results);
}

}  // namespace rlgate
