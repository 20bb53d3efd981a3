#pragma once

#include <string>
#include <vector>

#include "rlgate/quantum_sim.hpp"

namespace rlgate {

// Sorted set of allowed amplitudes with uniform spacing.
class ActionGrid {
 public:
  ActionGrid(double min_value, double max_value, double spacing = 0.01);

  // {0.00, 0.01, ..., 0.20}
  static ActionGrid quadrature_x();
  // {-0.10, -0.09, ..., 0.10}
  static ActionGrid quadrature_y();

  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  const std::vector<double>& values() const { return values_; }
  double min() const { return values_.front(); }
  double max() const { return values_.back(); }
  double spacing() const { return spacing_; }

  // Nearest grid index; ties round toward zero amplitude. Throws
  // std::out_of_range beyond half a spacing outside the grid.
  std::size_t index_of(double amplitude) const;
  // Nearest index after clamping into range; sets *clamped when clamping was needed.
  std::size_t nearest_clamped(double amplitude, bool* clamped = nullptr) const;

  bool operator==(const ActionGrid&) const = default;

 private:
  std::vector<double> values_;
  double spacing_;
};

std::size_t grid_index(const ActionGrid& grid, double amplitude);

struct DragParams {
  double amplitude = 0.0;
  double sigma = 35.6 / 4.0;  // ns
  double gamma = 0.0;         // ns
  double t_g = 35.6;          // ns

  void validate() const;
};

struct Quadratures {
  double cx = 0.0;
  double cy = 0.0;
};

// cx = A (exp(-(t - t_g/2)^2 / (2 sigma^2)) - exp(-t_g^2 / (8 sigma^2))), cy = gamma dcx/dt.
// The constant offset makes cx vanish at both ends.
Quadratures drag_envelope(const DragParams& p, double t);

// Envelope sampled at segment midpoints without rounding.
PwcWaveform sample_drag(const DragParams& p, int n_seg, double omega_d);

struct DiscretizeResult {
  PwcWaveform waveform;
  std::vector<std::string> warnings;
};

// Midpoint samples rounded to the nearest grid values, ties toward zero.
// Out-of-range values are clamped and reported in warnings.
DiscretizeResult discretize(const DragParams& p, int n_seg, const ActionGrid& grid_x, const ActionGrid& grid_y,
                            double omega_d);

// Rounds free-form amplitudes of an existing waveform onto the grids.
DiscretizeResult snap_to_grid(const PwcWaveform& w, const ActionGrid& grid_x, const ActionGrid& grid_y);

// Calibration sweep for a DRAG pulse sampled at the waveform generator rate.
struct DragCalibration {
  double t_g = 35.6;
  int samples = 160;  // dt = t_g / 160 = 0.2225 ns
  double sigma_fraction = 0.25;
  double amplitude_max = 0.2;
  double amplitude_step = 0.001;
  double gamma_min = -1.0;
  double gamma_max = 1.0;
  double gamma_step = 0.01;
};

struct DragCalibrationResult {
  DragParams params;
  double fidelity = 0.0;
  double leakage = 0.0;
};

// For every gamma on the grid, finds the amplitude maximizing fidelity
// (coarse pass at 5x the step, then refined), and keeps the gamma minimizing
// (1 - fidelity) + leakage. gamma_min = gamma_max = 0 calibrates a plain
// Gaussian. OpenMP-parallel over gamma.
DragCalibrationResult calibrate_drag(const TransmonParams& params, const StateVector& target,
                                     const DragCalibration& sweep = {});
DragCalibrationResult calibrate_drag_serial(const TransmonParams& params, const StateVector& target,
                                            const DragCalibration& sweep = {});

}  // namespace rlgate
