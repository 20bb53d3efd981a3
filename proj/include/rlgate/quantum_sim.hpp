#pragma once

#include <complex>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace rlgate {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using StateVector = Eigen::VectorXcd;

constexpr double kTwoPi = 6.283185307179586476925286766559;

// Transmon parameters. Frequencies are angular, in rad/ns.
struct TransmonParams {
  double omega_q = kTwoPi * 5.0;
  double alpha = -kTwoPi * 0.330;
  int levels = 3;
  // Rabi rate (rad/ns) per unit of dimensionless drive amplitude.
  double drive_scale = kDefaultDriveScale;
  double omega_d = kTwoPi * 5.0;

  // A flat 20-segment pulse (35.6 ns) of amplitude 0.07 is a pi rotation.
  static constexpr double kDefaultDriveScale = 3.14159265358979323846 / (0.07 * 35.6);

  double detuning() const { return omega_q - omega_d; }
  // Throws std::invalid_argument on levels < 3, alpha >= 0 or drive_scale <= 0.
  void validate() const;
};

struct Segment {
  double ux = 0.0;
  double uy = 0.0;
  bool operator==(const Segment&) const = default;
};

// Piecewise-constant two-quadrature drive. tau in ns, omega_d in rad/ns.
struct PwcWaveform {
  std::vector<Segment> segments;
  double tau = 1.78;
  double omega_d = kTwoPi * 5.0;

  std::size_t size() const { return segments.size(); }
  double duration() const { return tau * static_cast<double>(segments.size()); }
  PwcWaveform prefix(std::size_t n) const;
  bool operator==(const PwcWaveform&) const = default;
};

// Which levels count as leaked population.
enum class LeakageMode { SecondLevelOnly, AllNonComputational };

// Rotating-frame RWA Hamiltonian for one segment:
//   H = D n + (alpha/2) a+a+aa + (drive_scale/2) (ux (a + a+) + uy i(a+ - a))
// with D = omega_q - omega_d. In the qubit subspace the drive reads
// (drive_scale/2)(ux sx + uy sy), so a positive ux rotates |0> toward -i|1>.
Matrix segment_hamiltonian(const TransmonParams& params, double ux, double uy);

// exp(-i H tau) for Hermitian H, via eigendecomposition.
Matrix segment_propagator(const Matrix& hamiltonian, double tau);

// Ordered product of segment propagators, last segment leftmost. The detuning
// is taken from the waveform's drive frequency.
Matrix evolve(const PwcWaveform& waveform, const TransmonParams& params);

// Batch evolve. OpenMP-parallel over waveforms; evolve_batch_serial is the
// reference loop and produces identical results.
std::vector<Matrix> evolve_batch(std::span<const PwcWaveform> waveforms, const TransmonParams& params);
std::vector<Matrix> evolve_batch_serial(std::span<const PwcWaveform> waveforms, const TransmonParams& params);

// True when the lab-frame integration step resolves the carrier poorly
// (dt * omega_q > 0.1 rad).
bool carrier_under_resolved(const TransmonParams& params, double tau, int substeps_per_segment);

// Lab-frame oracle without the RWA:
//   H(t) = omega_q n + (alpha/2) a+a+aa + drive_scale c(t) (a + a+),
//   c(t) = ux cos(omega_d t) + uy sin(omega_d t),
// integrated with a fourth-order commutator-free Magnus scheme and mapped to
// the frame rotating at omega_d at t = t_g. Warns on std::clog if the carrier
// is under-resolved.
Matrix lab_frame_evolve(const PwcWaveform& waveform, const TransmonParams& params, int substeps_per_segment);

StateVector basis_state(int levels, int index);

// |<target|U|0>|^2
double fidelity(const Matrix& unitary, const StateVector& target);

// |<2|U|0>|^2, or the sum over all m >= 2 with AllNonComputational.
double leakage(const Matrix& unitary, LeakageMode mode = LeakageMode::SecondLevelOnly);

// max_ij |(U+U - I)_ij|
double unitarity_error(const Matrix& unitary);

// Populations |<m|U|0>|^2 for every level m.
std::vector<double> populations_from_ground(const Matrix& unitary);

}  // namespace rlgate
