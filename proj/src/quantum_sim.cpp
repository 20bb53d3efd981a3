#include "rlgate/quantum_sim.hpp"

#include <cmath>
#include <iostream>
#include <stdexcept>

namespace rlgate {

namespace {

const cplx kI{0.0, 1.0};

Matrix lowering(int d) {
  Matrix a = Matrix::Zero(d, d);
  for (int n = 1; n < d; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
  return a;
}

// Diagonal of omega n + (alpha/2) n(n-1).
Eigen::VectorXd static_diagonal(int d, double omega, double alpha) {
  Eigen::VectorXd diag(d);
  for (int n = 0; n < d; ++n) diag(n) = omega * n + 0.5 * alpha * n * (n - 1);
  return diag;
}

Matrix exp_i_hermitian(const Matrix& h, double t) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(h);
  const Eigen::VectorXd& evals = solver.eigenvalues();
  const Matrix& evecs = solver.eigenvectors();
  Eigen::VectorXcd phases(evals.size());
  for (Eigen::Index i = 0; i < evals.size(); ++i) phases(i) = std::exp(-kI * evals(i) * t);
  return evecs * phases.asDiagonal() * evecs.adjoint();
}

}  // namespace

void TransmonParams::validate() const {
  if (levels < 3) throw std::invalid_argument("TransmonParams: levels must be >= 3");
  if (!(alpha < 0.0)) throw std::invalid_argument("TransmonParams: alpha must be negative");
  if (!(drive_scale > 0.0)) throw std::invalid_argument("TransmonParams: drive_scale must be positive");
}

PwcWaveform PwcWaveform::prefix(std::size_t n) const {
  PwcWaveform out = *this;
  out.segments.resize(std::min(n, segments.size()));
  return out;
}

Matrix segment_hamiltonian(const TransmonParams& params, double ux, double uy) {
  params.validate();
  const int d = params.levels;
  const Matrix a = lowering(d);
  const Matrix adag = a.adjoint();
  Matrix h = Matrix::Zero(d, d);
  h.diagonal() = static_diagonal(d, params.detuning(), params.alpha).cast<cplx>();
  const double half = 0.5 * params.drive_scale;
  h += half * ux * (a + adag);
  h += half * uy * kI * (adag - a);
  return h;
}

Matrix segment_propagator(const Matrix& hamiltonian, double tau) { return exp_i_hermitian(hamiltonian, tau); }

Matrix evolve(const PwcWaveform& waveform, const TransmonParams& params) {
  if (waveform.segments.empty()) throw std::invalid_argument("evolve: empty waveform");
  TransmonParams p = params;
  p.omega_d = waveform.omega_d;
  Matrix u = Matrix::Identity(p.levels, p.levels);
  for (const Segment& s : waveform.segments) u = segment_propagator(segment_hamiltonian(p, s.ux, s.uy), waveform.tau) * u;
  return u;
}

std::vector<Matrix> evolve_batch(std::span<const PwcWaveform> waveforms, const TransmonParams& params) {
  std::vector<Matrix> out(waveforms.size());
  const auto n = static_cast<std::ptrdiff_t>(waveforms.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < n; ++i) out[i] = evolve(waveforms[i], params);
  return out;
}

std::vector<Matrix> evolve_batch_serial(std::span<const PwcWaveform> waveforms, const TransmonParams& params) {
  std::vector<Matrix> out;
  out.reserve(waveforms.size());
  for (const PwcWaveform& w : waveforms) out.push_back(evolve(w, params));
  return out;
}

bool carrier_under_resolved(const TransmonParams& params, double tau, int substeps_per_segment) {
  return tau / substeps_per_segment * params.omega_q > 0.1;
}

Matrix lab_frame_evolve(const PwcWaveform& waveform, const TransmonParams& params, int substeps_per_segment) {
  params.validate();
  if (waveform.segments.empty()) throw std::invalid_argument("lab_frame_evolve: empty waveform");
  if (substeps_per_segment < 1) throw std::invalid_argument("lab_frame_evolve: substeps_per_segment < 1");
  if (carrier_under_resolved(params, waveform.tau, substeps_per_segment))
    std::clog << "warning: lab_frame_evolve step under-resolves the carrier (dt*omega_q > 0.1 rad)\n";

  const int d = params.levels;
  const double wd = waveform.omega_d;
  const Matrix a = lowering(d);
  const Matrix x_op = a + a.adjoint();
  const Eigen::VectorXd h0 = static_diagonal(d, params.omega_q, params.alpha);

  // Gauss-Legendre nodes and commutator-free Magnus weights (order 4).
  const double r3 = std::sqrt(3.0);
  const double c1 = 0.5 - r3 / 6.0;
  const double c2 = 0.5 + r3 / 6.0;
  const double w1 = (3.0 - 2.0 * r3) / 12.0;
  const double w2 = (3.0 + 2.0 * r3) / 12.0;

  auto hamiltonian_at = [&](double t, const Segment& s) {
    Matrix h = params.drive_scale * (s.ux * std::cos(wd * t) + s.uy * std::sin(wd * t)) * x_op;
    h.diagonal() += h0.cast<cplx>();
    return h;
  };

  const double dt = waveform.tau / substeps_per_segment;
  Matrix u = Matrix::Identity(d, d);
  for (std::size_t k = 0; k < waveform.segments.size(); ++k) {
    const Segment& s = waveform.segments[k];
    const double t_start = static_cast<double>(k) * waveform.tau;
    for (int m = 0; m < substeps_per_segment; ++m) {
      const double t = t_start + m * dt;
      const Matrix h1 = hamiltonian_at(t + c1 * dt, s);
      const Matrix h2 = hamiltonian_at(t + c2 * dt, s);
      const Matrix first = exp_i_hermitian(w2 * h1 + w1 * h2, dt);
      const Matrix second = exp_i_hermitian(w1 * h1 + w2 * h2, dt);
      u = second * first * u;
    }
  }

  const double tg = waveform.duration();
  Eigen::VectorXcd frame(d);
  for (int n = 0; n < d; ++n) frame(n) = std::exp(kI * wd * tg * static_cast<double>(n));
  return frame.asDiagonal() * u;
}

StateVector basis_state(int levels, int index) {
  StateVector v = StateVector::Zero(levels);
  v(index) = 1.0;
  return v;
}

double fidelity(const Matrix& unitary, const StateVector& target) {
  const cplx overlap = target.dot(unitary.col(0));
  return std::norm(overlap);
}

double leakage(const Matrix& unitary, LeakageMode mode) {
  if (mode == LeakageMode::SecondLevelOnly) return std::norm(unitary(2, 0));
  double sum = 0.0;
  for (Eigen::Index m = 2; m < unitary.rows(); ++m) sum += std::norm(unitary(m, 0));
  return sum;
}

double unitarity_error(const Matrix& unitary) {
  const Matrix e = unitary.adjoint() * unitary - Matrix::Identity(unitary.rows(), unitary.cols());
  return e.cwiseAbs().maxCoeff();
}

std::vector<double> populations_from_ground(const Matrix& unitary) {
  std::vector<double> p(static_cast<std::size_t>(unitary.rows()));
  for (Eigen::Index m = 0; m < unitary.rows(); ++m) p[static_cast<std::size_t>(m)] = std::norm(unitary(m, 0));
  return p;
}

}  // namespace rlgate
