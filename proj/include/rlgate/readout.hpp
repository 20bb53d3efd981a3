#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace rlgate {

struct IqPoint {
  double i = 0.0;
  double q = 0.0;
  bool operator==(const IqPoint&) const = default;
};

// Per-level Gaussian clusters of integrated readout signal in the (I, Q) plane.
struct IqClusterModel {
  std::vector<IqPoint> centers;
  std::vector<Eigen::Matrix2d> covariances;

  std::size_t levels() const { return centers.size(); }
  // Throws std::invalid_argument on size mismatch, asymmetric or indefinite
  // covariances. Zero covariance is accepted.
  void validate() const;

  // Centers on a regular polygon with nearest-neighbour distance
  // separation_in_sigma * sigma and isotropic per-axis spread sigma. Three
  // levels give an equilateral triangle.
  static IqClusterModel regular(int levels, double sigma = 1.0, double separation_in_sigma = kDefaultSeparation);

  static constexpr double kDefaultSeparation = 6.0;
};

struct IqBatch {
  std::vector<IqPoint> samples;
  std::size_t n_shots() const { return samples.size(); }
};

// Each shot draws a level from populations, then (I, Q) from that level's
// Gaussian. Shots are generated in fixed chunks, each from its own
// seed-derived engine, so the OpenMP and serial variants agree bit-for-bit
// for any thread count.
IqBatch sample_readout(std::span<const double> populations, const IqClusterModel& model, std::size_t n_shots,
                       std::uint64_t seed);
IqBatch sample_readout_serial(std::span<const double> populations, const IqClusterModel& model, std::size_t n_shots,
                              std::uint64_t seed);

IqPoint batch_mean(const IqBatch& batch);

// Linear discriminant with shared pooled covariance. Class m scores
//   x' S^-1 mu_m - mu_m' S^-1 mu_m / 2 + log prior_m
// and classify returns the argmax.
class Discriminator {
 public:
  Discriminator() = default;
  Discriminator(std::vector<Eigen::Vector2d> weights, std::vector<double> offsets);

  std::size_t classes() const { return weights_.size(); }
  std::size_t classify(const IqPoint& p) const;
  // Classification of every shot. OpenMP-parallel; the serial variant is the
  // reference.
  std::vector<std::size_t> classify_batch(const IqBatch& batch) const;
  std::vector<std::size_t> classify_batch_serial(const IqBatch& batch) const;

  const std::vector<Eigen::Vector2d>& weights() const { return weights_; }
  const std::vector<double>& offsets() const { return offsets_; }

 private:
  std::vector<Eigen::Vector2d> weights_;
  std::vector<double> offsets_;
};

// Needs >= 2 classes with >= 10 samples each. A singular pooled covariance is
// regularized with a ridge of 1e-6 * trace (1e-12 when the trace is zero).
Discriminator fit_discriminator(std::span<const IqBatch> labeled_batches);

// Fraction of shots assigned to each class; sums to one.
std::vector<double> estimate_populations(const IqBatch& batch, const Discriminator& disc);

// Fraction of a batch classified correctly, for labeled batches.
double classification_accuracy(std::span<const IqBatch> labeled_batches, const Discriminator& disc);

enum class SigmaMode {
  // Per-shot cluster spread: sqrt((var_I + var_Q) / 2) of the batch.
  ShotSpread,
  // Standard error of the batch mean: ShotSpread / sqrt(n_shots).
  MeanStandardError,
};

struct ReadoutTarget {
  IqPoint mean;
  double sigma = 1.0;
};

constexpr double kSigmaFloor = 1e-6;

// Mean and spread of a readout batch taken on the ideal target populations.
ReadoutTarget calibrate_target(std::span<const double> target_populations, const IqClusterModel& model,
                               std::size_t n_shots, std::uint64_t seed, SigmaMode mode = SigmaMode::ShotSpread);

}  // namespace rlgate
