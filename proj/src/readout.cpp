#include "rlgate/readout.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

namespace rlgate {

namespace {

constexpr std::size_t kShotChunk = 64;

struct Cholesky2 {
  double l11 = 0.0, l21 = 0.0, l22 = 0.0;
};

// Lower factor of a positive semi-definite 2x2 matrix.
Cholesky2 factor(const Eigen::Matrix2d& c) {
  Cholesky2 f;
  f.l11 = std::sqrt(std::max(c(0, 0), 0.0));
  f.l21 = f.l11 > 0.0 ? c(1, 0) / f.l11 : 0.0;
  f.l22 = std::sqrt(std::max(c(1, 1) - f.l21 * f.l21, 0.0));
  return f;
}

std::vector<double> checked_cdf(std::span<const double> populations, std::size_t levels) {
  if (populations.size() != levels) throw std::invalid_argument("sample_readout: populations size != model levels");
  std::vector<double> cdf(levels);
  double acc = 0.0;
  for (std::size_t m = 0; m < levels; ++m) {
    if (populations[m] < -1e-12) throw std::invalid_argument("sample_readout: negative population");
    acc += std::max(populations[m], 0.0);
    cdf[m] = acc;
  }
  if (std::abs(acc - 1.0) > 1e-9) throw std::invalid_argument("sample_readout: populations do not sum to 1");
  return cdf;
}

struct SamplingPlan {
  std::vector<double> cdf;
  std::vector<Cholesky2> factors;
};

void sample_chunk(const SamplingPlan& plan, const IqClusterModel& model, std::uint64_t seed, std::size_t chunk,
                  std::span<IqPoint> out) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(chunk), static_cast<std::uint32_t>(chunk >> 32)};
  std::mt19937_64 engine(seq);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  const std::size_t last = plan.cdf.size() - 1;
  for (IqPoint& p : out) {
    const double u = uniform(engine) * plan.cdf.back();
    std::size_t m = 0;
    while (m < last && u >= plan.cdf[m]) ++m;
    const double z1 = normal(engine);
    const double z2 = normal(engine);
    const Cholesky2& f = plan.factors[m];
    p.i = model.centers[m].i + f.l11 * z1;
    p.q = model.centers[m].q + f.l21 * z1 + f.l22 * z2;
  }
}

SamplingPlan make_plan(std::span<const double> populations, const IqClusterModel& model, std::size_t n_shots) {
  if (n_shots < 1) throw std::invalid_argument("sample_readout: n_shots must be >= 1");
  SamplingPlan plan;
  plan.cdf = checked_cdf(populations, model.levels());
  for (const auto& c : model.covariances) plan.factors.push_back(factor(c));
  return plan;
}

}  // namespace

void IqClusterModel::validate() const {
  if (centers.empty() || centers.size() != covariances.size())
    throw std::invalid_argument("IqClusterModel: need one covariance per center");
  for (const auto& c : covariances) {
    if (std::abs(c(0, 1) - c(1, 0)) > 1e-12) throw std::invalid_argument("IqClusterModel: covariance not symmetric");
    if (c(0, 0) < 0.0 || c(1, 1) < 0.0 || c.determinant() < -1e-15)
      throw std::invalid_argument("IqClusterModel: covariance not positive semi-definite");
  }
}

IqClusterModel IqClusterModel::regular(int levels, double sigma, double separation_in_sigma) {
  if (levels < 2) throw std::invalid_argument("IqClusterModel::regular: need >= 2 levels");
  IqClusterModel m;
  const double side = separation_in_sigma * sigma;
  // Circumradius of a regular polygon with the given side.
  const double radius = side / (2.0 * std::sin(3.14159265358979323846 / levels));
  for (int k = 0; k < levels; ++k) {
    const double angle = 3.14159265358979323846 * (0.5 + 2.0 * k / levels);
    m.centers.push_back({radius * std::cos(angle), radius * std::sin(angle)});
    m.covariances.push_back(Eigen::Matrix2d::Identity() * sigma * sigma);
  }
  return m;
}

IqBatch sample_readout(std::span<const double> populations, const IqClusterModel& model, std::size_t n_shots,
                       std::uint64_t seed) {
  const SamplingPlan plan = make_plan(populations, model, n_shots);
  IqBatch batch;
  batch.samples.resize(n_shots);
  const auto chunks = static_cast<std::ptrdiff_t>((n_shots + kShotChunk - 1) / kShotChunk);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t c = 0; c < chunks; ++c) {
    const std::size_t begin = static_cast<std::size_t>(c) * kShotChunk;
    const std::size_t len = std::min(kShotChunk, n_shots - begin);
    sample_chunk(plan, model, seed, static_cast<std::size_t>(c), std::span(batch.samples).subspan(begin, len));
  }
  return batch;
}

IqBatch sample_readout_serial(std::span<const double> populations, const IqClusterModel& model, std::size_t n_shots,
                              std::uint64_t seed) {
  const SamplingPlan plan = make_plan(populations, model, n_shots);
  IqBatch batch;
  batch.samples.resize(n_shots);
  for (std::size_t begin = 0, c = 0; begin < n_shots; begin += kShotChunk, ++c) {
    const std::size_t len = std::min(kShotChunk, n_shots - begin);
    sample_chunk(plan, model, seed, c, std::span(batch.samples).subspan(begin, len));
  }
  return batch;
}

IqPoint batch_mean(const IqBatch& batch) {
  if (batch.samples.empty()) throw std::invalid_argument("batch_mean: empty batch");
  double si = 0.0, sq = 0.0;
  for (const IqPoint& p : batch.samples) {
    si += p.i;
    sq += p.q;
  }
  const auto n = static_cast<double>(batch.samples.size());
  return {si / n, sq / n};
}

Discriminator::Discriminator(std::vector<Eigen::Vector2d> weights, std::vector<double> offsets)
    : weights_(std::move(weights)), offsets_(std::move(offsets)) {
  if (weights_.size() != offsets_.size()) throw std::invalid_argument("Discriminator: size mismatch");
}

std::size_t Discriminator::classify(const IqPoint& p) const {
  std::size_t best = 0;
  double best_score = -std::numeric_limits<double>::infinity();
  for (std::size_t m = 0; m < weights_.size(); ++m) {
    const double score = weights_[m](0) * p.i + weights_[m](1) * p.q + offsets_[m];
    if (score > best_score) {
      best_score = score;
      best = m;
    }
  }
  return best;
}

std::vector<std::size_t> Discriminator::classify_batch(const IqBatch& batch) const {
  std::vector<std::size_t> labels(batch.samples.size());
  const auto n = static_cast<std::ptrdiff_t>(labels.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t s = 0; s < n; ++s) labels[s] = classify(batch.samples[s]);
  return labels;
}

std::vector<std::size_t> Discriminator::classify_batch_serial(const IqBatch& batch) const {
  std::vector<std::size_t> labels;
  labels.reserve(batch.samples.size());
  for (const IqPoint& p : batch.samples) labels.push_back(classify(p));
  return labels;
}

Discriminator fit_discriminator(std::span<const IqBatch> labeled_batches) {
  if (labeled_batches.size() < 2) throw std::invalid_argument("fit_discriminator: need >= 2 classes");
  std::vector<Eigen::Vector2d> means;
  Eigen::Matrix2d scatter = Eigen::Matrix2d::Zero();
  std::size_t total = 0;
  for (const IqBatch& b : labeled_batches) {
    if (b.n_shots() < 10) throw std::invalid_argument("fit_discriminator: need >= 10 samples per class");
    const IqPoint m = batch_mean(b);
    means.emplace_back(m.i, m.q);
    for (const IqPoint& p : b.samples) {
      const Eigen::Vector2d d(p.i - m.i, p.q - m.q);
      scatter += d * d.transpose();
    }
    total += b.n_shots();
  }
  Eigen::Matrix2d pooled = scatter / static_cast<double>(total - labeled_batches.size());
  if (std::abs(pooled.determinant()) <= 1e-12 * std::max(1.0, pooled.squaredNorm())) {
    const double trace = pooled.trace();
    pooled += Eigen::Matrix2d::Identity() * (trace > 0.0 ? 1e-6 * trace : 1e-12);
  }
  const Eigen::Matrix2d inv = pooled.inverse();

  std::vector<Eigen::Vector2d> weights;
  std::vector<double> offsets;
  for (std::size_t m = 0; m < means.size(); ++m) {
    const Eigen::Vector2d w = inv * means[m];
    const double prior = static_cast<double>(labeled_batches[m].n_shots()) / static_cast<double>(total);
    weights.push_back(w);
    offsets.push_back(-0.5 * means[m].dot(w) + std::log(prior));
  }
  return Discriminator(std::move(weights), std::move(offsets));
}

std::vector<double> estimate_populations(const IqBatch& batch, const Discriminator& disc) {
  if (batch.samples.empty()) throw std::invalid_argument("estimate_populations: empty batch");
  std::vector<std::size_t> counts(disc.classes(), 0);
  for (std::size_t label : disc.classify_batch(batch)) ++counts[label];
  std::vector<double> p(counts.size());
  const auto n = static_cast<double>(batch.samples.size());
  for (std::size_t m = 0; m < counts.size(); ++m) p[m] = static_cast<double>(counts[m]) / n;
  return p;
}

double classification_accuracy(std::span<const IqBatch> labeled_batches, const Discriminator& disc) {
  std::size_t correct = 0, total = 0;
  for (std::size_t m = 0; m < labeled_batches.size(); ++m) {
    for (std::size_t label : disc.classify_batch(labeled_batches[m])) correct += label == m ? 1 : 0;
    total += labeled_batches[m].n_shots();
  }
  return total == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(total);
}

ReadoutTarget calibrate_target(std::span<const double> target_populations, const IqClusterModel& model,
                               std::size_t n_shots, std::uint64_t seed, SigmaMode mode) {
  const IqBatch batch = sample_readout(target_populations, model, n_shots, seed);
  const IqPoint mean = batch_mean(batch);
  double ss = 0.0;
  for (const IqPoint& p : batch.samples) ss += (p.i - mean.i) * (p.i - mean.i) + (p.q - mean.q) * (p.q - mean.q);
  const auto n = static_cast<double>(batch.samples.size());
  double sigma = n > 1.0 ? std::sqrt(ss / (2.0 * (n - 1.0))) : 0.0;
  if (mode == SigmaMode::MeanStandardError) sigma /= std::sqrt(n);
  return {mean, std::max(sigma, kSigmaFloor)};
}

}  // namespace rlgate
