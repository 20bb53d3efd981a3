#include <doctest.h>

#include <cmath>

#include "rlgate/readout.hpp"

using namespace rlgate;

namespace {

std::vector<IqBatch> labelled(const IqClusterModel& model, std::size_t shots, std::uint64_t seed) {
  std::vector<IqBatch> out;
  for (std::size_t m = 0; m < model.levels(); ++m) {
    std::vector<double> pops(model.levels(), 0.0);
    pops[m] = 1.0;
    out.push_back(sample_readout(pops, model, shots, seed + m));
  }
  return out;
}

IqClusterModel two_class(double separation) {
  IqClusterModel m;
  m.centers = {{0.0, 0.0}, {separation, 0.0}};
  m.covariances = {Eigen::Matrix2d::Identity(), Eigen::Matrix2d::Identity()};
  return m;
}

}  // namespace

TEST_CASE("regular cluster geometry") {
  const IqClusterModel m = IqClusterModel::regular(3);
  REQUIRE(m.levels() == 3);
  for (std::size_t a = 0; a < 3; ++a) {
    const std::size_t b = (a + 1) % 3;
    CHECK(std::hypot(m.centers[a].i - m.centers[b].i, m.centers[a].q - m.centers[b].q) == doctest::Approx(6.0));
  }
  CHECK_NOTHROW(m.validate());
  IqClusterModel bad = m;
  bad.covariances[1](0, 1) = 0.5;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("sample_readout statistics") {
  const IqClusterModel m = IqClusterModel::regular(3);
  const std::vector<double> ground{1.0, 0.0, 0.0};
  const IqPoint mean = batch_mean(sample_readout(ground, m, 10000, 1));
  CHECK(std::abs(mean.i - m.centers[0].i) < 4.0 / 100.0);
  CHECK(std::abs(mean.q - m.centers[0].q) < 4.0 / 100.0);

  const std::vector<double> half{0.5, 0.5, 0.0};
  const std::size_t n = 100000;
  const IqPoint mid = batch_mean(sample_readout(half, m, n, 2));
  const double di = m.centers[1].i - m.centers[0].i, dq = m.centers[1].q - m.centers[0].q;
  // Per-axis variance: cluster spread plus the two-point mixture.
  const double se_i = std::sqrt((1.0 + di * di / 4) / n), se_q = std::sqrt((1.0 + dq * dq / 4) / n);
  CHECK(std::abs(mid.i - 0.5 * (m.centers[0].i + m.centers[1].i)) < 3 * se_i);
  CHECK(std::abs(mid.q - 0.5 * (m.centers[0].q + m.centers[1].q)) < 3 * se_q);
}

TEST_CASE("zero covariance samples sit on the center") {
  IqClusterModel m = IqClusterModel::regular(3, 0.0);
  m.centers = IqClusterModel::regular(3).centers;
  const IqBatch b = sample_readout(std::vector<double>{0.0, 0.0, 1.0}, m, 500, 3);
  for (const IqPoint& p : b.samples) CHECK(p == m.centers[2]);
}

TEST_CASE("sample_readout is reproducible and matches the serial reference") {
  const IqClusterModel m = IqClusterModel::regular(3);
  const std::vector<double> pops{0.2, 0.7, 0.1};
  for (std::size_t n : {1u, 17u, 4096u, 10001u}) {
    const IqBatch a = sample_readout(pops, m, n, 42);
    CHECK(a.samples == sample_readout_serial(pops, m, n, 42).samples);
    CHECK(a.samples == sample_readout(pops, m, n, 42).samples);
  }
  CHECK(sample_readout(pops, m, 100, 1).samples != sample_readout(pops, m, 100, 2).samples);
}

TEST_CASE("batch_mean") {
  CHECK(batch_mean(IqBatch{{{1.0, -2.0}}}) == IqPoint{1.0, -2.0});
  CHECK(batch_mean(IqBatch{{{0.0, 0.0}, {2.0, 2.0}}}) == IqPoint{1.0, 1.0});
}

TEST_CASE("discriminator accuracy") {
  IqClusterModel sharp = two_class(5.0);
  sharp.covariances = {Eigen::Matrix2d::Zero(), Eigen::Matrix2d::Zero()};
  const auto sharp_data = labelled(sharp, 50, 10);
  CHECK(classification_accuracy(sharp_data, fit_discriminator(sharp_data)) == 1.0);

  const auto same = labelled(two_class(0.0), 20000, 20);
  CHECK(classification_accuracy(same, fit_discriminator(same)) == doctest::Approx(0.5).epsilon(0.03));

  const auto overlap = labelled(two_class(3.0), 20000, 30);
  const double acc = classification_accuracy(overlap, fit_discriminator(overlap));
  CHECK(acc > 0.90);
  CHECK(acc < 0.999);
  // Equal-prior LDA error for 3 sigma separation is Phi(-1.5).
  CHECK(acc == doctest::Approx(0.5 * std::erfc(-1.5 / std::sqrt(2.0))).epsilon(0.01));

  CHECK_THROWS_AS(fit_discriminator(std::vector<IqBatch>{overlap[0]}), std::invalid_argument);
}

TEST_CASE("classify_batch matches the serial reference") {
  const IqClusterModel m = IqClusterModel::regular(3);
  const Discriminator d = fit_discriminator(labelled(m, 2000, 5));
  const IqBatch b = sample_readout(std::vector<double>{0.3, 0.3, 0.4}, m, 20000, 6);
  CHECK(d.classify_batch(b) == d.classify_batch_serial(b));
}

TEST_CASE("estimate_populations") {
  IqClusterModel sharp = IqClusterModel::regular(3, 0.0);
  sharp.centers = IqClusterModel::regular(3).centers;
  const Discriminator ds = fit_discriminator(labelled(sharp, 20, 1));
  const auto p2 = estimate_populations(sample_readout(std::vector<double>{0, 0, 1}, sharp, 100, 2), ds);
  CHECK(p2 == std::vector<double>{0.0, 0.0, 1.0});

  const IqClusterModel m = IqClusterModel::regular(3);
  const Discriminator d = fit_discriminator(labelled(m, 10000, 100));
  const auto ground = estimate_populations(sample_readout(std::vector<double>{1, 0, 0}, m, 10000, 3), d);
  CHECK(ground[2] < 0.005);
  double total = 0.0;
  for (double x : ground) total += x;
  CHECK(total == doctest::Approx(1.0));

  const auto leaky = estimate_populations(sample_readout(std::vector<double>{0.45, 0.5, 0.05}, m, 10000, 4), d);
  CHECK(std::abs(leaky[2] - 0.05) <= 0.01);
}

TEST_CASE("calibrate_target") {
  IqClusterModel sharp = IqClusterModel::regular(3, 0.0);
  sharp.centers = IqClusterModel::regular(3).centers;
  const ReadoutTarget t = calibrate_target(std::vector<double>{0, 1, 0}, sharp, 1000, 1);
  CHECK(std::abs(t.mean.i - sharp.centers[1].i) < 1e-12);
  CHECK(std::abs(t.mean.q - sharp.centers[1].q) < 1e-12);
  CHECK(t.sigma == kSigmaFloor);

  const IqClusterModel m = IqClusterModel::regular(3);
  const ReadoutTarget x = calibrate_target(std::vector<double>{0, 1, 0}, m, 10000, 2);
  CHECK(std::abs(x.mean.i - m.centers[1].i) < 0.04);
  CHECK(std::abs(x.mean.q - m.centers[1].q) < 0.04);
  CHECK(x.sigma == doctest::Approx(1.0).epsilon(0.05));
  const ReadoutTarget se = calibrate_target(std::vector<double>{0, 1, 0}, m, 10000, 2, SigmaMode::MeanStandardError);
  CHECK(se.sigma == doctest::Approx(x.sigma / 100.0));
}
