#include <benchmark/benchmark.h>

#include <random>

#include "rlgate/pulse.hpp"
#include "rlgate/quantum_sim.hpp"
#include "rlgate/readout.hpp"

using namespace rlgate;

namespace {

const std::vector<double> kPops{0.3, 0.6, 0.1};

std::vector<PwcWaveform> waveforms(int count) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> ux(0.0, 0.2), uy(-0.1, 0.1);
  std::vector<PwcWaveform> out(static_cast<std::size_t>(count));
  for (PwcWaveform& w : out)
    for (int k = 0; k < 20; ++k) w.segments.push_back({ux(rng), uy(rng)});
  return out;
}

Discriminator discriminator() {
  const IqClusterModel m = IqClusterModel::regular(3);
  std::vector<IqBatch> labelled;
  for (std::size_t l = 0; l < 3; ++l) {
    std::vector<double> p(3, 0.0);
    p[l] = 1.0;
    labelled.push_back(sample_readout(p, m, 2000, l));
  }
  return fit_discriminator(labelled);
}

DragCalibration sweep() {
  DragCalibration s;
  s.gamma_min = 0.0;
  s.gamma_max = 0.5;
  s.gamma_step = 0.02;
  return s;
}

void BM_SampleReadout(benchmark::State& state) {
  const IqClusterModel m = IqClusterModel::regular(3);
  for (auto _ : state) benchmark::DoNotOptimize(sample_readout(kPops, m, state.range(0), 7));
}

void BM_SampleReadoutSerial(benchmark::State& state) {
  const IqClusterModel m = IqClusterModel::regular(3);
  for (auto _ : state) benchmark::DoNotOptimize(sample_readout_serial(kPops, m, state.range(0), 7));
}

void BM_ClassifyBatch(benchmark::State& state) {
  const Discriminator d = discriminator();
  const IqBatch b = sample_readout(kPops, IqClusterModel::regular(3), state.range(0), 8);
  for (auto _ : state) benchmark::DoNotOptimize(d.classify_batch(b));
}

void BM_ClassifyBatchSerial(benchmark::State& state) {
  const Discriminator d = discriminator();
  const IqBatch b = sample_readout(kPops, IqClusterModel::regular(3), state.range(0), 8);
  for (auto _ : state) benchmark::DoNotOptimize(d.classify_batch_serial(b));
}

void BM_EvolveBatch(benchmark::State& state) {
  const auto ws = waveforms(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(evolve_batch(ws, TransmonParams{}));
}

void BM_EvolveBatchSerial(benchmark::State& state) {
  const auto ws = waveforms(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(evolve_batch_serial(ws, TransmonParams{}));
}

void BM_CalibrateDrag(benchmark::State& state) {
  const StateVector one = basis_state(3, 1);
  for (auto _ : state) benchmark::DoNotOptimize(calibrate_drag(TransmonParams{}, one, sweep()));
}

void BM_CalibrateDragSerial(benchmark::State& state) {
  const StateVector one = basis_state(3, 1);
  for (auto _ : state) benchmark::DoNotOptimize(calibrate_drag_serial(TransmonParams{}, one, sweep()));
}

}  // namespace

BENCHMARK(BM_SampleReadout)->Arg(512)->Arg(10000)->Arg(200000);
BENCHMARK(BM_SampleReadoutSerial)->Arg(512)->Arg(10000)->Arg(200000);
BENCHMARK(BM_ClassifyBatch)->Arg(512)->Arg(10000)->Arg(200000);
BENCHMARK(BM_ClassifyBatchSerial)->Arg(512)->Arg(10000)->Arg(200000);
BENCHMARK(BM_EvolveBatch)->Arg(16)->Arg(256);
BENCHMARK(BM_EvolveBatchSerial)->Arg(16)->Arg(256);
BENCHMARK(BM_CalibrateDrag)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CalibrateDragSerial)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
