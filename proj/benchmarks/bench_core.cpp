#include "softft/calibration.hpp"
#include "softft/estimation.hpp"
#include "softft/registration.hpp"
#include "softft/simulation.hpp"

#include <benchmark/benchmark.h>

#include <random>

using namespace softft;

namespace {

const World& dipole_world() {
  static const World w{WorldConfig{}};
  return w;
}

Correspondences cloud(std::size_t n) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g(0.0, 10.0);
  const Transform t = exp_se3({{1.0, -2.0, 0.5}, {0.1, 0.2, -0.3}});
  Correspondences c;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3 p(g(rng), g(rng), g(rng));
    c.source.push_back(p);
    c.target.push_back(t.apply(p));
  }
  return c;
}

}  // namespace

static void BM_ExpSe3(benchmark::State& st) {
  const Twist xi{{0.3, -0.1, 0.2}, {0.4, -0.7, 0.2}};
  for (auto _ : st) benchmark::DoNotOptimize(exp_se3(xi));
}
BENCHMARK(BM_ExpSe3);

static void BM_LogSe3(benchmark::State& st) {
  const Transform t = exp_se3({{0.3, -0.1, 0.2}, {0.4, -0.7, 0.2}});
  for (auto _ : st) benchmark::DoNotOptimize(log_se3(t));
}
BENCHMARK(BM_LogSe3);

static void BM_DipoleFlux(benchmark::State& st) {
  const DipoleSource src{kDefaultMagnetMoment, Transform::from_translation({0.2, -0.1, 6.0})};
  const Transform sensor = Transform::identity();
  for (auto _ : st) benchmark::DoNotOptimize(dipole_flux(src, sensor));
}
BENCHMARK(BM_DipoleFlux);

static void BM_ArunRegister(benchmark::State& st) {
  const Correspondences c = cloud(static_cast<std::size_t>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(arun_register(c));
}
BENCHMARK(BM_ArunRegister)->Arg(8)->Arg(64)->Arg(1024);

static void BM_TwistFromFlux(benchmark::State& st) {
  const World& w = dipole_world();
  const FluxSample s = w.clean_flux(exp_se3({{0.2, 0.1, -0.3}, {0.01, -0.02, 0.03}}));
  for (auto _ : st) benchmark::DoNotOptimize(twist_from_flux(w.geometry(), w.linear_map(), s));
}
BENCHMARK(BM_TwistFromFlux);

static void BM_EstimateWrench(benchmark::State& st) {
  const World& w = dipole_world();
  const auto ds = w.make_dataset(calibration_poses(1, 193), 1);
  const Estimator e = Estimator::from_calibration(run_calibration(ds, w.geometry(), w.linear_map()));
  const VecX b = ds.records.front().flux;
  for (auto _ : st) benchmark::DoNotOptimize(estimate_wrench(e, b));
}
BENCHMARK(BM_EstimateWrench);

static void BM_RunCalibration(benchmark::State& st) {
  const World& w = dipole_world();
  const auto ds = w.make_dataset(calibration_poses(1, 193), 1);
  for (auto _ : st) benchmark::DoNotOptimize(run_calibration(ds, w.geometry(), w.linear_map()));
}
BENCHMARK(BM_RunCalibration)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
