// Copyright 2026 The spherewalk Authors.
// SPDX-License-Identifier: Apache-2.0

#include <benchmark/benchmark.h>

#include <vector>

#include "spherewalk/classifier.hpp"
#include "spherewalk/rng.hpp"
#include "spherewalk/sphere.hpp"
#include "spherewalk/walk.hpp"

namespace sphere = spherewalk::sphere;

namespace {

std::vector<sphere::LatentVector> random_points(int n, int d) {
  spherewalk::Rng rng(3);
  std::vector<sphere::LatentVector> out;
  for (int i = 0; i < n; ++i) out.push_back(sphere::random_unit(d, rng));
  return out;
}

}  // namespace

static void BM_Slerp(benchmark::State& state) {
  const auto p = random_points(2, static_cast<int>(state.range(0)));
  int k = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(sphere::slerp(p[0], p[1], k / 100.0));
    k = (k + 1) % 101;
  }
}
BENCHMARK(BM_Slerp)->Arg(128)->Arg(1024);

static void BM_SphericalMean(benchmark::State& state) {
  const auto p = random_points(static_cast<int>(state.range(0)), 128);
  for (auto _ : state) benchmark::DoNotOptimize(sphere::spherical_mean(p));
}
BENCHMARK(BM_SphericalMean)->Arg(4)->Arg(64)->Arg(1000);

static void BM_LinearMeanNorm(benchmark::State& state) {
  const auto p = random_points(static_cast<int>(state.range(0)), 128);
  for (auto _ : state) benchmark::DoNotOptimize(sphere::linear_mean_norm(p));
}
BENCHMARK(BM_LinearMeanNorm)->Arg(64)->Arg(1000);

// One walk iteration against a default-shaped classifier.
static void BM_WalkIteration(benchmark::State& state) {
  spherewalk::classifier::ClassifierSpec spec;
  const auto cls = spherewalk::nn::init_model(spec.layer_specs(128), 5);
  const auto z0 = random_points(1, 128)[0];
  spherewalk::walk::WalkConfig c;
  c.iterations = 1;
  c.snapshot_every = 1;
  c.stop_loss = 0;
  for (auto _ : state) benchmark::DoNotOptimize(spherewalk::walk::semantic_walk(cls, z0, c));
}
BENCHMARK(BM_WalkIteration);
BENCHMARK_MAIN();
