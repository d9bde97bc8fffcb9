// Copyright 2026 The spherewalk Authors.
// SPDX-License-Identifier: Apache-2.0

#include <benchmark/benchmark.h>

#include "spherewalk/mapping.hpp"
#include "spherewalk/rng.hpp"

namespace nn = spherewalk::nn;

namespace {

nn::Matrix random_batch(int rows, int cols) {
  spherewalk::Rng rng(7);
  nn::Matrix x(rows, cols);
  for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = rng.normal();
  return x;
}

}  // namespace

// The default sphere -> decoder-latent mapping, in inference mode.
static void BM_MappingPredict(benchmark::State& state) {
  const spherewalk::mapping::MappingSpec spec;
  auto model = nn::init_model(spec.layer_specs(), 1);
  model.set_mode(nn::Mode::kInference);
  const auto x = random_batch(static_cast<int>(state.range(0)), spec.in_dim);
  for (auto _ : state) benchmark::DoNotOptimize(nn::predict(model, x));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_MappingPredict)->Arg(1)->Arg(64)->Arg(512);

static void BM_MappingForwardBackward(benchmark::State& state) {
  const spherewalk::mapping::MappingSpec spec;
  const auto model = nn::init_model(spec.layer_specs(), 1);
  const auto x = random_batch(static_cast<int>(state.range(0)), spec.in_dim);
  const auto t = random_batch(static_cast<int>(state.range(0)), spec.out_dim);
  for (auto _ : state) {
    auto fwd = nn::forward(model, x);
    const auto loss = nn::data_loss(nn::LossKind::kMse, fwd.output, t);
    benchmark::DoNotOptimize(nn::backward(model, fwd.cache, loss.grad_pred));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_MappingForwardBackward)->Arg(64)->Arg(512);
