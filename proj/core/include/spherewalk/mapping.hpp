// Copyright 2026 The spherewalk Authors.
// SPDX-License-Identifier: Apache-2.0

// The bridge from the sphere latent space Z to the decoder's latent space
// Z2: an MLP of dense + batchnorm + tanh hidden blocks with a linear output,
// trained with MSE plus an L2 weight penalty.

#pragma once

#include <Eigen/Dense>

#include <span>
#include <vector>

#include "spherewalk/nn.hpp"
#include "spherewalk/sphere.hpp"
#include "spherewalk/split.hpp"

namespace spherewalk::mapping {

struct MappingSpec {
  int in_dim = 128;
  int out_dim = 64;
  /// One dense + batchnorm + tanh block per entry; with the linear output
  /// layer the default gives five dense layers.
  std::vector<int> hidden = {256, 256, 256, 256};
  bool batchnorm = true;

  std::vector<nn::LayerSpec> layer_specs() const;
  int dense_layer_count() const { return static_cast<int>(hidden.size()) + 1; }
};

struct MappingPair {
  sphere::LatentVector z;
  Eigen::VectorXd target;
};

struct MappingResult {
  nn::MlpModel model;
  double train_mse = 0.0;    // mean squared error per output element
  double heldout_mse = 0.0;  // same, on the held-out pairs
  std::vector<double> loss_history;
};

inline constexpr std::size_t kMinPairs = 100;

/// Adam, lr 1e-3, l2 1e-4, batch 32, 200 epochs.
nn::TrainConfig default_train_config();

/// Trains on a 90/10 split (seeded from config.seed unless `split` is
/// given). Throws ValidationError for fewer than 100 pairs, non-unit z or
/// inconsistent dimensions; NumericError on NaN.
MappingResult train_mapping(std::span<const MappingPair> pairs, const MappingSpec& spec,
                            const nn::TrainConfig& config, const Split* split = nullptr);

/// Inference-mode forward of one latent. No normalization of the output.
Eigen::VectorXd map_latent(const nn::MlpModel& model, const sphere::LatentVector& z);

/// Rows are the mapped latents, bit-identical to map_latent on each one.
/// Evaluated a row at a time.
nn::Matrix map_batch(const nn::MlpModel& model, std::span<const sphere::LatentVector> zs);

/// Mean squared error per output element over `rows` of the pairs.
double mapping_mse(const nn::MlpModel& model, std::span<const MappingPair> pairs,
                   std::span<const Eigen::Index> rows);

}  // namespace spherewalk::mapping
