// Copyright 2026 The spherewalk Authors.
// SPDX-License-Identifier: Apache-2.0

#include "spherewalk/mapping.hpp"

#include <cmath>
#include <string>

#include "spherewalk/errors.hpp"

namespace spherewalk::mapping {

std::vector<nn::LayerSpec> MappingSpec::layer_specs() const {
  if (in_dim <= 0 || out_dim <= 0) throw SpecError("mapping: dims must be positive");
  std::vector<nn::LayerSpec> specs;
  int prev = in_dim;
  for (int width : hidden) {
    if (width <= 0) throw SpecError("mapping: hidden widths must be positive");
    specs.push_back(nn::LayerSpec::dense(prev, width));
    if (batchnorm) specs.push_back(nn::LayerSpec::batchnorm(width));
    specs.push_back(nn::LayerSpec::tanh(width));
    prev = width;
  }
  specs.push_back(nn::LayerSpec::dense(prev, out_dim));
  nn::validate_specs(specs);
  return specs;
}

nn::TrainConfig default_train_config() {
  nn::TrainConfig c;
  c.optimizer = nn::OptimizerKind::kAdam;
  c.learning_rate = 1e-3;
  c.l2_lambda = 1e-4;
  c.batch_size = 32;
  c.epochs = 200;
  return c;
}

nn::Matrix map_batch(const nn::MlpModel& model, std::span<const sphere::LatentVector> zs) {
  if (zs.empty()) return nn::Matrix(0, model.output_dim());
  nn::Matrix x(static_cast<Eigen::Index>(zs.size()), model.input_dim());
  for (std::size_t i = 0; i < zs.size(); ++i) {
    if (zs[i].dim() != model.input_dim()) {
      throw ValidationError("map_latent: latent dimension " + std::to_string(zs[i].dim()) +
                            " does not match mapping input " +
                            std::to_string(model.input_dim()));
    }
    x.row(static_cast<Eigen::Index>(i)) = zs[i].values().transpose();
  }
  const nn::MlpModel* m = &model;
  nn::MlpModel frozen;
  if (model.mode() != nn::Mode::kInference) {
    frozen = model;
    frozen.set_mode(nn::Mode::kInference);
    m = &frozen;
  }
  nn::Matrix out(x.rows(), model.output_dim());
  for (Eigen::Index i = 0; i < x.rows(); ++i) out.row(i) = nn::predict(*m, x.row(i));
  return out;
}

Eigen::VectorXd map_latent(const nn::MlpModel& model, const sphere::LatentVector& z) {
  return map_batch(model, std::span<const sphere::LatentVector>(&z, 1)).row(0).transpose();
}

double mapping_mse(const nn::MlpModel& model, std::span<const MappingPair> pairs,
                   std::span<const Eigen::Index> rows) {
  if (rows.empty()) return 0.0;
  std::vector<sphere::LatentVector> zs;
  zs.reserve(rows.size());
  nn::Matrix target(static_cast<Eigen::Index>(rows.size()), model.output_dim());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const MappingPair& p = pairs[static_cast<std::size_t>(rows[i])];
    zs.push_back(p.z);
    target.row(static_cast<Eigen::Index>(i)) = p.target.transpose();
  }
  const nn::Matrix pred = map_batch(model, zs);
  return (pred - target).squaredNorm() / static_cast<double>(pred.size());
}

MappingResult train_mapping(std::span<const MappingPair> pairs, const MappingSpec& spec,
                            const nn::TrainConfig& config, const Split* split) {
  if (pairs.size() < kMinPairs) {
    throw ValidationError("train_mapping: need at least " + std::to_string(kMinPairs) +
                          " pairs, got " + std::to_string(pairs.size()));
  }
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const MappingPair& p = pairs[i];
    if (p.z.dim() != spec.in_dim) {
      throw ValidationError("train_mapping: pair " + std::to_string(i) + " has latent dim " +
                            std::to_string(p.z.dim()) + ", expected " +
                            std::to_string(spec.in_dim));
    }
    if (std::abs(p.z.values().norm() - 1.0) > 1e-9) {
      throw ValidationError("train_mapping: pair " + std::to_string(i) + " latent is not unit");
    }
    if (p.target.size() != spec.out_dim) {
      throw ValidationError("train_mapping: pair " + std::to_string(i) + " target has dim " +
                            std::to_string(p.target.size()) + ", expected " +
                            std::to_string(spec.out_dim));
    }
  }
  config.validate();

  const Split s = split != nullptr
                      ? *split
                      : make_split(static_cast<Eigen::Index>(pairs.size()), config.seed);
  nn::Matrix x(static_cast<Eigen::Index>(s.train.size()), spec.in_dim);
  nn::Matrix y(static_cast<Eigen::Index>(s.train.size()), spec.out_dim);
  for (std::size_t i = 0; i < s.train.size(); ++i) {
    const MappingPair& p = pairs[static_cast<std::size_t>(s.train[i])];
    x.row(static_cast<Eigen::Index>(i)) = p.z.values().transpose();
    y.row(static_cast<Eigen::Index>(i)) = p.target.transpose();
  }

  const auto specs = spec.layer_specs();
  MappingResult result;
  result.model = nn::init_model(specs, config.seed);
  result.loss_history = nn::train(result.model, x, y, nn::LossKind::kMse, config).loss_history;
  result.train_mse = mapping_mse(result.model, pairs, s.train);
  result.heldout_mse = mapping_mse(result.model, pairs, s.heldout);
  return result;
}

}  // namespace spherewalk::mapping
