// Copyright 2026 The spherewalk Authors.
// SPDX-License-Identifier: Apache-2.0

#include "spherewalk/classifier.hpp"

#include <algorithm>
#include <cmath>

#include "spherewalk/errors.hpp"

namespace spherewalk::classifier {
namespace {

nn::Matrix as_row(const sphere::LatentVector& z) { return z.values().transpose(); }

void require_input_dim(const nn::MlpModel& model, const sphere::LatentVector& z) {
  if (z.dim() != model.input_dim()) {
    throw ValidationError("classifier: latent dimension " + std::to_string(z.dim()) +
                          " does not match classifier input " +
                          std::to_string(model.input_dim()));
  }
  if (model.output_dim() != 1) throw ValidationError("classifier: model must have one output");
}

}  // namespace

void ClassifierSpec::validate() const {
  if (depth < kMinDepth || depth > kMaxDepth) {
    throw SpecError("classifier depth " + std::to_string(depth) + " outside [" +
                    std::to_string(kMinDepth) + ", " + std::to_string(kMaxDepth) + "]");
  }
  if (width <= 0) throw SpecError("classifier width must be positive");
}

std::vector<nn::LayerSpec> ClassifierSpec::layer_specs(int input_dim) const {
  validate();
  std::vector<nn::LayerSpec> specs;
  specs.push_back(nn::LayerSpec::dense(input_dim, width));
  specs.push_back(nn::LayerSpec::tanh(width));
  for (int i = 0; i < depth - 2; ++i) {
    specs.push_back(nn::LayerSpec::dense(width, width));
    specs.push_back(nn::LayerSpec::tanh(width));
  }
  specs.push_back(nn::LayerSpec::dense(width, 1));
  specs.push_back(nn::LayerSpec::sigmoid(1));
  nn::validate_specs(specs);
  return specs;
}

nn::TrainConfig default_train_config() {
  nn::TrainConfig c;
  c.optimizer = nn::OptimizerKind::kAdam;
  c.learning_rate = 3e-4;
  c.l2_lambda = 1e-4;
  c.batch_size = 32;
  c.epochs = 150;
  return c;
}

double predict(const nn::MlpModel& model, const sphere::LatentVector& z) {
  require_input_dim(model, z);
  if (model.mode() != nn::Mode::kInference) {
    nn::MlpModel frozen = model;
    frozen.set_mode(nn::Mode::kInference);
    return nn::predict(frozen, as_row(z))(0, 0);
  }
  return nn::predict(model, as_row(z))(0, 0);
}

double bce_loss(double probability, int label) {
  nn::Matrix p(1, 1), y(1, 1);
  p(0, 0) = probability;
  y(0, 0) = label;
  return nn::data_loss(nn::LossKind::kBce, p, y).data_loss;
}

Evaluation evaluate(const nn::MlpModel& model, const sphere::LatentVector& z, int label) {
  require_input_dim(model, z);
  if (label != 0 && label != 1) throw ValidationError("classifier: label must be 0 or 1");
  if (model.mode() != nn::Mode::kInference) {
    throw ValidationError("classifier: input gradients need an inference-mode model");
  }
  nn::ForwardResult fr = nn::forward(model, as_row(z));
  nn::Matrix y(1, 1);
  y(0, 0) = label;
  const nn::LossResult lr = nn::data_loss(nn::LossKind::kBce, fr.output, y);
  const nn::Gradients g = nn::backward(model, fr.cache, lr.grad_pred);
  Evaluation e;
  e.probability = fr.output(0, 0);
  e.loss = lr.data_loss;
  e.gradient = g.input.row(0).transpose();
  return e;
}

Eigen::VectorXd input_gradient(const nn::MlpModel& model, const sphere::LatentVector& z,
                               int label) {
  return evaluate(model, z, label).gradient;
}

double accuracy(const nn::MlpModel& model, const EmbeddingDataset& data,
                std::size_t attribute_index, std::span<const Eigen::Index> rows) {
  if (rows.empty()) return 0.0;
  nn::Matrix x(static_cast<Eigen::Index>(rows.size()), data.dim);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    x.row(static_cast<Eigen::Index>(i)) =
        data.vectors[static_cast<std::size_t>(rows[i])].values().transpose();
  }
  nn::MlpModel frozen = model;
  frozen.set_mode(nn::Mode::kInference);
  const nn::Matrix p = nn::predict(frozen, x);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const int predicted = p(static_cast<Eigen::Index>(i), 0) >= 0.5 ? 1 : 0;
    if (predicted == data.labels[static_cast<std::size_t>(rows[i])][attribute_index]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(rows.size());
}

ClassifierResult train_classifier(const EmbeddingDataset& data, std::string_view attribute,
                                  const ClassifierSpec& spec, const nn::TrainConfig& config,
                                  const Split* split) {
  data.validate();
  spec.validate();
  config.validate();
  const std::size_t a = data.attribute_index(attribute);
  if (data.size() < 2) throw ValidationError("train_classifier: need at least two examples");

  const Split s = split != nullptr
                      ? *split
                      : make_split(static_cast<Eigen::Index>(data.size()), config.seed);
  nn::Matrix x(static_cast<Eigen::Index>(s.train.size()), data.dim);
  nn::Matrix y(static_cast<Eigen::Index>(s.train.size()), 1);
  int positives = 0;
  for (std::size_t i = 0; i < s.train.size(); ++i) {
    const auto row = static_cast<std::size_t>(s.train[i]);
    x.row(static_cast<Eigen::Index>(i)) = data.vectors[row].values().transpose();
    y(static_cast<Eigen::Index>(i), 0) = data.labels[row][a];
    positives += data.labels[row][a];
  }
  if (positives == 0 || positives == static_cast<int>(s.train.size())) {
    throw ValidationError("train_classifier: attribute '" + std::string(attribute) +
                          "' has a single class in the training data");
  }

  ClassifierResult result;
  result.model = nn::init_model(spec.layer_specs(data.dim), config.seed);
  result.loss_history = nn::train(result.model, x, y, nn::LossKind::kBce, config).loss_history;
  result.train_accuracy = accuracy(result.model, data, a, s.train);
  result.heldout_accuracy = accuracy(result.model, data, a, s.heldout);
  return result;
}

}  // namespace spherewalk::classifier
