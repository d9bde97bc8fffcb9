// Copyright 2026 The spherewalk Authors.
// SPDX-License-Identifier: Apache-2.0

// Per-attribute binary classifiers over sphere latents. Besides the
// probability, they provide the exact gradient of the cross-entropy loss
// with respect to the latent, which is what drives a semantic walk.

#pragma once

#include <Eigen/Dense>

#include <string>
#include <string_view>
#include <vector>

#include "spherewalk/embeddings.hpp"
#include "spherewalk/nn.hpp"
#include "spherewalk/sphere.hpp"
#include "spherewalk/split.hpp"

namespace spherewalk::classifier {

inline constexpr int kMinDepth = 4;
inline constexpr int kMaxDepth = 7;

struct ClassifierSpec {
  std::string attribute;
  int depth = 5;    // dense layers, 4..7
  int width = 128;  // hidden width

  void validate() const;
  /// dense(in, w) tanh, (depth - 2) x [dense(w, w) tanh], dense(w, 1) sigmoid.
  std::vector<nn::LayerSpec> layer_specs(int input_dim) const;
};

struct ClassifierResult {
  nn::MlpModel model;
  double train_accuracy = 0.0;
  double heldout_accuracy = 0.0;
  std::vector<double> loss_history;
};

/// Adam, lr 1e-3, l2 1e-4, batch 32, 60 epochs.
nn::TrainConfig default_train_config();

/// BCE training on one attribute's labels with a 90/10 split (seeded from
/// config.seed unless `split` is given). Throws ValidationError for an
/// unknown attribute or when the training rows contain a single class.
ClassifierResult train_classifier(const EmbeddingDataset& data, std::string_view attribute,
                                  const ClassifierSpec& spec, const nn::TrainConfig& config,
                                  const Split* split = nullptr);

/// Probability that z carries the attribute.
double predict(const nn::MlpModel& model, const sphere::LatentVector& z);

/// -[y log p + (1-y) log(1-p)] with p clamped to [1e-12, 1 - 1e-12].
double bce_loss(double probability, int label);

struct Evaluation {
  double probability = 0.0;
  double loss = 0.0;
  Eigen::VectorXd gradient;  // d loss / d z
};

/// One forward + backward at z for target label y (0 or 1).
Evaluation evaluate(const nn::MlpModel& model, const sphere::LatentVector& z, int label);

/// d loss(predict(z), y) / d z.
Eigen::VectorXd input_gradient(const nn::MlpModel& model, const sphere::LatentVector& z,
                               int label);

/// Fraction of `rows` whose thresholded prediction (p >= 0.5) equals the label.
double accuracy(const nn::MlpModel& model, const EmbeddingDataset& data,
                std::size_t attribute_index, std::span<const Eigen::Index> rows);

}  // namespace spherewalk::classifier
