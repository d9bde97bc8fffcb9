// Copyright 2026 The spherewalk Authors.
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>

#include "spherewalk/classifier.hpp"
#include "spherewalk/errors.hpp"
#include "spherewalk/rng.hpp"
#include "spherewalk/split.hpp"

namespace sw = spherewalk;
namespace classifier = spherewalk::classifier;
namespace nn = spherewalk::nn;
using sw::sphere::LatentVector;

namespace {

// Labels from the half-space w.z > 0; a linearly separable attribute.
sw::EmbeddingDataset half_space(int n, int d, std::uint64_t seed, bool random_labels = false) {
  sw::Rng rng(seed);
  const auto w = sw::sphere::random_unit(d, rng);
  sw::EmbeddingDataset data;
  data.dim = d;
  data.attributes = {"half"};
  for (int i = 0; i < n; ++i) {
    const auto z = sw::sphere::random_unit(d, rng);
    data.ids.push_back("e" + std::to_string(i));
    data.vectors.push_back(z);
    const int y = random_labels ? static_cast<int>(rng.index(2)) : z.values().dot(w.values()) > 0;
    data.labels.push_back({y});
  }
  return data;
}

nn::TrainConfig quick_config(int epochs = 40) {
  auto c = classifier::default_train_config();
  c.epochs = epochs;
  c.learning_rate = 1e-3;
  return c;
}

classifier::ClassifierSpec spec_for(const std::string& attr, int depth = 4, int width = 32) {
  classifier::ClassifierSpec s;
  s.attribute = attr;
  s.depth = depth;
  s.width = width;
  return s;
}

}  // namespace

TEST(ClassifierSpec, DepthBand) {
  for (int depth : {4, 5, 6, 7}) {
    const auto specs = spec_for("a", depth).layer_specs(16);
    int dense = 0;
    for (const auto& l : specs) dense += l.kind == nn::LayerKind::kDense;
    EXPECT_EQ(dense, depth);
    EXPECT_EQ(specs.back().kind, nn::LayerKind::kSigmoid);
    EXPECT_EQ(specs.back().out_dim, 1);
  }
  EXPECT_THROW(spec_for("a", 3).validate(), sw::SpecError);
  EXPECT_THROW(spec_for("a", 8).validate(), sw::SpecError);
  EXPECT_THROW(spec_for("a", 5, 0).validate(), sw::SpecError);
}

TEST(TrainClassifier, HalfSpaceIsLearned) {
  const auto data = half_space(1000, 32, 1);
  const auto r = classifier::train_classifier(data, "half", spec_for("half"), quick_config());
  EXPECT_GE(r.heldout_accuracy, 0.95);
}

TEST(TrainClassifier, RandomLabelsAtChance) {
  const auto data = half_space(1000, 32, 2, true);
  const auto r = classifier::train_classifier(data, "half", spec_for("half"), quick_config());
  EXPECT_NEAR(r.heldout_accuracy, 0.5, 0.1);
}

TEST(TrainClassifier, SameSeedSameWeights) {
  const auto data = half_space(300, 16, 3);
  const auto a = classifier::train_classifier(data, "half", spec_for("half"), quick_config(5));
  const auto b = classifier::train_classifier(data, "half", spec_for("half"), quick_config(5));
  EXPECT_TRUE(a.model.identical_to(b.model));
  EXPECT_EQ(a.loss_history, b.loss_history);
}

TEST(TrainClassifier, Errors) {
  auto data = half_space(300, 16, 4);
  EXPECT_THROW(classifier::train_classifier(data, "other", spec_for("other"), quick_config(1)),
               sw::ValidationError);
  for (auto& l : data.labels) l[0] = 1;
  EXPECT_THROW(classifier::train_classifier(data, "half", spec_for("half"), quick_config(1)),
               sw::ValidationError);
}

TEST(Predict, RangeAndClassOrdering) {
  const auto data = half_space(1000, 32, 5);
  const auto split = sw::make_split(1000, 6);
  const auto fresh = nn::init_model(spec_for("half").layer_specs(32), 1);
  sw::Rng rng(7);
  for (int i = 0; i < 100; ++i) {
    const double p = classifier::predict(fresh, sw::sphere::random_unit(32, rng));
    EXPECT_GT(p, 0.0);
    EXPECT_LT(p, 1.0);
  }
  const auto r = classifier::train_classifier(data, "half", spec_for("half"), quick_config(), &split);
  double pos = 0, neg = 0;
  int npos = 0, nneg = 0;
  for (auto i : split.heldout) {
    const double p = classifier::predict(r.model, data.vectors[static_cast<std::size_t>(i)]);
    EXPECT_TRUE(std::isfinite(p));
    if (data.labels[static_cast<std::size_t>(i)][0]) {
      pos += p;
      ++npos;
    } else {
      neg += p;
      ++nneg;
    }
  }
  EXPECT_GT(pos / npos, neg / nneg);
  EXPECT_THROW(classifier::predict(r.model, sw::sphere::random_unit(31, rng)), sw::ValidationError);
}

TEST(Evaluate, LossMatchesBce) {
  const auto m = nn::init_model(spec_for("a", 5).layer_specs(12), 2);
  sw::Rng rng(8);
  for (int i = 0; i < 20; ++i) {
    const auto z = sw::sphere::random_unit(12, rng);
    for (int y : {0, 1}) {
      const auto e = classifier::evaluate(m, z, y);
      const nn::Matrix p = nn::Matrix::Constant(1, 1, e.probability);
      const nn::Matrix t = nn::Matrix::Constant(1, 1, y);
      EXPECT_NEAR(e.loss, nn::data_loss(nn::LossKind::kBce, p, t).loss, 1e-12);
      EXPECT_NEAR(e.loss, classifier::bce_loss(e.probability, y), 1e-12);
    }
  }
}

// Central differences on the unconstrained input.
TEST(InputGradient, MatchesDifferences) {
  const auto m = nn::init_model(spec_for("a", 5, 16).layer_specs(10), 3);
  sw::Rng rng(9);
  const double eps = 1e-6;
  for (int i = 0; i < 10; ++i) {
    const auto z = sw::sphere::random_unit(10, rng);
    for (int y : {0, 1}) {
      const Eigen::VectorXd g = classifier::input_gradient(m, z, y);
      for (int k = 0; k < 10; ++k) {
        nn::Matrix hi = z.values().transpose(), lo = hi;
        hi(0, k) += eps;
        lo(0, k) -= eps;
        const double num = (classifier::bce_loss(nn::predict(m, hi)(0, 0), y) -
                            classifier::bce_loss(nn::predict(m, lo)(0, 0), y)) / (2 * eps);
        EXPECT_LT(nn::relative_error(g[k], num), 1e-4);
      }
    }
  }
}

TEST(InputGradient, OpposingDirections) {
  const auto data = half_space(600, 16, 10);
  const auto r = classifier::train_classifier(data, "half", spec_for("half"), quick_config(10));
  sw::Rng rng(11);
  for (int i = 0; i < 20; ++i) {
    const auto z = sw::sphere::random_unit(16, rng);
    const double p = classifier::predict(r.model, z);
    const auto step = [&](int y) {
      const Eigen::VectorXd g = classifier::input_gradient(r.model, z, y);
      return classifier::predict(r.model, sw::sphere::normalize(z.values() - 1e-4 * g / g.norm()));
    };
    EXPECT_GT(step(1), p);
    EXPECT_LT(step(0), p);
  }
}

TEST(InputGradient, VanishesWhenSatisfied) {
  std::vector<nn::LayerSpec> specs = {nn::LayerSpec::dense(4, 1), nn::LayerSpec::sigmoid(1)};
  auto m = nn::init_model(specs, 1);
  m.mutable_layers()[0].weight << 30, 0, 0, 0;
  const auto z = sw::sphere::normalize(Eigen::Vector4d(1, 0, 0, 0));
  EXPECT_GT(classifier::predict(m, z), 1 - 1e-12);
  // dL/dz = -(1 - p) w for y = 1.
  const double expected = 30 * std::exp(-30.0) / (1 + std::exp(-30.0));
  EXPECT_NEAR(classifier::input_gradient(m, z, 1).norm(), expected, 1e-2 * expected);
  EXPECT_GT(classifier::input_gradient(m, z, 0).norm(), 1.0);
  EXPECT_THROW(classifier::input_gradient(m, z, 2), sw::ValidationError);
}
