// Copyright 2026 The spherewalk Authors.
// SPDX-License-Identifier: Apache-2.0

// Small feedforward-network engine: dense, batchnorm, tanh and sigmoid
// layers with exact backpropagation, MSE / BCE losses with an L2 penalty,
// SGD and Adam, and a finite-difference gradient checker.
//
// Batches are row-major in the mathematical sense: one sample per row.
// Everything is double precision.

#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace spherewalk::nn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

enum class LayerKind { kDense, kBatchNorm, kTanh, kSigmoid };

std::string_view to_string(LayerKind kind);
LayerKind parse_layer_kind(std::string_view name);

struct LayerSpec {
  LayerKind kind = LayerKind::kDense;
  int in_dim = 0;
  int out_dim = 0;
  // batchnorm only
  double epsilon = 1e-5;
  double momentum = 0.9;

  static LayerSpec dense(int in_dim, int out_dim);
  static LayerSpec batchnorm(int dim, double epsilon = 1e-5, double momentum = 0.9);
  static LayerSpec tanh(int dim);
  static LayerSpec sigmoid(int dim);

  bool operator==(const LayerSpec&) const = default;
};

/// Throws SpecError unless every spec is well formed and the dims chain.
void validate_specs(std::span<const LayerSpec> specs);

enum class Mode { kTraining, kInference };

/// Parameters of one layer. Only the fields relevant to spec.kind are
/// populated: weight (out x in) and bias for dense, gamma / beta / running
/// statistics for batchnorm, nothing for activations.
struct Layer {
  LayerSpec spec;
  Matrix weight;
  Vector bias;
  Vector gamma;
  Vector beta;
  Vector running_mean;
  Vector running_var;
};

class MlpModel {
 public:
  MlpModel() = default;
  /// Validates specs and parameter shapes; throws SpecError on mismatch.
  explicit MlpModel(std::vector<Layer> layers, Mode mode = Mode::kInference);

  // Copies are distinct models as far as forward caches are concerned.
  MlpModel(const MlpModel& other);
  MlpModel& operator=(const MlpModel& other);
  MlpModel(MlpModel&&) noexcept = default;
  MlpModel& operator=(MlpModel&&) noexcept = default;

  const std::vector<Layer>& layers() const { return layers_; }
  /// Mutable access invalidates outstanding forward caches.
  std::vector<Layer>& mutable_layers() {
    ++revision_;
    return layers_;
  }

  Mode mode() const { return mode_; }
  void set_mode(Mode mode) { mode_ = mode; }

  bool empty() const { return layers_.empty(); }
  int input_dim() const;
  int output_dim() const;
  std::vector<LayerSpec> specs() const;
  std::size_t parameter_count() const;

  /// Sum of squared dense weights (biases and batchnorm affine excluded).
  double l2_penalty() const;

  /// Layers [begin, end) as an independent model in the same mode.
  MlpModel slice(std::size_t begin, std::size_t end) const;

  std::uint64_t uid() const { return uid_; }
  std::uint64_t revision() const { return revision_; }

  /// Bitwise equality of specs, mode and every parameter.
  bool identical_to(const MlpModel& other) const;

 private:
  void validate() const;

  std::vector<Layer> layers_;
  Mode mode_ = Mode::kInference;
  std::uint64_t uid_ = 0;
  std::uint64_t revision_ = 0;
};

/// Uniform Xavier weights (bound sqrt(6/(in+out))), zero biases, batchnorm
/// scale 1 / shift 0 / running mean 0 / running variance 1. Inference mode.
MlpModel init_model(std::span<const LayerSpec> specs, std::uint64_t seed);

struct LayerCache {
  Matrix input;
  Matrix output;
  // batchnorm
  Matrix normalized;
  Vector inv_std;
  Vector batch_mean;
  Vector batch_var;
};

struct ForwardCache {
  std::uint64_t model_uid = 0;
  std::uint64_t model_revision = 0;
  Mode mode = Mode::kInference;
  std::vector<LayerCache> layers;
};

struct ForwardResult {
  Matrix output;
  ForwardCache cache;
};

/// Forward pass in the model's current mode. Training-mode batchnorm uses
/// batch statistics (n >= 2 required) and does not touch running stats.
ForwardResult forward(const MlpModel& model, const Matrix& batch);

/// Forward without keeping a cache.
Matrix predict(const MlpModel& model, const Matrix& batch);

struct LayerGradients {
  Matrix weight;
  Vector bias;
  Vector gamma;
  Vector beta;
};

struct Gradients {
  std::vector<LayerGradients> layers;
  Matrix input;
};

/// Exact chain-rule gradients of a scalar loss given dLoss/dOutput.
/// Throws StaleCacheError when the cache belongs to another model or the
/// model was mutated after the forward pass.
Gradients backward(const MlpModel& model, const ForwardCache& cache,
                   const Matrix& grad_output);

enum class LossKind { kMse, kBce };

std::string_view to_string(LossKind kind);

inline constexpr double kBceClamp = 1e-12;

struct LossResult {
  double loss = 0.0;       // data term + l2 term
  double data_loss = 0.0;  // data term only
  Matrix grad_pred;        // d(data term)/d(pred)
};

/// MSE: (1/n) sum_i ||pred_i - target_i||^2.
/// BCE: (1/n) sum_i sum_k -[y log p + (1-y) log(1-p)], p clamped to
///      [1e-12, 1 - 1e-12].
/// Both add l2_lambda * model.l2_penalty() to `loss`.
LossResult loss_and_grad(LossKind kind, const Matrix& pred, const Matrix& target,
                         const MlpModel& model, double l2_lambda);

/// Data term only, no model needed.
LossResult data_loss(LossKind kind, const Matrix& pred, const Matrix& target);

enum class OptimizerKind { kSgd, kAdam };

std::string_view to_string(OptimizerKind kind);
OptimizerKind parse_optimizer_kind(std::string_view name);

struct TrainConfig {
  OptimizerKind optimizer = OptimizerKind::kAdam;
  double learning_rate = 1e-3;
  double l2_lambda = 0.0;
  int batch_size = 32;
  int epochs = 10;
  std::uint64_t seed = 0;

  /// Throws ValidationError when a field is out of range.
  void validate() const;
};

inline constexpr double kAdamBeta1 = 0.9;
inline constexpr double kAdamBeta2 = 0.999;
inline constexpr double kAdamEpsilon = 1e-8;

/// Resumable optimizer state. Moments are flattened in parameter order:
/// per layer weight (column-major storage order), bias, gamma, beta.
struct OptimizerState {
  OptimizerKind kind = OptimizerKind::kAdam;
  std::uint64_t step = 0;
  int epochs_done = 0;
  std::vector<double> first_moment;
  std::vector<double> second_moment;

  bool operator==(const OptimizerState&) const = default;
};

struct TrainResult {
  std::vector<double> loss_history;  // mean batch loss per epoch
};

/// Data-term loss over the rows of one minibatch. `rows` are the dataset
/// row indices that make up `pred`.
using BatchLossFn =
    std::function<LossResult(const Matrix& pred, std::span<const Index> rows)>;

/// Minibatch training with a caller-supplied loss. The L2 penalty from the
/// config is added on top. Shuffling for epoch e is seeded from
/// (config.seed, e), so a run resumed from `state` continues exactly.
/// A trailing minibatch of a single row is merged into the previous one so
/// batchnorm always sees n >= 2. Throws NumericError on a non-finite loss.
TrainResult train_with_loss(MlpModel& model, const Matrix& inputs,
                            const BatchLossFn& loss_fn, const TrainConfig& config,
                            OptimizerState* state = nullptr);

TrainResult train(MlpModel& model, const Matrix& inputs, const Matrix& targets,
                  LossKind kind, const TrainConfig& config,
                  OptimizerState* state = nullptr);

/// |a - b| / max(|a|, |b|, floor). The floor keeps round-off in
/// near-zero gradients from reading as a large relative error.
double relative_error(double analytic, double numeric, double floor = 1e-6);

struct GradCheckReport {
  double max_param_error = 0.0;
  double max_input_error = 0.0;
  std::size_t parameters_checked = 0;

  double max_error() const {
    return max_param_error > max_input_error ? max_param_error : max_input_error;
  }
};

/// Hook applied to backprop gradients before comparison; lets tests inject
/// a deliberately wrong backward pass.
using GradientTamper = std::function<void(Gradients&)>;

/// Compares backprop against central differences for every parameter and
/// every input entry. The loss is the data term of `kind` on `target`.
GradCheckReport gradient_check_report(const MlpModel& model, const Matrix& batch,
                                      const Matrix& target, LossKind kind,
                                      double eps = 1e-6,
                                      const GradientTamper& tamper = {});

/// Worst relative error over parameters and inputs.
double gradient_check(const MlpModel& model, const Matrix& batch,
                      const Matrix& target, LossKind kind, double eps = 1e-6);

}  // namespace spherewalk::nn
