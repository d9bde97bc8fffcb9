// Copyright 2026 The spherewalk Authors.
// SPDX-License-Identifier: Apache-2.0

#include "spherewalk/nn.hpp"

#include <atomic>
#include <cmath>
#include <cstring>
#include <numeric>
#include <sstream>
#include <utility>

#include "spherewalk/errors.hpp"
#include "spherewalk/rng.hpp"

namespace spherewalk::nn {
namespace {

std::uint64_t next_uid() {
  static std::atomic<std::uint64_t> counter{1};
  return counter.fetch_add(1, std::memory_order_relaxed);
}

bool same_bits(const Matrix& a, const Matrix& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() &&
         (a.size() == 0 ||
          std::memcmp(a.data(), b.data(), sizeof(double) * a.size()) == 0);
}

bool same_bits(const Vector& a, const Vector& b) {
  return a.size() == b.size() &&
         (a.size() == 0 ||
          std::memcmp(a.data(), b.data(), sizeof(double) * a.size()) == 0);
}

std::string dims(const Matrix& m) {
  std::ostringstream os;
  os << m.rows() << "x" << m.cols();
  return os.str();
}

bool all_finite(const Matrix& m) { return m.allFinite(); }

Matrix sigmoid(const Matrix& x) {
  return x.unaryExpr([](double v) {
    if (v >= 0.0) return 1.0 / (1.0 + std::exp(-v));
    const double e = std::exp(v);
    return e / (1.0 + e);
  });
}

bool has_batchnorm(const MlpModel& model) {
  for (const auto& layer : model.layers())
    if (layer.spec.kind == LayerKind::kBatchNorm) return true;
  return false;
}

// Runs the layers, optionally recording everything backward() needs.
Matrix run_forward(const MlpModel& model, const Matrix& batch, ForwardCache* cache) {
  if (model.empty()) throw SpecError("forward: model has no layers");
  if (batch.cols() != model.input_dim()) {
    throw ValidationError("forward: batch width " + std::to_string(batch.cols()) +
                          " does not match model input dim " +
                          std::to_string(model.input_dim()));
  }
  const bool training = model.mode() == Mode::kTraining;
  const Index n = batch.rows();
  if (n == 0) throw ValidationError("forward: empty batch");
  if (training && n < 2 && has_batchnorm(model)) {
    throw ValidationError("forward: training-mode batchnorm needs a batch of at least 2 rows");
  }

  if (cache != nullptr) {
    cache->model_uid = model.uid();
    cache->model_revision = model.revision();
    cache->mode = model.mode();
    cache->layers.assign(model.layers().size(), LayerCache{});
  }

  Matrix x = batch;
  for (std::size_t i = 0; i < model.layers().size(); ++i) {
    const Layer& layer = model.layers()[i];
    Matrix y;
    LayerCache* lc = cache != nullptr ? &cache->layers[i] : nullptr;
    switch (layer.spec.kind) {
      case LayerKind::kDense:
        y = x * layer.weight.transpose();
        y.rowwise() += layer.bias.transpose();
        break;
      case LayerKind::kBatchNorm: {
        Vector mean;
        Vector var;
        if (training) {
          mean = x.colwise().mean().transpose();
          const Matrix centered = x.rowwise() - mean.transpose();
          var = centered.array().square().colwise().mean().transpose();
        } else {
          mean = layer.running_mean;
          var = layer.running_var;
        }
        const Vector inv_std =
            (var.array() + layer.spec.epsilon).rsqrt().matrix();
        Matrix normalized = (x.rowwise() - mean.transpose()) * inv_std.asDiagonal();
        y = normalized * layer.gamma.asDiagonal();
        y.rowwise() += layer.beta.transpose();
        if (lc != nullptr) {
          lc->normalized = std::move(normalized);
          lc->inv_std = inv_std;
          lc->batch_mean = std::move(mean);
          lc->batch_var = std::move(var);
        }
        break;
      }
      case LayerKind::kTanh:
        y = x.array().tanh().matrix();
        break;
      case LayerKind::kSigmoid:
        y = sigmoid(x);
        break;
    }
    if (lc != nullptr) {
      lc->input = std::move(x);
      lc->output = y;
    }
    x = std::move(y);
  }
  return x;
}

struct ParamSlot {
  double* values;
  const double* grads;
  std::size_t size;
  bool is_weight;
};

std::vector<ParamSlot> param_slots(MlpModel& model, const Gradients* grads) {
  std::vector<ParamSlot> slots;
  auto& layers = model.mutable_layers();
  for (std::size_t i = 0; i < layers.size(); ++i) {
    Layer& l = layers[i];
    const LayerGradients* g = grads != nullptr ? &grads->layers[i] : nullptr;
    auto add = [&](auto& p, const auto* gp, bool w) {
      if (p.size() == 0) return;
      slots.push_back({p.data(), gp != nullptr ? gp->data() : nullptr,
                       static_cast<std::size_t>(p.size()), w});
    };
    add(l.weight, g != nullptr ? &g->weight : nullptr, true);
    add(l.bias, g != nullptr ? &g->bias : nullptr, false);
    add(l.gamma, g != nullptr ? &g->gamma : nullptr, false);
    add(l.beta, g != nullptr ? &g->beta : nullptr, false);
  }
  return slots;
}

}  // namespace

std::string_view to_string(LayerKind kind) {
  switch (kind) {
    case LayerKind::kDense: return "dense";
    case LayerKind::kBatchNorm: return "batchnorm";
    case LayerKind::kTanh: return "tanh";
    case LayerKind::kSigmoid: return "sigmoid";
  }
  return "unknown";
}

LayerKind parse_layer_kind(std::string_view name) {
  if (name == "dense") return LayerKind::kDense;
  if (name == "batchnorm") return LayerKind::kBatchNorm;
  if (name == "tanh") return LayerKind::kTanh;
  if (name == "sigmoid") return LayerKind::kSigmoid;
  throw SpecError("unknown layer kind '" + std::string(name) + "'");
}

LayerSpec LayerSpec::dense(int in_dim, int out_dim) {
  return {LayerKind::kDense, in_dim, out_dim};
}
LayerSpec LayerSpec::batchnorm(int dim, double epsilon, double momentum) {
  return {LayerKind::kBatchNorm, dim, dim, epsilon, momentum};
}
LayerSpec LayerSpec::tanh(int dim) { return {LayerKind::kTanh, dim, dim}; }
LayerSpec LayerSpec::sigmoid(int dim) { return {LayerKind::kSigmoid, dim, dim}; }

void validate_specs(std::span<const LayerSpec> specs) {
  if (specs.empty()) throw SpecError("layer list is empty");
  for (std::size_t i = 0; i < specs.size(); ++i) {
    const LayerSpec& s = specs[i];
    const std::string where = "layer " + std::to_string(i) + " (" +
                              std::string(to_string(s.kind)) + ")";
    if (s.in_dim <= 0 || s.out_dim <= 0) throw SpecError(where + ": dims must be positive");
    if (s.kind != LayerKind::kDense && s.in_dim != s.out_dim) {
      throw SpecError(where + ": in_dim must equal out_dim");
    }
    if (s.kind == LayerKind::kBatchNorm) {
      if (!(s.epsilon > 0.0)) throw SpecError(where + ": epsilon must be > 0");
      if (!(s.momentum > 0.0 && s.momentum < 1.0)) {
        throw SpecError(where + ": momentum must lie in (0, 1)");
      }
    }
    if (i > 0 && specs[i - 1].out_dim != s.in_dim) {
      throw SpecError("dimension chain broken between layer " + std::to_string(i - 1) +
                      " (out " + std::to_string(specs[i - 1].out_dim) + ") and layer " +
                      std::to_string(i) + " (in " + std::to_string(s.in_dim) + ")");
    }
  }
}

MlpModel::MlpModel(std::vector<Layer> layers, Mode mode)
    : layers_(std::move(layers)), mode_(mode), uid_(next_uid()) {
  validate();
}

MlpModel::MlpModel(const MlpModel& other)
    : layers_(other.layers_), mode_(other.mode_), uid_(next_uid()), revision_(0) {}

MlpModel& MlpModel::operator=(const MlpModel& other) {
  if (this != &other) {
    layers_ = other.layers_;
    mode_ = other.mode_;
    uid_ = next_uid();
    revision_ = 0;
  }
  return *this;
}

void MlpModel::validate() const {
  const auto s = specs();
  validate_specs(s);
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const Layer& l = layers_[i];
    const std::string where = "layer " + std::to_string(i);
    switch (l.spec.kind) {
      case LayerKind::kDense:
        if (l.weight.rows() != l.spec.out_dim || l.weight.cols() != l.spec.in_dim ||
            l.bias.size() != l.spec.out_dim) {
          throw SpecError(where + ": dense weight " + dims(l.weight) +
                          " / bias does not match spec");
        }
        break;
      case LayerKind::kBatchNorm: {
        const Index d = l.spec.in_dim;
        if (l.gamma.size() != d || l.beta.size() != d || l.running_mean.size() != d ||
            l.running_var.size() != d) {
          throw SpecError(where + ": batchnorm state does not match spec");
        }
        if ((l.running_var.array() < 0.0).any()) {
          throw SpecError(where + ": negative running variance");
        }
        break;
      }
      case LayerKind::kTanh:
      case LayerKind::kSigmoid:
        break;
    }
  }
}

int MlpModel::input_dim() const { return layers_.empty() ? 0 : layers_.front().spec.in_dim; }
int MlpModel::output_dim() const { return layers_.empty() ? 0 : layers_.back().spec.out_dim; }

std::vector<LayerSpec> MlpModel::specs() const {
  std::vector<LayerSpec> out;
  out.reserve(layers_.size());
  for (const auto& l : layers_) out.push_back(l.spec);
  return out;
}

std::size_t MlpModel::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers_) {
    n += static_cast<std::size_t>(l.weight.size() + l.bias.size() + l.gamma.size() +
                                  l.beta.size());
  }
  return n;
}

double MlpModel::l2_penalty() const {
  double sum = 0.0;
  for (const auto& l : layers_)
    if (l.spec.kind == LayerKind::kDense) sum += l.weight.squaredNorm();
  return sum;
}

MlpModel MlpModel::slice(std::size_t begin, std::size_t end) const {
  if (begin >= end || end > layers_.size()) throw SpecError("slice: bad layer range");
  return MlpModel(std::vector<Layer>(layers_.begin() + static_cast<std::ptrdiff_t>(begin),
                                     layers_.begin() + static_cast<std::ptrdiff_t>(end)),
                  mode_);
}

bool MlpModel::identical_to(const MlpModel& other) const {
  if (mode_ != other.mode_ || layers_.size() != other.layers_.size()) return false;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const Layer& a = layers_[i];
    const Layer& b = other.layers_[i];
    if (!(a.spec == b.spec)) return false;
    if (!same_bits(a.weight, b.weight) || !same_bits(a.bias, b.bias) ||
        !same_bits(a.gamma, b.gamma) || !same_bits(a.beta, b.beta) ||
        !same_bits(a.running_mean, b.running_mean) ||
        !same_bits(a.running_var, b.running_var)) {
      return false;
    }
  }
  return true;
}

MlpModel init_model(std::span<const LayerSpec> specs, std::uint64_t seed) {
  validate_specs(specs);
  Rng rng(seed);
  std::vector<Layer> layers;
  layers.reserve(specs.size());
  for (const LayerSpec& s : specs) {
    Layer l;
    l.spec = s;
    if (s.kind == LayerKind::kDense) {
      const double bound = std::sqrt(6.0 / static_cast<double>(s.in_dim + s.out_dim));
      l.weight.resize(s.out_dim, s.in_dim);
      for (int r = 0; r < s.out_dim; ++r)
        for (int c = 0; c < s.in_dim; ++c) l.weight(r, c) = rng.uniform(-bound, bound);
      l.bias = Vector::Zero(s.out_dim);
    } else if (s.kind == LayerKind::kBatchNorm) {
      l.gamma = Vector::Ones(s.in_dim);
      l.beta = Vector::Zero(s.in_dim);
      l.running_mean = Vector::Zero(s.in_dim);
      l.running_var = Vector::Ones(s.in_dim);
    }
    layers.push_back(std::move(l));
  }
  return MlpModel(std::move(layers), Mode::kInference);
}

ForwardResult forward(const MlpModel& model, const Matrix& batch) {
  ForwardResult result;
  result.output = run_forward(model, batch, &result.cache);
  return result;
}

Matrix predict(const MlpModel& model, const Matrix& batch) {
  return run_forward(model, batch, nullptr);
}

Gradients backward(const MlpModel& model, const ForwardCache& cache,
                   const Matrix& grad_output) {
  if (cache.model_uid != model.uid() || cache.model_revision != model.revision() ||
      cache.mode != model.mode() || cache.layers.size() != model.layers().size()) {
    throw StaleCacheError("backward: forward cache does not belong to this model state");
  }
  const Matrix& last = cache.layers.back().output;
  if (grad_output.rows() != last.rows() || grad_output.cols() != last.cols()) {
    throw ValidationError("backward: gradient shape " + dims(grad_output) +
                          " does not match output " + dims(last));
  }
  const bool training = cache.mode == Mode::kTraining;

  Gradients grads;
  grads.layers.resize(model.layers().size());
  Matrix g = grad_output;
  for (std::size_t idx = model.layers().size(); idx-- > 0;) {
    const Layer& layer = model.layers()[idx];
    const LayerCache& lc = cache.layers[idx];
    LayerGradients& lg = grads.layers[idx];
    switch (layer.spec.kind) {
      case LayerKind::kDense:
        lg.weight = g.transpose() * lc.input;
        lg.bias = g.colwise().sum().transpose();
        g = g * layer.weight;
        break;
      case LayerKind::kBatchNorm: {
        lg.gamma = (g.array() * lc.normalized.array()).colwise().sum().transpose();
        lg.beta = g.colwise().sum().transpose();
        const Matrix dnorm = g * layer.gamma.asDiagonal();
        if (training) {
          const double n = static_cast<double>(g.rows());
          const Eigen::RowVectorXd sum_d = dnorm.colwise().sum();
          const Eigen::RowVectorXd sum_dx =
              (dnorm.array() * lc.normalized.array()).colwise().sum();
          Matrix dx = n * dnorm;
          dx.rowwise() -= sum_d;
          dx -= (lc.normalized.array().rowwise() * sum_dx.array()).matrix();
          g = dx * (lc.inv_std / n).asDiagonal();
        } else {
          g = dnorm * lc.inv_std.asDiagonal();
        }
        break;
      }
      case LayerKind::kTanh:
        g = (g.array() * (1.0 - lc.output.array().square())).matrix();
        break;
      case LayerKind::kSigmoid:
        g = (g.array() * lc.output.array() * (1.0 - lc.output.array())).matrix();
        break;
    }
  }
  grads.input = std::move(g);
  return grads;
}

std::string_view to_string(LossKind kind) {
  return kind == LossKind::kMse ? "mse" : "bce";
}

LossResult data_loss(LossKind kind, const Matrix& pred, const Matrix& target) {
  if (pred.rows() != target.rows() || pred.cols() != target.cols()) {
    throw ValidationError("loss: prediction " + dims(pred) + " and target " +
                          dims(target) + " differ in shape");
  }
  if (pred.rows() == 0) throw ValidationError("loss: empty batch");
  const double n = static_cast<double>(pred.rows());
  LossResult r;
  if (kind == LossKind::kMse) {
    const Matrix diff = pred - target;
    r.data_loss = diff.squaredNorm() / n;
    r.grad_pred = (2.0 / n) * diff;
  } else {
    if ((target.array() < 0.0).any() || (target.array() > 1.0).any()) {
      throw ValidationError("loss: bce targets must lie in [0, 1]");
    }
    const Matrix p = pred.array().max(kBceClamp).min(1.0 - kBceClamp).matrix();
    const auto y = target.array();
    r.data_loss = -(y * p.array().log() + (1.0 - y) * (1.0 - p.array()).log()).sum() / n;
    r.grad_pred = ((p.array() - y) / (p.array() * (1.0 - p.array())) / n).matrix();
  }
  r.loss = r.data_loss;
  return r;
}

LossResult loss_and_grad(LossKind kind, const Matrix& pred, const Matrix& target,
                         const MlpModel& model, double l2_lambda) {
  if (l2_lambda < 0.0) throw ValidationError("loss: l2_lambda must be >= 0");
  LossResult r = data_loss(kind, pred, target);
  r.loss = r.data_loss + l2_lambda * model.l2_penalty();
  return r;
}

std::string_view to_string(OptimizerKind kind) {
  return kind == OptimizerKind::kSgd ? "sgd" : "adam";
}

OptimizerKind parse_optimizer_kind(std::string_view name) {
  if (name == "sgd") return OptimizerKind::kSgd;
  if (name == "adam") return OptimizerKind::kAdam;
  throw ValidationError("unknown optimizer '" + std::string(name) + "'");
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw ValidationError("train config: learning_rate must be a positive real");
  }
  if (!(l2_lambda >= 0.0) || !std::isfinite(l2_lambda)) {
    throw ValidationError("train config: l2_lambda must be >= 0");
  }
  if (batch_size <= 0) throw ValidationError("train config: batch_size must be positive");
  if (epochs <= 0) throw ValidationError("train config: epochs must be positive");
}

TrainResult train_with_loss(MlpModel& model, const Matrix& inputs,
                            const BatchLossFn& loss_fn, const TrainConfig& config,
                            OptimizerState* state) {
  config.validate();
  const Index n = inputs.rows();
  if (n == 0) throw ValidationError("train: empty dataset");
  if (inputs.cols() != model.input_dim()) {
    throw ValidationError("train: input width does not match model");
  }

  OptimizerState local;
  OptimizerState& st = state != nullptr ? *state : local;
  const std::size_t count = model.parameter_count();
  if (st.step == 0 && st.epochs_done == 0) st.kind = config.optimizer;
  if (st.kind != config.optimizer) {
    throw ValidationError("train: optimizer state kind does not match config");
  }
  if (config.optimizer == OptimizerKind::kAdam) {
    if (st.first_moment.empty() && st.second_moment.empty()) {
      st.first_moment.assign(count, 0.0);
      st.second_moment.assign(count, 0.0);
    }
    if (st.first_moment.size() != count || st.second_moment.size() != count) {
      throw ValidationError("train: optimizer state size does not match model");
    }
  }

  const double lambda = config.l2_lambda;
  const auto bs = static_cast<Index>(config.batch_size);
  std::vector<std::pair<Index, Index>> batches;  // [begin, end) into order
  for (Index b = 0; b < n; b += bs) batches.emplace_back(b, std::min(n, b + bs));
  if (batches.size() > 1 && batches.back().second - batches.back().first == 1) {
    batches[batches.size() - 2].second = n;
    batches.pop_back();
  }

  TrainResult result;
  model.set_mode(Mode::kTraining);
  std::vector<Index> order(static_cast<std::size_t>(n));
  for (int e = 0; e < config.epochs; ++e) {
    const int epoch = st.epochs_done;
    std::iota(order.begin(), order.end(), Index{0});
    Rng rng(mix_seed(config.seed, static_cast<std::uint64_t>(epoch)));
    rng.shuffle(std::span<Index>(order));

    double epoch_loss = 0.0;
    for (std::size_t bi = 0; bi < batches.size(); ++bi) {
      const auto [begin, end] = batches[bi];
      std::span<const Index> rows(order.data() + begin, static_cast<std::size_t>(end - begin));
      Matrix xb(end - begin, inputs.cols());
      for (Index r = 0; r < xb.rows(); ++r) xb.row(r) = inputs.row(rows[static_cast<std::size_t>(r)]);

      ForwardResult fr = forward(model, xb);
      LossResult lr = loss_fn(fr.output, rows);
      const double total = lr.data_loss + lambda * model.l2_penalty();
      if (!std::isfinite(total) || !all_finite(lr.grad_pred)) {
        model.set_mode(Mode::kInference);
        throw NumericError("train: non-finite loss at epoch " + std::to_string(epoch) +
                           ", batch " + std::to_string(bi));
      }
      Gradients grads = backward(model, fr.cache, lr.grad_pred);
      if (lambda > 0.0) {
        for (std::size_t i = 0; i < grads.layers.size(); ++i) {
          if (model.layers()[i].spec.kind == LayerKind::kDense) {
            grads.layers[i].weight += (2.0 * lambda) * model.layers()[i].weight;
          }
        }
      }

      auto slots = param_slots(model, &grads);
      if (config.optimizer == OptimizerKind::kSgd) {
        for (const auto& s : slots)
          for (std::size_t k = 0; k < s.size; ++k) s.values[k] -= config.learning_rate * s.grads[k];
      } else {
        ++st.step;
        const double t = static_cast<double>(st.step);
        const double c1 = 1.0 - std::pow(kAdamBeta1, t);
        const double c2 = 1.0 - std::pow(kAdamBeta2, t);
        std::size_t offset = 0;
        for (const auto& s : slots) {
          for (std::size_t k = 0; k < s.size; ++k, ++offset) {
            const double g = s.grads[k];
            double& m = st.first_moment[offset];
            double& v = st.second_moment[offset];
            m = kAdamBeta1 * m + (1.0 - kAdamBeta1) * g;
            v = kAdamBeta2 * v + (1.0 - kAdamBeta2) * g * g;
            const double mhat = m / c1;
            const double vhat = v / c2;
            s.values[k] -= config.learning_rate * mhat / (std::sqrt(vhat) + kAdamEpsilon);
          }
        }
      }

      // Running batchnorm statistics, unbiased variance.
      auto& layers = model.mutable_layers();
      const double nb = static_cast<double>(xb.rows());
      for (std::size_t i = 0; i < layers.size(); ++i) {
        Layer& l = layers[i];
        if (l.spec.kind != LayerKind::kBatchNorm) continue;
        const double mom = l.spec.momentum;
        const LayerCache& lc = fr.cache.layers[i];
        l.running_mean = mom * l.running_mean + (1.0 - mom) * lc.batch_mean;
        l.running_var = mom * l.running_var + (1.0 - mom) * (nb / (nb - 1.0)) * lc.batch_var;
      }
      epoch_loss += total;
    }
    result.loss_history.push_back(epoch_loss / static_cast<double>(batches.size()));
    ++st.epochs_done;
  }
  model.set_mode(Mode::kInference);
  return result;
}

TrainResult train(MlpModel& model, const Matrix& inputs, const Matrix& targets,
                  LossKind kind, const TrainConfig& config, OptimizerState* state) {
  if (inputs.rows() != targets.rows()) {
    throw ValidationError("train: inputs and targets differ in row count");
  }
  if (targets.cols() != model.output_dim()) {
    throw ValidationError("train: target width does not match model output");
  }
  auto loss_fn = [&](const Matrix& pred, std::span<const Index> rows) {
    Matrix tb(pred.rows(), targets.cols());
    for (Index r = 0; r < tb.rows(); ++r) tb.row(r) = targets.row(rows[static_cast<std::size_t>(r)]);
    return data_loss(kind, pred, tb);
  };
  return train_with_loss(model, inputs, loss_fn, config, state);
}

double relative_error(double analytic, double numeric, double floor) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), floor});
  return std::abs(analytic - numeric) / denom;
}

GradCheckReport gradient_check_report(const MlpModel& model, const Matrix& batch,
                                      const Matrix& target, LossKind kind, double eps,
                                      const GradientTamper& tamper) {
  if (!(eps > 0.0)) throw ValidationError("gradient_check: eps must be positive");
  MlpModel work = model;
  ForwardResult fr = forward(work, batch);
  LossResult lr = data_loss(kind, fr.output, target);
  Gradients grads = backward(work, fr.cache, lr.grad_pred);
  if (tamper) tamper(grads);

  auto loss_at = [&](const Matrix& x) {
    return data_loss(kind, predict(work, x), target).data_loss;
  };

  GradCheckReport report;
  for (const auto& slot : param_slots(work, &grads)) {
    for (std::size_t k = 0; k < slot.size; ++k) {
      const double saved = slot.values[k];
      slot.values[k] = saved + eps;
      const double up = loss_at(batch);
      slot.values[k] = saved - eps;
      const double down = loss_at(batch);
      slot.values[k] = saved;
      const double numeric = (up - down) / (2.0 * eps);
      report.max_param_error =
          std::max(report.max_param_error, relative_error(slot.grads[k], numeric));
      ++report.parameters_checked;
    }
  }

  Matrix x = batch;
  for (Index r = 0; r < x.rows(); ++r) {
    for (Index c = 0; c < x.cols(); ++c) {
      const double saved = x(r, c);
      x(r, c) = saved + eps;
      const double up = loss_at(x);
      x(r, c) = saved - eps;
      const double down = loss_at(x);
      x(r, c) = saved;
      const double numeric = (up - down) / (2.0 * eps);
      report.max_input_error =
          std::max(report.max_input_error, relative_error(grads.input(r, c), numeric));
    }
  }
  return report;
}

double gradient_check(const MlpModel& model, const Matrix& batch, const Matrix& target,
                      LossKind kind, double eps) {
  return gradient_check_report(model, batch, target, kind, eps).max_error();
}

}  // namespace spherewalk::nn
