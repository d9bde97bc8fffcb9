// Copyright 2026 The spherewalk Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include "spherewalk/nn.hpp"

namespace spherewalk {

inline constexpr int kCheckpointFormatVersion = 1;

/// A model plus the metadata the pipeline stores next to it.
///
/// On disk this is one JSON document:
///
///   {
///     "format_version": 1,
///     "role": "mapping" | "classifier" | "ae_encoder" | ...,
///     "attribute": "<name>",            (classifiers only)
///     "mode": "training" | "inference",
///     "specs":  [{"kind", "in_dim", "out_dim", "epsilon"?, "momentum"?}, ...],
///     "layers": [{"weight": [...], "bias": [...]}            dense,
///                {"gamma", "beta", "running_mean", "running_var"}  batchnorm,
///                {}                                          activations],
///     "metrics": {"<name>": <number>, ...},
///     "optimizer_state": {"kind", "step", "epochs_done",
///                         "first_moment", "second_moment"}   (optional)
///   }
///
/// Weights are written row-major (weight[r * in_dim + c]). Numbers use the
/// shortest decimal form that reads back to the identical double, so a
/// save -> load -> save cycle is byte-identical.
struct Checkpoint {
  nn::MlpModel model;
  std::string role;
  std::string attribute;
  std::map<std::string, double> metrics;
  std::optional<nn::OptimizerState> optimizer;
};

std::string serialize_checkpoint(const Checkpoint& checkpoint);
/// Throws FormatError on malformed content or a version mismatch.
Checkpoint parse_checkpoint(const std::string& text);

void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

void save_model(const nn::MlpModel& model, const std::filesystem::path& path);
nn::MlpModel load_model(const std::filesystem::path& path);

}  // namespace spherewalk
