// Copyright 2026 The spherewalk Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "spherewalk/sphere.hpp"

namespace spherewalk {

/// Unit latent vectors with binary labels for one or more attributes.
/// labels[i][a] is the label of vectors[i] for attributes[a].
struct EmbeddingDataset {
  int dim = 0;
  std::vector<std::string> attributes;
  std::vector<std::string> ids;
  std::vector<sphere::LatentVector> vectors;
  std::vector<std::vector<int>> labels;

  std::size_t size() const { return vectors.size(); }
  /// Throws ValidationError for an unknown attribute.
  std::size_t attribute_index(std::string_view name) const;
  /// Checks dims, label shape and label values.
  void validate() const;
};

inline constexpr int kEmbeddingFormatVersion = 1;
/// import_embeddings rejects vectors whose norm is further than this from 1.
inline constexpr double kEmbeddingNormTolerance = 1e-3;

/// JSON-lines document. First line is the header
///   {"format_version":1,"d":<d>,"attributes":["smile",...]}
/// and each following line one record
///   {"id":"<id>","vector":[d numbers],"attrs":{"smile":0|1,...}}.
std::string serialize_embeddings(const EmbeddingDataset& data);

/// Validates every record (dimension, norm, binary labels, all header
/// attributes present) and normalizes vectors. Errors name the 1-based line.
EmbeddingDataset parse_embeddings(const std::string& text);

void export_embeddings(const EmbeddingDataset& data, const std::filesystem::path& path);
EmbeddingDataset import_embeddings(const std::filesystem::path& path);

}  // namespace spherewalk
