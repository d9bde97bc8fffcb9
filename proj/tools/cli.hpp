// Copyright 2026 The spherewalk Authors.
// SPDX-License-Identifier: Apache-2.0

// The spherewalk command line: prepare a toy workspace, train the mapping
// and the attribute classifiers, then walk, interpolate, average and do
// arithmetic through the encode / map / decode circle.
//
// Workspace layout:
//   dataset.json                 sampling seed, size, split, medians, params
//   embeddings.jsonl             sphere embeddings with median-split labels
//   models/ae_encoder.json       pixels -> decoder latent
//   models/decoder.json          decoder latent -> pixels
//   models/sphere_encoder.json   pixels -> raw head (normalized on use)
//   models/mapping.json          sphere latent -> decoder latent
//   models/classifier_<a>.json   one per attribute
//   reports/*.tsv                metric tables
//   manifests/<command>.json     resolved config, artifact hashes, timings
//
// Exit codes: 0 success, 1 validation failure, 2 numeric failure.

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace spherewalk::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitNumeric = 2;

/// args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int run(int argc, const char* const* argv);

}  // namespace spherewalk::cli
