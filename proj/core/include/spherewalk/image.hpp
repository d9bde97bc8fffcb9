// Copyright 2026 The spherewalk Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace spherewalk {

/// Grayscale image, row-major, values in [0, 1] (0 black, 1 white).
struct GlyphImage {
  int width = 0;
  int height = 0;
  std::vector<double> pixels;

  GlyphImage() = default;
  GlyphImage(int w, int h, double fill = 1.0)
      : width(w), height(h), pixels(static_cast<std::size_t>(w) * h, fill) {}

  double at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
  double& at(int x, int y) { return pixels[static_cast<std::size_t>(y) * width + x]; }

  bool operator==(const GlyphImage&) const = default;
};

/// Plain PGM: "P2", width height, maxval 255, one image row per line,
/// pixel = round(value * 255) clamped to [0, 255].
std::string encode_pgm(const GlyphImage& image);
/// Accepts P2 with any maxval <= 65535 and '#' comments; rescales to [0, 1].
GlyphImage decode_pgm(const std::string& text);

void write_pgm(const GlyphImage& image, const std::filesystem::path& path);
GlyphImage read_pgm(const std::filesystem::path& path);

/// Tiles equally sized images into rows, separated by `gap` white pixels.
/// Short rows are padded with white.
GlyphImage make_grid(std::span<const std::vector<GlyphImage>> rows, int gap = 1);

}  // namespace spherewalk
