// Copyright 2026 The spherewalk Authors.
// SPDX-License-Identifier: Apache-2.0

#include "spherewalk/image.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>

#include "spherewalk/errors.hpp"
#include "spherewalk/io.hpp"

namespace spherewalk {
namespace {

// Next whitespace-delimited token, skipping '#' comments.
bool next_token(std::istream& in, std::string& tok) {
  tok.clear();
  char c = 0;
  while (in.get(c)) {
    if (c == '#') {
      std::string rest;
      std::getline(in, rest);
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c)) != 0) {
      if (!tok.empty()) return true;
      continue;
    }
    tok.push_back(c);
  }
  return !tok.empty();
}

int parse_int(std::istream& in, const char* what) {
  std::string tok;
  if (!next_token(in, tok)) throw FormatError(std::string("pgm: missing ") + what);
  std::size_t used = 0;
  int v = 0;
  try {
    v = std::stoi(tok, &used);
  } catch (const std::exception&) {
    throw FormatError(std::string("pgm: bad ") + what + " '" + tok + "'");
  }
  if (used != tok.size()) throw FormatError(std::string("pgm: bad ") + what + " '" + tok + "'");
  return v;
}

}  // namespace

std::string encode_pgm(const GlyphImage& image) {
  std::ostringstream os;
  os << "P2\n" << image.width << " " << image.height << "\n255\n";
  for (int y = 0; y < image.height; ++y) {
    for (int x = 0; x < image.width; ++x) {
      const double v = std::clamp(image.at(x, y), 0.0, 1.0);
      if (x > 0) os << ' ';
      os << static_cast<int>(std::lround(v * 255.0));
    }
    os << '\n';
  }
  return os.str();
}

GlyphImage decode_pgm(const std::string& text) {
  std::istringstream in(text);
  std::string magic;
  if (!next_token(in, magic) || magic != "P2") throw FormatError("pgm: expected P2 magic");
  const int w = parse_int(in, "width");
  const int h = parse_int(in, "height");
  const int maxval = parse_int(in, "maxval");
  if (w <= 0 || h <= 0) throw FormatError("pgm: non-positive size");
  if (maxval <= 0 || maxval > 65535) throw FormatError("pgm: maxval out of range");
  GlyphImage img(w, h);
  for (auto& p : img.pixels) {
    const int v = parse_int(in, "pixel");
    if (v < 0 || v > maxval) throw FormatError("pgm: pixel value out of range");
    p = static_cast<double>(v) / maxval;
  }
  std::string extra;
  if (next_token(in, extra)) throw FormatError("pgm: trailing data");
  return img;
}

void write_pgm(const GlyphImage& image, const std::filesystem::path& path) {
  write_file(path, encode_pgm(image));
}

GlyphImage read_pgm(const std::filesystem::path& path) {
  return decode_pgm(read_file(path));
}

GlyphImage make_grid(std::span<const std::vector<GlyphImage>> rows, int gap) {
  if (rows.empty()) throw ValidationError("make_grid: no rows");
  int tw = 0, th = 0;
  std::size_t cols = 0;
  for (const auto& row : rows) {
    cols = std::max(cols, row.size());
    for (const auto& img : row) {
      if (tw == 0) {
        tw = img.width;
        th = img.height;
      } else if (img.width != tw || img.height != th) {
        throw ValidationError("make_grid: images differ in size");
      }
    }
  }
  if (cols == 0) throw ValidationError("make_grid: no images");
  const int n = static_cast<int>(cols);
  const int nr = static_cast<int>(rows.size());
  GlyphImage grid(n * tw + (n - 1) * gap, nr * th + (nr - 1) * gap, 1.0);
  for (int r = 0; r < nr; ++r) {
    const auto& row = rows[static_cast<std::size_t>(r)];
    for (std::size_t c = 0; c < row.size(); ++c) {
      const int ox = static_cast<int>(c) * (tw + gap);
      const int oy = r * (th + gap);
      for (int y = 0; y < th; ++y)
        for (int x = 0; x < tw; ++x) grid.at(ox + x, oy + y) = row[c].at(x, y);
    }
  }
  return grid;
}

}  // namespace spherewalk
