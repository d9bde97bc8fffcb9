// Copyright 2026 The spherewalk Authors.
// SPDX-License-Identifier: Apache-2.0

#include "spherewalk/split.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "spherewalk/errors.hpp"
#include "spherewalk/rng.hpp"

namespace spherewalk {

Split make_split(Eigen::Index n, std::uint64_t seed, double holdout_fraction) {
  if (n < 0) throw ValidationError("make_split: negative size");
  if (!(holdout_fraction >= 0.0 && holdout_fraction < 1.0)) {
    throw ValidationError("make_split: holdout fraction must lie in [0, 1)");
  }
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  Rng rng(seed);
  rng.shuffle(std::span<Eigen::Index>(order));

  auto held = static_cast<std::size_t>(std::llround(static_cast<double>(n) * holdout_fraction));
  if (holdout_fraction > 0.0 && n >= 2 && held == 0) held = 1;
  Split s;
  s.heldout.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(held));
  s.train.assign(order.begin() + static_cast<std::ptrdiff_t>(held), order.end());
  std::sort(s.heldout.begin(), s.heldout.end());
  std::sort(s.train.begin(), s.train.end());
  return s;
}

Eigen::MatrixXd gather_rows(const Eigen::MatrixXd& m, std::span<const Eigen::Index> rows) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] < 0 || rows[i] >= m.rows()) throw ValidationError("gather_rows: index out of range");
    out.row(static_cast<Eigen::Index>(i)) = m.row(rows[i]);
  }
  return out;
}

}  // namespace spherewalk
