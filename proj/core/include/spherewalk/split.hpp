// Copyright 2026 The spherewalk Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <vector>

namespace spherewalk {

/// Disjoint train / held-out row indices, each sorted ascending.
struct Split {
  std::vector<Eigen::Index> train;
  std::vector<Eigen::Index> heldout;
};

/// Seeded shuffle of [0, n), first round(n * holdout_fraction) rows held
/// out (at least one when n >= 2).
Split make_split(Eigen::Index n, std::uint64_t seed, double holdout_fraction = 0.1);

/// Rows of `m` at `rows`, in that order.
Eigen::MatrixXd gather_rows(const Eigen::MatrixXd& m, std::span<const Eigen::Index> rows);

}  // namespace spherewalk
