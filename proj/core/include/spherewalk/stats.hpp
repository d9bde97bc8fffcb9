// Copyright 2026 The spherewalk Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <vector>

namespace spherewalk::stats {

double mean(std::span<const double> xs);
/// Sample standard deviation (n - 1 denominator).
double stddev(std::span<const double> xs);
double standard_error(std::span<const double> xs);

/// Ranks starting at 1; ties get the average of their positions.
std::vector<double> ranks(std::span<const double> xs);

/// Pearson correlation of the ranks. Returns 0 if either side is constant.
double spearman(std::span<const double> a, std::span<const double> b);

}  // namespace spherewalk::stats
