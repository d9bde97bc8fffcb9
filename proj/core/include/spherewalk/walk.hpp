// Copyright 2026 The spherewalk Authors.
// SPDX-License-Identifier: Apache-2.0

// Classifier-guided walk on the sphere. Each iteration takes a plain
// gradient step on the cross-entropy loss, renormalizes, and picks the step
// length so that the move covers exactly `step_arc` radians.

#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "spherewalk/nn.hpp"
#include "spherewalk/sphere.hpp"

namespace spherewalk::walk {

enum class Termination { kCompleted, kStopLoss, kVanishedGradient };

std::string_view to_string(Termination t);
Termination parse_termination(std::string_view name);

struct WalkConfig {
  int target = 1;             // label the walk moves toward
  double step_arc = 0.005;    // radians per iteration
  int iterations = 500;
  int snapshot_every = 50;
  double stop_loss = 1e-3;    // 0 disables early stopping
  double grad_floor = 1e-12;

  void validate() const;
};

struct Trajectory {
  int dim = 0;
  double step_arc = 0.0;
  int target = 1;
  /// z0, every snapshot_every-th iterate, and the final iterate.
  std::vector<sphere::LatentVector> snapshots;
  std::vector<int> snapshot_iterations;
  double initial_loss = 0.0;
  std::vector<double> losses;  // loss after each executed iteration
  std::vector<double> steps;   // realized geodesic step of each iteration
  Termination reason = Termination::kCompleted;
  std::string diagnostic;

  int iterations() const { return static_cast<int>(losses.size()); }
  const sphere::LatentVector& final_latent() const { return snapshots.back(); }
};

inline constexpr int kMaxBracketDoublings = 50;
inline constexpr int kMaxBisections = 50;
inline constexpr double kArcTolerance = 1e-4;  // relative to step_arc

struct ArcStep {
  bool ok = false;
  double eta = 0.0;
  double arc = 0.0;
  sphere::LatentVector next;
};

/// Finds eta with geodesic_distance(z, normalize(z - eta g)) = arc to
/// within 1e-4 * arc: doubling to bracket, then bisection. `ok` is false
/// when the renormalized update cannot reach the requested arc.
ArcStep constant_arc_step(const sphere::LatentVector& z, const Eigen::VectorXd& g, double arc);

/// Throws ValidationError for a bad config or dimension mismatch and
/// NumericError when the gradient turns non-finite.
Trajectory semantic_walk(const nn::MlpModel& classifier, const sphere::LatentVector& z0,
                         const WalkConfig& config);

inline constexpr int kTrajectoryFormatVersion = 1;

/// JSON document {format_version, d, delta, y, snapshots, snapshot_iterations,
/// initial_loss, losses, steps, reason, diagnostic}.
std::string serialize_trajectory(const Trajectory& t);
/// expected_dim = 0 accepts any dimension.
Trajectory parse_trajectory(const std::string& text, int expected_dim = 0);

void export_trajectory(const Trajectory& t, const std::filesystem::path& path);
Trajectory import_trajectory(const std::filesystem::path& path, int expected_dim = 0);

}  // namespace spherewalk::walk
