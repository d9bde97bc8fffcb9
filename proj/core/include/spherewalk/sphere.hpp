// Copyright 2026 The spherewalk Authors.
// SPDX-License-Identifier: Apache-2.0

// Geometry of the unit hypersphere S^(d-1): normalization, great-circle
// distance, slerp, spherical (Karcher) means, latent arithmetic and seeded
// perturbation. All functions are pure; seeded ones take the seed
// explicitly.

#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace spherewalk {

class Rng;

namespace sphere {

inline constexpr int kDefaultDim = 128;
/// Inputs shorter than this cannot be normalized.
inline constexpr double kDegenerateNorm = 1e-12;
/// slerp refuses pairs closer than this to antipodal.
inline constexpr double kAntipodalMargin = 1e-6;

/// A point on the unit sphere. Construction always goes through
/// normalization (or an explicit unit-norm check), so every instance has
/// norm 1 to within rounding.
class LatentVector {
 public:
  LatentVector() = default;

  /// v / ||v||; throws GeometryError when ||v|| <= 1e-12.
  static LatentVector normalize(const Eigen::VectorXd& v);

  /// Accepts v if | ||v|| - 1 | <= tolerance and renormalizes it, unless it
  /// is already unit to within 1e-12, in which case the bits are kept.
  /// Throws GeometryError otherwise.
  static LatentVector from_unit(const Eigen::VectorXd& v, double tolerance = 1e-9);

  const Eigen::VectorXd& values() const { return v_; }
  int dim() const { return static_cast<int>(v_.size()); }
  double operator[](Eigen::Index i) const { return v_[i]; }
  bool empty() const { return v_.size() == 0; }

  bool operator==(const LatentVector& other) const { return v_ == other.v_; }

 private:
  explicit LatentVector(Eigen::VectorXd v) : v_(std::move(v)) {}
  Eigen::VectorXd v_;
};

LatentVector normalize(const Eigen::VectorXd& v);

/// Uniform random point on S^(d-1) (normalized Gaussian).
LatentVector random_unit(int dim, Rng& rng);

/// Great-circle distance in [0, pi]. Evaluated as 2 atan2(|a-b|, |a+b|),
/// which equals arccos(clamp(a.b, -1, 1)) but keeps full precision for
/// nearly equal and nearly antipodal pairs.
double geodesic_distance(const LatentVector& a, const LatentVector& b);

/// sin((1-mu)t)/sin(t) q1 + sin(mu t)/sin(t) q2 with t the angle between
/// q1 and q2. mu = 0 and mu = 1 return the endpoints exactly. Throws
/// GeometryError for (near-)antipodal inputs.
LatentVector slerp(const LatentVector& q1, const LatentVector& q2, double mu);

inline constexpr int kKarcherMaxIterations = 100;
inline constexpr double kKarcherTolerance = 1e-10;

/// n = 1: the vector; n = 2: slerp midpoint; n > 2: Karcher mean by
/// tangent-space averaging at the current estimate followed by the
/// exponential map, started from the normalized linear mean. The averaged
/// tangent is preconditioned by the Riemannian Hessian when that is
/// positive definite, which keeps widely spread inputs from stalling. Throws
/// ValidationError on empty input, GeometryError on antipodal members,
/// NumericError when 100 iterations do not bring the update below 1e-10.
LatentVector spherical_mean(std::span<const LatentVector> vs);

/// || (1/n) sum v_i ||; shrinks toward 0 as more spread-out vectors are
/// averaged linearly.
double linear_mean_norm(std::span<const LatentVector> vs);

/// normalize(a - b + c).
LatentVector latent_arithmetic(const LatentVector& a, const LatentVector& b,
                               const LatentVector& c);

/// normalize(v + eps), eps ~ N(0, sigma^2 I) drawn from `seed`.
/// Requires 0 < sigma <= 0.2.
LatentVector perturb(const LatentVector& v, double sigma, std::uint64_t seed);

enum class InterpolationMethod { kSlerp, kLerpRenorm };

std::string_view to_string(InterpolationMethod method);
InterpolationMethod parse_interpolation_method(std::string_view name);

/// n_steps points at mu = 0, 1/(n-1), ..., 1. Endpoints are the inputs.
std::vector<LatentVector> interpolation_path(const LatentVector& q1, const LatentVector& q2,
                                             int n_steps, InterpolationMethod method);

/// Throws ValidationError unless a and b have the same dimension.
void require_same_dim(const LatentVector& a, const LatentVector& b, std::string_view what);

}  // namespace sphere
}  // namespace spherewalk
