// Copyright 2026 The spherewalk Authors.
// SPDX-License-Identifier: Apache-2.0

#include "spherewalk/sphere.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "spherewalk/errors.hpp"
#include "spherewalk/rng.hpp"

namespace spherewalk::sphere {
namespace {

// Tangent vector at m pointing to v with length equal to their distance.
Eigen::VectorXd log_map(const LatentVector& m, const LatentVector& v) {
  const double theta = geodesic_distance(m, v);
  if (theta >= std::numbers::pi - kAntipodalMargin) {
    throw GeometryError("spherical_mean: member antipodal to the current mean estimate");
  }
  Eigen::VectorXd u = v.values() - m.values().dot(v.values()) * m.values();
  const double un = u.norm();
  if (theta == 0.0 || un == 0.0) return Eigen::VectorXd::Zero(m.dim());
  return (theta / un) * u;
}

}  // namespace

LatentVector LatentVector::normalize(const Eigen::VectorXd& v) {
  if (v.size() == 0) throw GeometryError("normalize: empty vector");
  const double n = v.norm();
  if (!std::isfinite(n)) throw GeometryError("normalize: non-finite vector");
  if (n <= kDegenerateNorm) {
    throw GeometryError("normalize: degenerate input (norm " + std::to_string(n) + ")");
  }
  return LatentVector(v / n);
}

LatentVector LatentVector::from_unit(const Eigen::VectorXd& v, double tolerance) {
  const double n = v.norm();
  if (!(std::abs(n - 1.0) <= tolerance)) {
    throw GeometryError("vector norm " + std::to_string(n) +
                        " deviates from 1 by more than " + std::to_string(tolerance));
  }
  // Already unit to rounding: keep the exact bits so files round-trip.
  if (std::abs(n - 1.0) <= 1e-12) return LatentVector(v);
  return normalize(v);
}

LatentVector normalize(const Eigen::VectorXd& v) { return LatentVector::normalize(v); }

LatentVector random_unit(int dim, Rng& rng) {
  if (dim <= 0) throw ValidationError("random_unit: dimension must be positive");
  Eigen::VectorXd v(dim);
  for (int i = 0; i < dim; ++i) v[i] = rng.normal();
  return normalize(v);
}

void require_same_dim(const LatentVector& a, const LatentVector& b, std::string_view what) {
  if (a.dim() != b.dim()) {
    throw ValidationError(std::string(what) + ": dimension mismatch (" +
                          std::to_string(a.dim()) + " vs " + std::to_string(b.dim()) + ")");
  }
}

double geodesic_distance(const LatentVector& a, const LatentVector& b) {
  require_same_dim(a, b, "geodesic_distance");
  const double chord = (a.values() - b.values()).norm();
  const double sum = (a.values() + b.values()).norm();
  return 2.0 * std::atan2(chord, sum);
}

LatentVector slerp(const LatentVector& q1, const LatentVector& q2, double mu) {
  require_same_dim(q1, q2, "slerp");
  if (!(mu >= 0.0 && mu <= 1.0)) throw ValidationError("slerp: mu must lie in [0, 1]");
  const double theta = geodesic_distance(q1, q2);
  if (theta >= std::numbers::pi - kAntipodalMargin) {
    throw GeometryError("slerp: antipodal inputs have no unique geodesic");
  }
  if (mu == 0.0) return q1;
  if (mu == 1.0) return q2;
  if (theta < 1e-12) return normalize((1.0 - mu) * q1.values() + mu * q2.values());
  const double s = std::sin(theta);
  const double a = std::sin((1.0 - mu) * theta) / s;
  const double b = std::sin(mu * theta) / s;
  return normalize(a * q1.values() + b * q2.values());
}

LatentVector spherical_mean(std::span<const LatentVector> vs) {
  if (vs.empty()) throw ValidationError("spherical_mean: empty input");
  for (const auto& v : vs) require_same_dim(vs.front(), v, "spherical_mean");
  if (vs.size() == 1) return vs.front();
  if (vs.size() == 2) return slerp(vs[0], vs[1], 0.5);

  Eigen::VectorXd sum = Eigen::VectorXd::Zero(vs.front().dim());
  for (const auto& v : vs) sum += v.values();
  if (sum.norm() <= kDegenerateNorm) {
    throw GeometryError("spherical_mean: inputs cancel; no starting direction");
  }
  LatentVector m = normalize(sum);
  const double inv_n = 1.0 / static_cast<double>(vs.size());
  const Eigen::Index d = m.dim();
  for (int it = 0; it < kKarcherMaxIterations; ++it) {
    // Mean log map and the Riemannian Hessian of the mean squared distance.
    Eigen::VectorXd t = Eigen::VectorXd::Zero(d);
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(d, d);
    for (const auto& v : vs) {
      const Eigen::VectorXd lg = log_map(m, v);
      t += lg;
      const double theta = lg.norm();
      const double c = theta < 1e-8 ? 1.0 : theta * std::cos(theta) / std::sin(theta);
      h.diagonal().array() += c;
      h.noalias() -= c * m.values() * m.values().transpose();
      if (theta > 0.0) {
        const Eigen::VectorXd u = lg / theta;
        h.noalias() += (1.0 - c) * u * u.transpose();
      }
    }
    t *= inv_n;
    h *= inv_n;
    h.noalias() += m.values() * m.values().transpose();
    // Newton step when the Hessian is positive definite, plain averaging
    // otherwise.
    Eigen::VectorXd step = t;
    Eigen::LLT<Eigen::MatrixXd> llt(h);
    if (llt.info() == Eigen::Success) {
      step = llt.solve(t);
      step -= m.values().dot(step) * m.values();
      if (!step.allFinite() || step.norm() > std::numbers::pi / 2) step = t;
    }
    const double len = step.norm();
    if (len > 0.0) {
      m = normalize(std::cos(len) * m.values() + (std::sin(len) / len) * step);
    }
    if (len < kKarcherTolerance) return m;
  }
  throw NumericError("spherical_mean: Karcher iteration did not converge in " +
                     std::to_string(kKarcherMaxIterations) + " iterations");
}

double linear_mean_norm(std::span<const LatentVector> vs) {
  if (vs.empty()) throw ValidationError("linear_mean_norm: empty input");
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(vs.front().dim());
  for (const auto& v : vs) {
    require_same_dim(vs.front(), v, "linear_mean_norm");
    sum += v.values();
  }
  return sum.norm() / static_cast<double>(vs.size());
}

LatentVector latent_arithmetic(const LatentVector& a, const LatentVector& b,
                               const LatentVector& c) {
  require_same_dim(a, b, "latent_arithmetic");
  require_same_dim(a, c, "latent_arithmetic");
  const Eigen::VectorXd r = a.values() - b.values() + c.values();
  if (r.norm() <= kDegenerateNorm) {
    throw GeometryError("latent_arithmetic: a - b + c is (near) zero");
  }
  return normalize(r);
}

LatentVector perturb(const LatentVector& v, double sigma, std::uint64_t seed) {
  if (!(sigma > 0.0 && sigma <= 0.2)) {
    throw ValidationError("perturb: sigma must lie in (0, 0.2]");
  }
  Rng rng(seed);
  Eigen::VectorXd noisy = v.values();
  for (Eigen::Index i = 0; i < noisy.size(); ++i) noisy[i] += sigma * rng.normal();
  return normalize(noisy);
}

std::string_view to_string(InterpolationMethod method) {
  return method == InterpolationMethod::kSlerp ? "slerp" : "lerp_renorm";
}

InterpolationMethod parse_interpolation_method(std::string_view name) {
  if (name == "slerp") return InterpolationMethod::kSlerp;
  if (name == "lerp_renorm" || name == "lerp") return InterpolationMethod::kLerpRenorm;
  throw ValidationError("unknown interpolation method '" + std::string(name) + "'");
}

std::vector<LatentVector> interpolation_path(const LatentVector& q1, const LatentVector& q2,
                                             int n_steps, InterpolationMethod method) {
  require_same_dim(q1, q2, "interpolation_path");
  if (n_steps < 2) throw ValidationError("interpolation_path: n_steps must be >= 2");
  if (geodesic_distance(q1, q2) >= std::numbers::pi - kAntipodalMargin) {
    throw GeometryError("interpolation_path: antipodal inputs have no unique geodesic");
  }
  std::vector<LatentVector> path;
  path.reserve(static_cast<std::size_t>(n_steps));
  path.push_back(q1);
  for (int i = 1; i + 1 < n_steps; ++i) {
    const double mu = static_cast<double>(i) / static_cast<double>(n_steps - 1);
    if (method == InterpolationMethod::kSlerp) {
      path.push_back(slerp(q1, q2, mu));
    } else {
      path.push_back(normalize((1.0 - mu) * q1.values() + mu * q2.values()));
    }
  }
  path.push_back(q2);
  return path;
}

}  // namespace spherewalk::sphere
