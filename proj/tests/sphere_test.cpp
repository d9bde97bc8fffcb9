// Copyright 2026 The spherewalk Authors.
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <set>

#include "spherewalk/errors.hpp"
#include "spherewalk/rng.hpp"
#include "spherewalk/sphere.hpp"
#include "spherewalk/stats.hpp"

namespace sw = spherewalk;
namespace sphere = spherewalk::sphere;
using sphere::LatentVector;
using Eigen::VectorXd;

namespace {

constexpr double kPi = std::numbers::pi;

VectorXd basis(int d, int i) {
  VectorXd v = VectorXd::Zero(d);
  v[i] = 1.0;
  return v;
}

LatentVector unit(const VectorXd& v) { return sphere::normalize(v); }

double arccos_distance(const LatentVector& a, const LatentVector& b) {
  return std::acos(std::clamp(a.values().dot(b.values()), -1.0, 1.0));
}

double sum_sq_distance(const LatentVector& m, const std::vector<LatentVector>& vs) {
  double s = 0;
  for (const auto& v : vs) s += std::pow(arccos_distance(m, v), 2);
  return s;
}

}  // namespace

TEST(Normalize, ThreeFourFive) {
  VectorXd v = VectorXd::Zero(5);
  v[0] = 3;
  v[1] = 4;
  const auto u = sphere::normalize(v);
  EXPECT_DOUBLE_EQ(u[0], 0.6);
  EXPECT_DOUBLE_EQ(u[1], 0.8);
  EXPECT_EQ(u[2], 0.0);
}

TEST(Normalize, UnitVectorUnchanged) {
  const VectorXd e = basis(7, 3);
  EXPECT_EQ(sphere::normalize(e).values(), e);
  EXPECT_EQ(LatentVector::from_unit(e).values(), e);
}

TEST(Normalize, DegenerateInputs) {
  EXPECT_THROW(sphere::normalize(VectorXd::Zero(4)), sw::GeometryError);
  EXPECT_THROW(sphere::normalize(VectorXd()), sw::GeometryError);
  VectorXd nan = VectorXd::Ones(3);
  nan[1] = std::nan("");
  EXPECT_THROW(sphere::normalize(nan), sw::GeometryError);
  EXPECT_THROW(LatentVector::from_unit(0.9 * basis(3, 0)), sw::GeometryError);
}

TEST(Geodesic, KnownValues) {
  const auto a = unit(basis(4, 0));
  const auto b = unit(basis(4, 1));
  EXPECT_EQ(sphere::geodesic_distance(a, a), 0.0);
  EXPECT_NEAR(sphere::geodesic_distance(a, b), kPi / 2, 1e-15);
  EXPECT_NEAR(sphere::geodesic_distance(a, unit(-basis(4, 0))), kPi, 1e-15);
  EXPECT_THROW(sphere::geodesic_distance(a, unit(basis(3, 0))), sw::ValidationError);
}

TEST(Geodesic, AgreesWithArccosAwayFromEndpoints) {
  sw::Rng rng(1);
  for (int i = 0; i < 500; ++i) {
    const auto a = sphere::random_unit(16, rng);
    const auto b = sphere::random_unit(16, rng);
    EXPECT_NEAR(sphere::geodesic_distance(a, b), arccos_distance(a, b), 1e-12);
  }
}

TEST(Geodesic, TinyAnglesKeepPrecision) {
  // arccos loses about half the digits here; the reference uses the exact
  // rotation angle.
  const double t = 1e-9;
  const auto a = unit(basis(3, 0));
  const auto b = unit(std::cos(t) * basis(3, 0) + std::sin(t) * basis(3, 1));
  EXPECT_NEAR(sphere::geodesic_distance(a, b), t, 1e-20);
}

TEST(Slerp, Endpoints) {
  sw::Rng rng(2);
  const auto a = sphere::random_unit(8, rng);
  const auto b = sphere::random_unit(8, rng);
  EXPECT_EQ(sphere::slerp(a, b, 0.0), a);
  EXPECT_EQ(sphere::slerp(a, b, 1.0), b);
}

TEST(Slerp, OrthogonalMidpoint) {
  const auto a = unit(basis(3, 0));
  const auto b = unit(basis(3, 1));
  const auto m = sphere::slerp(a, b, 0.5);
  EXPECT_NEAR(m[0], 1 / std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(m[1], 1 / std::sqrt(2.0), 1e-15);
  EXPECT_EQ(m[2], 0.0);
}

TEST(Slerp, GeodesicParametrization) {
  sw::Rng rng(3);
  for (int i = 0; i < 1000; ++i) {
    const auto a = sphere::random_unit(32, rng);
    const auto b = sphere::random_unit(32, rng);
    const double mu = rng.uniform();
    const double theta = sphere::geodesic_distance(a, b);
    const auto s = sphere::slerp(a, b, mu);
    EXPECT_NEAR(sphere::geodesic_distance(a, s), mu * theta, 1e-9);
    EXPECT_NEAR(sphere::geodesic_distance(s, b), (1 - mu) * theta, 1e-9);
    EXPECT_LT((s.values() - sphere::slerp(b, a, 1 - mu).values()).norm(), 1e-9);
  }
}

TEST(Slerp, RejectsAntipodalAndBadMu) {
  const auto a = unit(basis(3, 0));
  EXPECT_THROW(sphere::slerp(a, unit(-basis(3, 0)), 0.5), sw::GeometryError);
  EXPECT_THROW(sphere::slerp(a, unit(basis(3, 1)), 1.5), sw::ValidationError);
  EXPECT_THROW(sphere::slerp(a, unit(basis(3, 1)), -0.1), sw::ValidationError);
}

TEST(SphericalMean, SingleAndPair) {
  sw::Rng rng(4);
  const auto a = sphere::random_unit(10, rng);
  const auto b = sphere::random_unit(10, rng);
  const std::vector<LatentVector> one = {a};
  EXPECT_EQ(sphere::spherical_mean(one), a);
  const std::vector<LatentVector> two = {a, b};
  EXPECT_EQ(sphere::spherical_mean(two), sphere::slerp(a, b, 0.5));
  EXPECT_THROW(sphere::spherical_mean(std::vector<LatentVector>{}), sw::ValidationError);
}

TEST(SphericalMean, SymmetricTripleInAPlane) {
  const double alpha = 0.7;
  const VectorXd v = basis(5, 0), w = basis(5, 2);
  const std::vector<LatentVector> vs = {
      unit(v), unit(std::cos(alpha) * v + std::sin(alpha) * w),
      unit(std::cos(alpha) * v - std::sin(alpha) * w)};
  EXPECT_LT((sphere::spherical_mean(vs).values() - v).norm(), 1e-12);
}

// The mean minimizes the sum of squared geodesic distances: no small
// perturbation of it along any tangent direction does better.
TEST(SphericalMean, IsALocalMinimizer) {
  sw::Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 3 + static_cast<int>(rng.index(20));
    const auto center = sphere::random_unit(12, rng);
    std::vector<LatentVector> vs;
    for (int i = 0; i < n; ++i) vs.push_back(sphere::perturb(center, 0.2, rng.next_u64()));
    const auto m = sphere::spherical_mean(vs);
    const double f0 = sum_sq_distance(m, vs);
    for (int k = 0; k < 24; ++k) {
      const auto probe = sphere::perturb(m, 1e-3, rng.next_u64());
      EXPECT_GE(sum_sq_distance(probe, vs), f0 - 1e-12);
    }
  }
}

TEST(SphericalMean, WideSpreadsConverge) {
  sw::Rng rng(6);
  for (int n : {4, 16, 64}) {
    for (int t = 0; t < 20; ++t) {
      std::vector<LatentVector> vs;
      for (int i = 0; i < n; ++i) vs.push_back(sphere::random_unit(128, rng));
      const auto m = sphere::spherical_mean(vs);
      EXPECT_NEAR(m.values().norm(), 1.0, 1e-9);
    }
  }
}

TEST(LinearMeanNorm, Basics) {
  const auto a = unit(basis(6, 1));
  const std::vector<LatentVector> same(5, a);
  EXPECT_DOUBLE_EQ(sphere::linear_mean_norm(same), 1.0);
  const std::vector<LatentVector> opposite = {a, unit(-basis(6, 1))};
  EXPECT_EQ(sphere::linear_mean_norm(opposite), 0.0);
}

// E|mean| for 64 uniform vectors in R^128 against an exact series: |sum|^2
// has mean n, so E|mean| ~ 1/sqrt(n) up to a small Jensen gap.
TEST(LinearMeanNorm, MonteCarloCollapse) {
  sw::Rng rng(7);
  std::vector<double> norms, squares;
  for (int t = 0; t < 1000; ++t) {
    std::vector<LatentVector> vs;
    for (int i = 0; i < 64; ++i) vs.push_back(sphere::random_unit(128, rng));
    const double r = sphere::linear_mean_norm(vs);
    norms.push_back(r);
    squares.push_back(r * r);
  }
  // E|mean|^2 = 1/n exactly.
  EXPECT_NEAR(sw::stats::mean(squares), 1.0 / 64, 3 * sw::stats::standard_error(squares));
  EXPECT_NEAR(sw::stats::mean(norms), 0.125, 0.005);
}

TEST(Arithmetic, Cancellation) {
  sw::Rng rng(8);
  const auto a = sphere::random_unit(9, rng);
  const auto b = sphere::random_unit(9, rng);
  const auto c = sphere::random_unit(9, rng);
  EXPECT_LT((sphere::latent_arithmetic(a, b, b).values() - a.values()).norm(), 1e-15);
  EXPECT_LT((sphere::latent_arithmetic(a, a, c).values() - c.values()).norm(), 1e-15);
  // b at 60 degrees from a makes c = b - a a unit vector and a - b + c = 0.
  const VectorXd e0 = basis(3, 0);
  const VectorXd b60 = 0.5 * e0 + std::sqrt(0.75) * basis(3, 1);
  EXPECT_THROW(sphere::latent_arithmetic(unit(e0), unit(b60), unit(b60 - e0)), sw::GeometryError);
}

TEST(Perturb, SmallSigmaStaysClose) {
  sw::Rng rng(9);
  const auto v = sphere::random_unit(128, rng);
  EXPECT_LT(sphere::geodesic_distance(v, sphere::perturb(v, 1e-9, 1)), 1e-6);
  EXPECT_EQ(sphere::perturb(v, 0.05, 3), sphere::perturb(v, 0.05, 3));
  EXPECT_THROW(sphere::perturb(v, 0.0, 1), sw::ValidationError);
  EXPECT_THROW(sphere::perturb(v, 0.3, 1), sw::ValidationError);
}

TEST(Perturb, DistinctSeedsDistinctOutputs) {
  sw::Rng rng(10);
  const auto v = sphere::random_unit(128, rng);
  std::set<std::vector<double>> seen;
  for (std::uint64_t s = 1; s <= 63; ++s) {
    const auto p = sphere::perturb(v, 0.05, s);
    seen.insert(std::vector<double>(p.values().begin(), p.values().end()));
  }
  EXPECT_EQ(seen.size(), 63u);
}

TEST(Perturb, DistanceGrowsWithSigma) {
  sw::Rng rng(11);
  const auto v = sphere::random_unit(128, rng);
  double prev = 0;
  for (double sigma : {0.01, 0.05, 0.1}) {
    std::vector<double> d;
    for (std::uint64_t s = 0; s < 200; ++s) d.push_back(sphere::geodesic_distance(v, sphere::perturb(v, sigma, s)));
    const double m = sw::stats::mean(d);
    // For small sigma, |eps| ~ sigma sqrt(d) so the angle is ~atan(sigma sqrt(d)).
    EXPECT_NEAR(m, std::atan(sigma * std::sqrt(127.0)), 0.1 * m);
    EXPECT_GT(m, prev);
    prev = m;
  }
}

TEST(Interpolation, EndpointsAndEqualGaps) {
  sw::Rng rng(12);
  const auto a = sphere::random_unit(20, rng);
  const auto b = sphere::random_unit(20, rng);
  const double theta = sphere::geodesic_distance(a, b);
  for (auto method : {sphere::InterpolationMethod::kSlerp, sphere::InterpolationMethod::kLerpRenorm}) {
    const auto path = sphere::interpolation_path(a, b, 9, method);
    ASSERT_EQ(path.size(), 9u);
    EXPECT_EQ(path.front(), a);
    EXPECT_EQ(path.back(), b);
  }
  const auto path = sphere::interpolation_path(a, b, 9, sphere::InterpolationMethod::kSlerp);
  for (std::size_t k = 1; k < path.size(); ++k) {
    EXPECT_NEAR(sphere::geodesic_distance(path[k - 1], path[k]), theta / 8, 1e-9);
  }
  EXPECT_THROW(sphere::interpolation_path(a, b, 1, sphere::InterpolationMethod::kSlerp),
               sw::ValidationError);
}

// Renormalized lerp and slerp trace the same great-circle arc and differ
// only in speed: the lerp point at mu sits atan2(mu sin t, 1 - mu + mu cos t)
// from a.
TEST(Interpolation, LerpRenormStaysCloseForSmallAngles) {
  sw::Rng rng(13);
  for (int i = 0; i < 200; ++i) {
    const auto a = sphere::random_unit(64, rng);
    VectorXd dir = sphere::random_unit(64, rng).values();
    dir -= dir.dot(a.values()) * a.values();
    const double theta = rng.uniform(0.01, kPi / 4 - 0.01);
    const auto b = unit(std::cos(theta) * a.values() + std::sin(theta) * dir.normalized());
    const auto s = sphere::interpolation_path(a, b, 11, sphere::InterpolationMethod::kSlerp);
    const auto l = sphere::interpolation_path(a, b, 11, sphere::InterpolationMethod::kLerpRenorm);
    double dev = 0;
    for (std::size_t k = 0; k < s.size(); ++k) {
      const double mu = k / 10.0;
      const double expected =
          std::abs(mu * theta - std::atan2(mu * std::sin(theta), 1 - mu + mu * std::cos(theta)));
      const double d = sphere::geodesic_distance(s[k], l[k]);
      EXPECT_NEAR(d, expected, 1e-9);
      dev = std::max(dev, d);
    }
    EXPECT_LT(dev, 0.05);
  }
}

TEST(Interpolation, MethodNames) {
  EXPECT_EQ(sphere::parse_interpolation_method("slerp"), sphere::InterpolationMethod::kSlerp);
  EXPECT_EQ(sphere::to_string(sphere::InterpolationMethod::kLerpRenorm), "lerp_renorm");
  EXPECT_THROW(sphere::parse_interpolation_method("cubic"), sw::ValidationError);
}
