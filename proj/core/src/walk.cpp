// Copyright 2026 The spherewalk Authors.
// SPDX-License-Identifier: Apache-2.0

#include "spherewalk/walk.hpp"

#include <json.hpp>

#include <cmath>
#include <numbers>
#include <sstream>

#include "spherewalk/classifier.hpp"
#include "spherewalk/errors.hpp"
#include "spherewalk/io.hpp"

namespace spherewalk::walk {
namespace {

using nlohmann::json;

// Arc reached by the renormalized update at step length eta, or -1 when
// z - eta g collapses to the origin.
double arc_for(const sphere::LatentVector& z, const Eigen::VectorXd& g, double eta,
               sphere::LatentVector* out) {
  const Eigen::VectorXd u = z.values() - eta * g;
  if (!(u.norm() > sphere::kDegenerateNorm)) return -1.0;
  sphere::LatentVector next = sphere::normalize(u);
  const double arc = sphere::geodesic_distance(z, next);
  if (out != nullptr) *out = std::move(next);
  return arc;
}

}  // namespace

std::string_view to_string(Termination t) {
  switch (t) {
    case Termination::kCompleted: return "completed";
    case Termination::kStopLoss: return "stop_loss";
    case Termination::kVanishedGradient: return "vanished_gradient";
  }
  return "unknown";
}

Termination parse_termination(std::string_view name) {
  if (name == "completed") return Termination::kCompleted;
  if (name == "stop_loss") return Termination::kStopLoss;
  if (name == "vanished_gradient") return Termination::kVanishedGradient;
  throw FormatError("unknown termination reason '" + std::string(name) + "'");
}

void WalkConfig::validate() const {
  if (target != 0 && target != 1) throw ValidationError("walk: target must be 0 or 1");
  if (!(step_arc > 0.0 && step_arc < std::numbers::pi / 4.0)) {
    throw ValidationError("walk: step_arc must lie in (0, pi/4)");
  }
  if (iterations <= 0) throw ValidationError("walk: iterations must be positive");
  if (snapshot_every <= 0 || iterations % snapshot_every != 0) {
    throw ValidationError("walk: snapshot_every must divide iterations");
  }
  if (!(stop_loss >= 0.0)) throw ValidationError("walk: stop_loss must be >= 0");
  if (!(grad_floor >= 0.0)) throw ValidationError("walk: grad_floor must be >= 0");
}

ArcStep constant_arc_step(const sphere::LatentVector& z, const Eigen::VectorXd& g,
                          double arc) {
  ArcStep step;
  const double gnorm = g.norm();
  if (!(gnorm > 0.0) || !(arc > 0.0)) return step;
  const double tol = kArcTolerance * arc;

  double lo = 0.0;
  double hi = arc / gnorm;
  double reached = arc_for(z, g, hi, nullptr);
  int doublings = 0;
  while (reached >= 0.0 && reached < arc && doublings < kMaxBracketDoublings) {
    lo = hi;
    hi *= 2.0;
    reached = arc_for(z, g, hi, nullptr);
    ++doublings;
  }
  if (reached < arc) return step;  // saturated below the target arc, or collapsed

  for (int k = 0; k <= kMaxBisections; ++k) {
    const double eta = k == 0 ? hi : 0.5 * (lo + hi);
    sphere::LatentVector next;
    const double a = arc_for(z, g, eta, &next);
    if (a >= 0.0 && std::abs(a - arc) <= tol) {
      step.ok = true;
      step.eta = eta;
      step.arc = a;
      step.next = std::move(next);
      return step;
    }
    if (k == 0) continue;
    if (a >= 0.0 && a < arc) {
      lo = eta;
    } else {
      hi = eta;
    }
  }
  return step;
}

Trajectory semantic_walk(const nn::MlpModel& classifier, const sphere::LatentVector& z0,
                         const WalkConfig& config) {
  config.validate();
  if (z0.dim() != classifier.input_dim()) {
    throw ValidationError("walk: latent dimension " + std::to_string(z0.dim()) +
                          " does not match classifier input " +
                          std::to_string(classifier.input_dim()));
  }
  if (std::abs(z0.values().norm() - 1.0) > 1e-9) throw ValidationError("walk: z0 is not unit");

  Trajectory t;
  t.dim = z0.dim();
  t.step_arc = config.step_arc;
  t.target = config.target;
  t.snapshots.push_back(z0);
  t.snapshot_iterations.push_back(0);

  sphere::LatentVector z = z0;
  classifier::Evaluation e = classifier::evaluate(classifier, z, config.target);
  if (!std::isfinite(e.loss)) throw NumericError("walk: non-finite loss at z0");
  t.initial_loss = e.loss;
  if (config.stop_loss > 0.0 && e.loss <= config.stop_loss) {
    t.reason = Termination::kStopLoss;
    return t;
  }

  t.reason = Termination::kCompleted;
  for (int it = 1; it <= config.iterations; ++it) {
    if (!e.gradient.allFinite()) {
      throw NumericError("walk: non-finite gradient at iteration " + std::to_string(it));
    }
    const double gnorm = e.gradient.norm();
    if (gnorm < config.grad_floor) {
      t.reason = Termination::kVanishedGradient;
      std::ostringstream msg;
      msg << "gradient norm " << gnorm << " below floor at iteration " << it;
      t.diagnostic = msg.str();
      break;
    }
    ArcStep step = constant_arc_step(z, e.gradient, config.step_arc);
    if (!step.ok) {
      t.reason = Termination::kVanishedGradient;
      t.diagnostic = "constant-arc step unreachable at iteration " + std::to_string(it) +
                     ": renormalized update saturates below the requested arc";
      break;
    }
    z = std::move(step.next);
    e = classifier::evaluate(classifier, z, config.target);
    if (!std::isfinite(e.loss)) {
      throw NumericError("walk: non-finite loss at iteration " + std::to_string(it));
    }
    t.losses.push_back(e.loss);
    t.steps.push_back(step.arc);
    if (it % config.snapshot_every == 0) {
      t.snapshots.push_back(z);
      t.snapshot_iterations.push_back(it);
    }
    if (config.stop_loss > 0.0 && e.loss <= config.stop_loss) {
      t.reason = Termination::kStopLoss;
      break;
    }
  }
  if (t.snapshot_iterations.back() != t.iterations()) {
    t.snapshots.push_back(z);
    t.snapshot_iterations.push_back(t.iterations());
  }
  return t;
}

std::string serialize_trajectory(const Trajectory& t) {
  json snaps = json::array();
  for (const auto& s : t.snapshots) {
    json v = json::array();
    for (Eigen::Index i = 0; i < s.dim(); ++i) v.push_back(s[i]);
    snaps.push_back(std::move(v));
  }
  json doc = {{"format_version", kTrajectoryFormatVersion},
              {"d", t.dim},
              {"delta", t.step_arc},
              {"y", t.target},
              {"snapshots", std::move(snaps)},
              {"snapshot_iterations", t.snapshot_iterations},
              {"initial_loss", t.initial_loss},
              {"losses", t.losses},
              {"steps", t.steps},
              {"reason", std::string(to_string(t.reason))},
              {"diagnostic", t.diagnostic}};
  return doc.dump(1) + "\n";
}

Trajectory parse_trajectory(const std::string& text, int expected_dim) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw FormatError(std::string("trajectory: malformed file: ") + e.what());
  }
  try {
    if (!doc.is_object()) throw FormatError("trajectory: expected an object");
    if (doc.at("format_version").get<int>() != kTrajectoryFormatVersion) {
      throw FormatError("trajectory: unsupported format_version");
    }
    Trajectory t;
    t.dim = doc.at("d").get<int>();
    if (t.dim <= 0) throw FormatError("trajectory: d must be positive");
    if (expected_dim != 0 && t.dim != expected_dim) {
      throw ValidationError("trajectory: dimension " + std::to_string(t.dim) +
                            " does not match pipeline dimension " +
                            std::to_string(expected_dim));
    }
    t.step_arc = doc.at("delta").get<double>();
    t.target = doc.at("y").get<int>();
    for (const auto& s : doc.at("snapshots")) {
      if (!s.is_array() || static_cast<int>(s.size()) != t.dim) {
        throw FormatError("trajectory: snapshot has the wrong dimension");
      }
      Eigen::VectorXd v(t.dim);
      for (int i = 0; i < t.dim; ++i) v[i] = s[static_cast<std::size_t>(i)].get<double>();
      t.snapshots.push_back(sphere::LatentVector::from_unit(v, 1e-9));
    }
    t.snapshot_iterations = doc.at("snapshot_iterations").get<std::vector<int>>();
    t.initial_loss = doc.at("initial_loss").get<double>();
    t.losses = doc.at("losses").get<std::vector<double>>();
    t.steps = doc.at("steps").get<std::vector<double>>();
    t.reason = parse_termination(doc.at("reason").get<std::string>());
    t.diagnostic = doc.value("diagnostic", std::string());
    if (t.snapshots.empty() || t.snapshots.size() != t.snapshot_iterations.size() ||
        t.losses.size() != t.steps.size()) {
      throw FormatError("trajectory: inconsistent array lengths");
    }
    return t;
  } catch (const json::exception& e) {
    throw FormatError(std::string("trajectory: malformed file: ") + e.what());
  } catch (const GeometryError& e) {
    throw FormatError(std::string("trajectory: ") + e.what());
  }
}

void export_trajectory(const Trajectory& t, const std::filesystem::path& path) {
  write_file(path, serialize_trajectory(t));
}

Trajectory import_trajectory(const std::filesystem::path& path, int expected_dim) {
  return parse_trajectory(read_file(path), expected_dim);
}

}  // namespace spherewalk::walk
