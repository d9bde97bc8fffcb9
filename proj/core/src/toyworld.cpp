// Copyright 2026 The spherewalk Authors.
// SPDX-License-Identifier: Apache-2.0

#include "spherewalk/toyworld.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "spherewalk/errors.hpp"
#include "spherewalk/rng.hpp"

namespace spherewalk::toyworld {
namespace {

// Glyph layout on the 32-unit canvas.
constexpr double kCanvas = 32.0;
constexpr double kCenterX = 16.0;
constexpr double kCenterY = 16.0;
constexpr double kFaceHalfWidth = 11.5;
constexpr double kFaceHalfHeight = 14.0;
constexpr double kOutlineHalfThickness = 0.65;
constexpr double kEyeY = 11.5;
constexpr double kEyeOffsetX = 4.0;
constexpr double kEyeRadius = 2.1;
constexpr double kNoseCentroidY = 16.5;
constexpr double kNoseHeight = 5.0;
constexpr double kNoseSlope = 0.6;
constexpr double kMouthY = 24.5;
constexpr double kMouthHalfWidth = 5.0;
constexpr double kMouthSag = 2.5;
constexpr double kMouthHalfThickness = 0.75;

// Measurement regions, same units.
constexpr double kEyeRegionRadius = 3.3;
constexpr double kNoseBoxHalfWidth = 5.0, kNoseBoxY0 = 15.0, kNoseBoxY1 = 21.0;
constexpr double kMouthBoxY0 = 21.0, kMouthBoxY1 = 28.0;
constexpr double kCheekY0 = 15.0, kCheekY1 = 20.0, kCheekMinOffset = 5.0;

bool on_outline(double u, double v, double face_width) {
  const double a = kFaceHalfWidth * face_width;
  const double b = kFaceHalfHeight;
  const double dx = u - kCenterX;
  const double dy = v - kCenterY;
  const double q = std::sqrt(dx * dx / (a * a) + dy * dy / (b * b));
  if (q == 0.0) return false;
  // First-order distance to the ellipse: |q - 1| / |grad q|.
  const double gx = dx / (a * a * q);
  const double gy = dy / (b * b * q);
  const double dist = std::abs(q - 1.0) / std::sqrt(gx * gx + gy * gy);
  return dist <= kOutlineHalfThickness;
}

bool in_eye(double u, double v, double eye_size) {
  const double r = kEyeRadius * eye_size;
  for (double cx : {kCenterX - kEyeOffsetX, kCenterX + kEyeOffsetX}) {
    const double dx = u - cx;
    const double dy = v - kEyeY;
    if (dx * dx + dy * dy <= r * r) return true;
  }
  return false;
}

// Scaled about its centroid so every row's edges move with nose_size.
bool in_nose(double u, double v, double nose_size) {
  const double h = kNoseHeight * nose_size;
  const double apex = kNoseCentroidY - 2.0 * h / 3.0;
  if (v < apex || v > apex + h) return false;
  return std::abs(u - kCenterX) <= kNoseSlope * (v - apex);
}

double mouth_line(double u, double smile) {
  const double t = (u - kCenterX) / kMouthHalfWidth;
  return kMouthY + kMouthSag * smile * (1.0 - t * t);
}

bool on_mouth(double u, double v, double smile) {
  if (std::abs(u - kCenterX) > kMouthHalfWidth) return false;
  return std::abs(v - mouth_line(u, smile)) <= kMouthHalfThickness;
}

bool ink_at(double u, double v, const GlyphParams& p) {
  return on_outline(u, v, p.face_width) || in_eye(u, v, p.eye_size) ||
         in_nose(u, v, p.nose_size) || on_mouth(u, v, p.smile);
}

// Visits every pixel with its centre in canvas units and its ink.
template <typename F>
void for_each_pixel(const GlyphImage& img, F&& fn) {
  const double unit = kCanvas / static_cast<double>(img.width);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      fn((x + 0.5) * unit, (y + 0.5) * unit, 1.0 - img.at(x, y));
    }
  }
}

double pixel_area(const GlyphImage& img) {
  const double unit = kCanvas / static_cast<double>(img.width);
  return unit * unit;
}

double measure_smile(const GlyphImage& img) {
  double center_w = 0.0, center_y = 0.0, edge_w = 0.0, edge_y = 0.0;
  for_each_pixel(img, [&](double u, double v, double ink) {
    if (v < kMouthBoxY0 || v >= kMouthBoxY1 || ink <= 0.0) return;
    const double off = std::abs(u - kCenterX);
    if (off < 1.0) {
      center_w += ink;
      center_y += ink * v;
    } else if (off >= 3.0 && off < 4.0) {
      edge_w += ink;
      edge_y += ink * v;
    }
  });
  if (center_w <= 0.0 || edge_w <= 0.0) return 0.0;
  // Sag gain between column centres at |t| = 0.1 and |t| = 0.7.
  const double gain = kMouthSag * ((1.0 - 0.01) - (1.0 - 0.49));
  return (center_y / center_w - edge_y / edge_w) / gain;
}

double measure_eyes(const GlyphImage& img) {
  double ink_sum = 0.0;
  for_each_pixel(img, [&](double u, double v, double ink) {
    for (double cx : {kCenterX - kEyeOffsetX, kCenterX + kEyeOffsetX}) {
      const double dx = u - cx;
      const double dy = v - kEyeY;
      if (dx * dx + dy * dy <= kEyeRegionRadius * kEyeRegionRadius) ink_sum += ink;
    }
  });
  const double area = ink_sum * pixel_area(img);
  return std::sqrt(area / (2.0 * std::numbers::pi)) / kEyeRadius;
}

// Area of the nose triangle below row y0.
double nose_area_below(double nose_size, double y0) {
  const double h = kNoseHeight * nose_size;
  const double apex = kNoseCentroidY - 2.0 * h / 3.0;
  const double base = apex + h;
  if (y0 >= base) return 0.0;
  const double t0 = std::max(y0 - apex, 0.0);
  return kNoseSlope * (h * h - t0 * t0);
}

double measure_nose(const GlyphImage& img) {
  double ink_sum = 0.0;
  for_each_pixel(img, [&](double u, double v, double ink) {
    if (std::abs(u - kCenterX) < kNoseBoxHalfWidth && v >= kNoseBoxY0 && v < kNoseBoxY1) {
      ink_sum += ink;
    }
  });
  const double area = ink_sum * pixel_area(img);
  // Invert the monotone area curve by bisection.
  double lo = 0.0, hi = 2.0;
  for (int i = 0; i < 60; ++i) {
    const double mid = 0.5 * (lo + hi);
    (nose_area_below(mid, kNoseBoxY0) < area ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double measure_face_width(const GlyphImage& img) {
  double w = 0.0, sum = 0.0;
  for_each_pixel(img, [&](double u, double v, double ink) {
    if (v < kCheekY0 || v >= kCheekY1 || ink <= 0.0) return;
    const double off = std::abs(u - kCenterX);
    if (off <= kCheekMinOffset) return;
    w += ink;
    sum += ink * off;
  });
  if (w <= 0.0) return 0.0;
  return sum / w / kFaceHalfWidth;
}

}  // namespace

std::string_view to_string(Attribute a) {
  switch (a) {
    case Attribute::kSmile: return "smile";
    case Attribute::kEyeSize: return "eye_size";
    case Attribute::kNoseSize: return "nose_size";
    case Attribute::kFaceWidth: return "face_width";
  }
  return "unknown";
}

Attribute parse_attribute(std::string_view name) {
  for (Attribute a : kAllAttributes)
    if (to_string(a) == name) return a;
  throw ValidationError("unknown attribute '" + std::string(name) +
                        "' (expected smile, eye_size, nose_size or face_width)");
}

Range GlyphParams::range(Attribute a) {
  switch (a) {
    case Attribute::kSmile: return {-1.0, 1.0};
    case Attribute::kEyeSize: return {0.5, 1.5};
    case Attribute::kNoseSize: return {0.5, 1.5};
    case Attribute::kFaceWidth: return {0.7, 1.3};
  }
  return {0.0, 0.0};
}

double GlyphParams::get(Attribute a) const {
  switch (a) {
    case Attribute::kSmile: return smile;
    case Attribute::kEyeSize: return eye_size;
    case Attribute::kNoseSize: return nose_size;
    case Attribute::kFaceWidth: return face_width;
  }
  return 0.0;
}

void GlyphParams::set(Attribute a, double value) {
  switch (a) {
    case Attribute::kSmile: smile = value; break;
    case Attribute::kEyeSize: eye_size = value; break;
    case Attribute::kNoseSize: nose_size = value; break;
    case Attribute::kFaceWidth: face_width = value; break;
  }
}

void GlyphParams::validate() const {
  for (Attribute a : kAllAttributes) {
    const Range r = range(a);
    const double v = get(a);
    if (!(v >= r.lo && v <= r.hi)) {
      throw ValidationError("glyph " + std::string(to_string(a)) + " = " + std::to_string(v) +
                            " outside [" + std::to_string(r.lo) + ", " +
                            std::to_string(r.hi) + "]");
    }
  }
}

Eigen::VectorXd normalized_params(const GlyphParams& p) {
  Eigen::VectorXd v(4);
  for (std::size_t i = 0; i < kAllAttributes.size(); ++i) {
    const Range r = GlyphParams::range(kAllAttributes[i]);
    v[static_cast<Eigen::Index>(i)] = 2.0 * (p.get(kAllAttributes[i]) - r.lo) / (r.hi - r.lo) - 1.0;
  }
  return v;
}

GlyphImage render_glyph(const GlyphParams& params, int size) {
  params.validate();
  if (size < 8) throw ValidationError("render_glyph: image size must be at least 8");
  GlyphImage img(size, size, 1.0);
  const double unit = kCanvas / static_cast<double>(size);
  static constexpr double kOffsets[2] = {0.25, 0.75};
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      int hits = 0;
      for (double oy : kOffsets)
        for (double ox : kOffsets)
          if (ink_at((x + ox) * unit, (y + oy) * unit, params)) ++hits;
      img.at(x, y) = 1.0 - 0.25 * hits;
    }
  }
  return img;
}

double measure_attribute(const GlyphImage& image, Attribute a) {
  if (image.width <= 0 || image.width != image.height) {
    throw ValidationError("measure_attribute: expected a square image");
  }
  switch (a) {
    case Attribute::kSmile: return measure_smile(image);
    case Attribute::kEyeSize: return measure_eyes(image);
    case Attribute::kNoseSize: return measure_nose(image);
    case Attribute::kFaceWidth: return measure_face_width(image);
  }
  return 0.0;
}

ToyDataset sample_dataset(int n, std::uint64_t seed, int image_size) {
  if (n < kMinDatasetSize) {
    throw ValidationError("sample_dataset: n must be at least " +
                          std::to_string(kMinDatasetSize) + ", got " + std::to_string(n));
  }
  ToyDataset ds;
  ds.seed = seed;
  ds.image_size = image_size;
  Rng rng(seed);
  ds.params.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    GlyphParams p;
    for (Attribute a : kAllAttributes) {
      const Range r = GlyphParams::range(a);
      p.set(a, rng.uniform(r.lo, r.hi));
    }
    ds.params.push_back(p);
  }
  ds.images.reserve(ds.params.size());
  for (const auto& p : ds.params) ds.images.push_back(render_glyph(p, image_size));

  ds.labels.assign(ds.params.size(), {});
  for (std::size_t k = 0; k < kAllAttributes.size(); ++k) {
    std::vector<double> values;
    values.reserve(ds.params.size());
    for (const auto& p : ds.params) values.push_back(p.get(kAllAttributes[k]));
    std::vector<double> sorted = values;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t m = sorted.size();
    ds.medians[k] = m % 2 == 1 ? sorted[m / 2] : 0.5 * (sorted[m / 2 - 1] + sorted[m / 2]);
    for (std::size_t i = 0; i < values.size(); ++i) ds.labels[i][k] = values[i] > ds.medians[k] ? 1 : 0;
  }
  return ds;
}

nn::Matrix images_to_matrix(std::span<const GlyphImage> images) {
  if (images.empty()) return nn::Matrix(0, 0);
  const auto cols = static_cast<Eigen::Index>(images.front().pixels.size());
  nn::Matrix m(static_cast<Eigen::Index>(images.size()), cols);
  for (std::size_t i = 0; i < images.size(); ++i) {
    if (static_cast<Eigen::Index>(images[i].pixels.size()) != cols) {
      throw ValidationError("images_to_matrix: images differ in size");
    }
    for (Eigen::Index c = 0; c < cols; ++c) {
      m(static_cast<Eigen::Index>(i), c) = images[i].pixels[static_cast<std::size_t>(c)];
    }
  }
  return m;
}

GlyphImage image_from_row(const Eigen::VectorXd& row, int width, int height) {
  if (row.size() != static_cast<Eigen::Index>(width) * height) {
    throw ValidationError("image_from_row: size mismatch");
  }
  GlyphImage img(width, height);
  for (Eigen::Index i = 0; i < row.size(); ++i) {
    img.pixels[static_cast<std::size_t>(i)] = std::clamp(row[i], 0.0, 1.0);
  }
  return img;
}

// ---------------------------------------------------------------------------

nn::TrainConfig AutoencoderConfig::default_train() {
  nn::TrainConfig c;
  c.optimizer = nn::OptimizerKind::kAdam;
  c.learning_rate = 1e-3;
  c.l2_lambda = 0.0;
  c.batch_size = 32;
  c.epochs = 40;
  return c;
}

double reconstruction_mse(const nn::MlpModel& ae_encoder, const nn::MlpModel& decoder,
                          const nn::Matrix& images, std::span<const Eigen::Index> rows) {
  if (rows.empty()) return 0.0;
  const nn::Matrix x = gather_rows(images, rows);
  const nn::Matrix recon = nn::predict(decoder, nn::predict(ae_encoder, x));
  return (recon - x).squaredNorm() / static_cast<double>(x.size());
}

AutoencoderResult train_autoencoder(const nn::Matrix& images, const AutoencoderConfig& config,
                                    const Split* split) {
  if (config.latent_dim <= 0) throw SpecError("autoencoder: latent_dim must be positive");
  if (config.hidden <= 0) throw SpecError("autoencoder: hidden width must be positive");
  if (images.rows() < kMinTrainingImages) {
    throw ValidationError("autoencoder: need at least " + std::to_string(kMinTrainingImages) +
                          " images, got " + std::to_string(images.rows()));
  }
  config.train.validate();
  const int px = static_cast<int>(images.cols());
  const std::vector<nn::LayerSpec> specs = {
      nn::LayerSpec::dense(px, config.hidden),
      nn::LayerSpec::tanh(config.hidden),
      nn::LayerSpec::dense(config.hidden, config.latent_dim),
      nn::LayerSpec::dense(config.latent_dim, config.hidden),
      nn::LayerSpec::tanh(config.hidden),
      nn::LayerSpec::dense(config.hidden, px),
      nn::LayerSpec::sigmoid(px),
  };
  const Split s = split != nullptr ? *split : make_split(images.rows(), config.train.seed);
  const nn::Matrix x = gather_rows(images, s.train);

  nn::MlpModel full = nn::init_model(specs, config.train.seed);
  AutoencoderResult result;
  result.loss_history = nn::train(full, x, x, nn::LossKind::kMse, config.train).loss_history;
  result.ae_encoder = full.slice(0, 3);
  result.decoder = full.slice(3, specs.size());
  result.train_pixel_mse = reconstruction_mse(result.ae_encoder, result.decoder, images, s.train);
  result.heldout_pixel_mse =
      reconstruction_mse(result.ae_encoder, result.decoder, images, s.heldout);
  return result;
}

// ---------------------------------------------------------------------------

nn::TrainConfig SphereEncoderConfig::default_train() {
  nn::TrainConfig c;
  c.optimizer = nn::OptimizerKind::kAdam;
  c.learning_rate = 1e-3;
  c.l2_lambda = 0.0;
  c.batch_size = 64;
  c.epochs = 30;
  return c;
}

namespace {

double target_chord(const Eigen::VectorXd& pa, const Eigen::VectorXd& pb, double scale) {
  const double geo = std::min(scale * (pa - pb).norm(), std::numbers::pi);
  return 2.0 * std::sin(0.5 * geo);
}

double target_geodesic(const Eigen::VectorXd& pa, const Eigen::VectorXd& pb, double scale) {
  return std::min(scale * (pa - pb).norm(), std::numbers::pi);
}

}  // namespace

std::vector<sphere::LatentVector> embed(const nn::MlpModel& encoder, const nn::Matrix& images) {
  const nn::Matrix raw = nn::predict(encoder, images);
  std::vector<sphere::LatentVector> out;
  out.reserve(static_cast<std::size_t>(raw.rows()));
  for (Eigen::Index r = 0; r < raw.rows(); ++r) out.push_back(sphere::normalize(raw.row(r).transpose()));
  return out;
}

sphere::LatentVector embed(const nn::MlpModel& encoder, const GlyphImage& image) {
  return embed(encoder, images_to_matrix(std::span<const GlyphImage>(&image, 1))).front();
}

double distance_rmse(const nn::MlpModel& encoder, const nn::Matrix& images,
                     std::span<const GlyphParams> params, std::span<const Eigen::Index> rows,
                     double scale) {
  if (rows.size() < 2) return 0.0;
  const auto z = embed(encoder, gather_rows(images, rows));
  std::vector<Eigen::VectorXd> p;
  for (auto r : rows) p.push_back(normalized_params(params[static_cast<std::size_t>(r)]));
  double ss = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = i + 1; j < rows.size(); ++j) {
      const double d = sphere::geodesic_distance(z[i], z[j]) - target_geodesic(p[i], p[j], scale);
      ss += d * d;
      ++count;
    }
  }
  return std::sqrt(ss / static_cast<double>(count));
}

SphereEncoderResult train_sphere_encoder(const nn::Matrix& images,
                                         std::span<const GlyphParams> params,
                                         const SphereEncoderConfig& config, const Split* split) {
  if (config.dim <= 1) throw SpecError("sphere encoder: dim must be at least 2");
  if (!(config.scale > 0.0)) throw SpecError("sphere encoder: scale must be positive");
  if (images.rows() < kMinTrainingImages) {
    throw ValidationError("sphere encoder: need at least " + std::to_string(kMinTrainingImages) +
                          " images, got " + std::to_string(images.rows()));
  }
  if (static_cast<std::size_t>(images.rows()) != params.size()) {
    throw ValidationError("sphere encoder: images and params differ in count");
  }
  config.train.validate();

  std::vector<nn::LayerSpec> specs;
  int prev = static_cast<int>(images.cols());
  for (int h : config.hidden) {
    specs.push_back(nn::LayerSpec::dense(prev, h));
    specs.push_back(nn::LayerSpec::tanh(h));
    prev = h;
  }
  specs.push_back(nn::LayerSpec::dense(prev, config.dim));

  const Split s = split != nullptr ? *split : make_split(images.rows(), config.train.seed);
  const nn::Matrix x = gather_rows(images, s.train);
  std::vector<Eigen::VectorXd> p;
  p.reserve(s.train.size());
  for (auto r : s.train) p.push_back(normalized_params(params[static_cast<std::size_t>(r)]));

  const double scale = config.scale;
  auto loss_fn = [&](const nn::Matrix& raw, std::span<const Eigen::Index> rows) {
    const Eigen::Index b = raw.rows();
    const Eigen::VectorXd norms = raw.rowwise().norm();
    nn::Matrix e = norms.cwiseInverse().asDiagonal() * raw;
    nn::Matrix de = nn::Matrix::Zero(b, raw.cols());
    double loss = 0.0;
    std::size_t pairs = 0;
    for (Eigen::Index i = 0; i < b; ++i) {
      const Eigen::VectorXd& pi = p[static_cast<std::size_t>(rows[static_cast<std::size_t>(i)])];
      for (Eigen::Index j = i + 1; j < b; ++j) {
        const Eigen::VectorXd& pj = p[static_cast<std::size_t>(rows[static_cast<std::size_t>(j)])];
        const Eigen::RowVectorXd diff = e.row(i) - e.row(j);
        const double chord = std::max(diff.norm(), 1e-12);
        const double r = chord - target_chord(pi, pj, scale);
        loss += r * r;
        const Eigen::RowVectorXd g = (2.0 * r / chord) * diff;
        de.row(i) += g;
        de.row(j) -= g;
        ++pairs;
      }
    }
    nn::LossResult out;
    const double inv = pairs > 0 ? 1.0 / static_cast<double>(pairs) : 0.0;
    out.data_loss = loss * inv;
    out.loss = out.data_loss;
    de *= inv;
    // Back through e = raw / |raw|.
    out.grad_pred.resize(b, raw.cols());
    for (Eigen::Index i = 0; i < b; ++i) {
      const double proj = e.row(i).dot(de.row(i));
      out.grad_pred.row(i) = (de.row(i) - proj * e.row(i)) / norms[i];
    }
    return out;
  };

  SphereEncoderResult result;
  result.encoder = nn::init_model(specs, config.train.seed);
  result.loss_history = nn::train_with_loss(result.encoder, x, loss_fn, config.train).loss_history;
  result.train_distance_rmse = distance_rmse(result.encoder, images, params, s.train, scale);
  result.heldout_distance_rmse = distance_rmse(result.encoder, images, params, s.heldout, scale);
  return result;
}

// ---------------------------------------------------------------------------

sphere::LatentVector CircleModels::encode(const GlyphImage& image) const {
  return embed(sphere_encoder, image);
}

std::vector<GlyphImage> CircleModels::decode(std::span<const sphere::LatentVector> zs) const {
  const nn::Matrix z2 = mapping::map_batch(mapping, zs);
  const nn::Matrix px = nn::predict(decoder, z2);
  std::vector<GlyphImage> out;
  out.reserve(zs.size());
  for (Eigen::Index r = 0; r < px.rows(); ++r) {
    out.push_back(image_from_row(px.row(r).transpose(), image_size, image_size));
  }
  return out;
}

GlyphImage CircleModels::decode(const sphere::LatentVector& z) const {
  return decode(std::span<const sphere::LatentVector>(&z, 1)).front();
}

double circle_mse(const CircleModels& circle, std::span<const GlyphImage> images) {
  if (images.empty()) return 0.0;
  const nn::Matrix x = images_to_matrix(images);
  const auto z = embed(circle.sphere_encoder, x);
  const nn::Matrix recon = nn::predict(circle.decoder, mapping::map_batch(circle.mapping, z));
  return (recon - x).squaredNorm() / static_cast<double>(x.size());
}

std::vector<mapping::MappingPair> mapping_pairs(const nn::MlpModel& sphere_encoder,
                                                const nn::MlpModel& ae_encoder,
                                                const nn::Matrix& images) {
  const auto z = embed(sphere_encoder, images);
  const nn::Matrix z2 = nn::predict(ae_encoder, images);
  std::vector<mapping::MappingPair> pairs;
  pairs.reserve(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) {
    pairs.push_back({z[i], z2.row(static_cast<Eigen::Index>(i)).transpose()});
  }
  return pairs;
}

}  // namespace spherewalk::toyworld
