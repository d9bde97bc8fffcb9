// Copyright 2026 The spherewalk Authors.
// SPDX-License-Identifier: Apache-2.0

// A procedural glyph world that closes the encode -> edit -> decode circle at
// desk scale. Glyphs are face-like line drawings driven by four continuous
// attributes; a pixel-space measurement recovers each attribute, so any
// edit made in latent space can be checked against ground truth.

#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "spherewalk/image.hpp"
#include "spherewalk/mapping.hpp"
#include "spherewalk/nn.hpp"
#include "spherewalk/sphere.hpp"
#include "spherewalk/split.hpp"

namespace spherewalk::toyworld {

enum class Attribute { kSmile, kEyeSize, kNoseSize, kFaceWidth };

inline constexpr std::array<Attribute, 4> kAllAttributes = {
    Attribute::kSmile, Attribute::kEyeSize, Attribute::kNoseSize, Attribute::kFaceWidth};

std::string_view to_string(Attribute a);
/// Throws ValidationError for an unknown name.
Attribute parse_attribute(std::string_view name);

struct Range {
  double lo;
  double hi;
};

struct GlyphParams {
  double smile = 0.0;       // [-1, 1], mouth curvature
  double eye_size = 1.0;    // [0.5, 1.5]
  double nose_size = 1.0;   // [0.5, 1.5]
  double face_width = 1.0;  // [0.7, 1.3]

  static Range range(Attribute a);
  double get(Attribute a) const;
  void set(Attribute a, double value);
  /// Throws ValidationError when any attribute is out of range.
  void validate() const;
};

/// Each attribute mapped linearly onto [-1, 1].
Eigen::VectorXd normalized_params(const GlyphParams& p);

inline constexpr int kDefaultImageSize = 32;

/// Deterministic rendering: an elliptical face outline whose width scales
/// with face_width, two filled eyes of radius proportional to eye_size, a
/// filled nose triangle scaled by nose_size and a mouth arc whose sag is
/// proportional to smile. Ink is black on white. Each pixel averages a 2x2
/// grid of point samples, so values are exact multiples of 1/4. Geometry is
/// laid out on a 32-unit canvas and scaled to `size`.
GlyphImage render_glyph(const GlyphParams& params, int size = kDefaultImageSize);

/// Estimates an attribute from pixels alone, using ink (1 - value) in a
/// fixed region per attribute:
///   smile      - ink-weighted mean row of the mouth centre columns minus
///                that of the mouth corner columns, divided by the sag gain;
///   eye_size   - sqrt of total ink inside both eye discs, in radius units;
///   nose_size  - sqrt of total ink in the nose box over the triangle area;
///   face_width - ink-weighted mean |x - centre| of the outline at cheek
///                height over the nominal half-width.
/// Estimates are on the parameter's own scale but are only guaranteed to
/// be monotone in it.
double measure_attribute(const GlyphImage& image, Attribute a);

struct ToyDataset {
  std::uint64_t seed = 0;
  int image_size = kDefaultImageSize;
  std::vector<GlyphParams> params;
  std::vector<GlyphImage> images;
  std::array<double, 4> medians{};
  /// labels[i][a] = 1 iff params[i] attribute a exceeds the sample median.
  std::vector<std::array<int, 4>> labels;

  std::size_t size() const { return params.size(); }
};

inline constexpr int kMinDatasetSize = 100;

/// n i.i.d. uniform parameter draws from `seed`, rendered, labelled by a
/// per-attribute median split. Throws ValidationError for n < 100.
ToyDataset sample_dataset(int n, std::uint64_t seed, int image_size = kDefaultImageSize);

/// One flattened image per row.
nn::Matrix images_to_matrix(std::span<const GlyphImage> images);
GlyphImage image_from_row(const Eigen::VectorXd& row, int width, int height);

// ---------------------------------------------------------------------------
// Autoencoder (the decoder-side latent space)

struct AutoencoderConfig {
  int latent_dim = 64;
  int hidden = 256;
  nn::TrainConfig train = default_train();

  static nn::TrainConfig default_train();
};

struct AutoencoderResult {
  nn::MlpModel ae_encoder;  // pixels -> latent
  nn::MlpModel decoder;     // latent -> pixels (sigmoid)
  double train_pixel_mse = 0.0;
  double heldout_pixel_mse = 0.0;
  std::vector<double> loss_history;
};

inline constexpr int kMinTrainingImages = 500;

/// MLP autoencoder pixels -> hidden (tanh) -> latent (linear) -> hidden
/// (tanh) -> pixels (sigmoid), trained with MSE on the training rows of
/// `split` (a seeded 90/10 split when null). Per-pixel MSE is reported.
AutoencoderResult train_autoencoder(const nn::Matrix& images, const AutoencoderConfig& config,
                                    const Split* split = nullptr);

/// Per-pixel MSE of decoder(encoder(x)) over `rows`.
double reconstruction_mse(const nn::MlpModel& ae_encoder, const nn::MlpModel& decoder,
                          const nn::Matrix& images, std::span<const Eigen::Index> rows);

// ---------------------------------------------------------------------------
// Sphere encoder (the metric embedding space)

struct SphereEncoderConfig {
  int dim = sphere::kDefaultDim;
  std::vector<int> hidden = {256};
  /// Target geodesic distance per unit of normalized-parameter distance.
  double scale = 0.5;
  nn::TrainConfig train = default_train();

  static nn::TrainConfig default_train();
};

struct SphereEncoderResult {
  nn::MlpModel encoder;  // raw head; embed() normalizes its output
  double train_distance_rmse = 0.0;
  double heldout_distance_rmse = 0.0;
  std::vector<double> loss_history;
};

/// Trains normalize(MLP(pixels)) so that chord distances between embeddings
/// match 2 sin(min(scale * |dp|, pi) / 2), dp being the difference of
/// normalized parameters: the geodesic distance is pulled toward
/// scale * |dp|. Pairs are all pairs within each minibatch.
SphereEncoderResult train_sphere_encoder(const nn::Matrix& images,
                                         std::span<const GlyphParams> params,
                                         const SphereEncoderConfig& config,
                                         const Split* split = nullptr);

/// Unit embeddings of each image row.
std::vector<sphere::LatentVector> embed(const nn::MlpModel& encoder, const nn::Matrix& images);
sphere::LatentVector embed(const nn::MlpModel& encoder, const GlyphImage& image);

/// RMS of (geodesic distance - target distance) over all pairs of `rows`.
double distance_rmse(const nn::MlpModel& encoder, const nn::Matrix& images,
                     std::span<const GlyphParams> params, std::span<const Eigen::Index> rows,
                     double scale);

// ---------------------------------------------------------------------------
// The circle: image -> sphere latent -> mapping -> decoder latent -> image

struct CircleModels {
  nn::MlpModel sphere_encoder;
  nn::MlpModel mapping;
  nn::MlpModel decoder;
  int image_size = kDefaultImageSize;

  sphere::LatentVector encode(const GlyphImage& image) const;
  GlyphImage decode(const sphere::LatentVector& z) const;
  std::vector<GlyphImage> decode(std::span<const sphere::LatentVector> zs) const;
  GlyphImage reconstruct(const GlyphImage& image) const { return decode(encode(image)); }
};

/// Per-pixel MSE between images and their circle reconstructions.
double circle_mse(const CircleModels& circle, std::span<const GlyphImage> images);

/// (sphere embedding, autoencoder latent) pairs for the mapping.
std::vector<mapping::MappingPair> mapping_pairs(const nn::MlpModel& sphere_encoder,
                                                const nn::MlpModel& ae_encoder,
                                                const nn::Matrix& images);

}  // namespace spherewalk::toyworld
