// Copyright 2026 The spherewalk Authors.
// SPDX-License-Identifier: Apache-2.0

#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>
#include <thread>

#include "spherewalk/checkpoint.hpp"
#include "spherewalk/classifier.hpp"
#include "spherewalk/embeddings.hpp"
#include "spherewalk/errors.hpp"
#include "spherewalk/image.hpp"
#include "spherewalk/io.hpp"
#include "spherewalk/mapping.hpp"
#include "spherewalk/nn.hpp"
#include "spherewalk/rng.hpp"
#include "spherewalk/sphere.hpp"
#include "spherewalk/split.hpp"
#include "spherewalk/stats.hpp"
#include "spherewalk/toyworld.hpp"
#include "spherewalk/walk.hpp"

namespace spherewalk::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using toyworld::Attribute;

constexpr int kDatasetFormatVersion = 1;

// Seed streams derived from a command's --seed.
constexpr std::uint64_t kStreamSplit = 1;
constexpr std::uint64_t kStreamAutoencoder = 2;
constexpr std::uint64_t kStreamSphereEncoder = 3;
constexpr std::uint64_t kStreamMapping = 4;

struct Common {
  std::uint64_t seed = 1;
  std::string workspace = "workspace";
  std::string out;
  int jobs = 0;
  bool force = false;

  fs::path ws() const { return fs::path(workspace); }
  fs::path out_dir() const { return out.empty() ? ws() / "out" : fs::path(out); }
  fs::path model(const std::string& name) const { return ws() / "models" / (name + ".json"); }
  fs::path classifier(std::string_view attr) const {
    return model("classifier_" + std::string(attr));
  }
};

void add_common(CLI::App* cmd, Common& c, bool with_jobs = false) {
  cmd->add_option("--seed", c.seed, "Seed for every random choice in the command");
  cmd->add_option("--workspace", c.workspace, "Workspace directory");
  cmd->add_option("--out", c.out, "Output directory (default <workspace>/out)");
  if (with_jobs) cmd->add_option("--jobs", c.jobs, "Concurrent tasks (default: one per task)");
  cmd->add_flag("--force", c.force, "Overwrite existing checkpoints");
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Collects everything a run produced so the run can be audited and diffed.
class Manifest {
 public:
  Manifest(std::string command, const std::vector<std::string>& args, const Common& c)
      : command_(std::move(command)), root_(c.ws()) {
    doc_["command"] = command_;
    doc_["args"] = args;
    doc_["seed"] = c.seed;
    doc_["config"] = json::object();
    doc_["inputs"] = json::array();
    doc_["artifacts"] = json::array();
    doc_["timings_s"] = json::object();
  }

  json& config() { return doc_["config"]; }

  void input(const fs::path& path) {
    doc_["inputs"].push_back({{"path", rel(path)}, {"sha256", sha256_hex(read_file(path))}});
  }

  void write(const fs::path& path, const std::string& bytes) {
    write_file(path, bytes);
    doc_["artifacts"].push_back(
        {{"path", rel(path)}, {"sha256", sha256_hex(bytes)}, {"bytes", bytes.size()}});
  }

  void timing(const std::string& stage, double seconds) { doc_["timings_s"][stage] = seconds; }

  fs::path save(const fs::path& dir, const std::string& name) {
    doc_["timings_s"]["total"] = seconds_since(start_);
    const fs::path path = dir / "manifests" / (name + ".json");
    write_file(path, doc_.dump(2) + "\n");
    return path;
  }

 private:
  std::string rel(const fs::path& p) const {
    std::error_code ec;
    const fs::path r = fs::relative(p, root_, ec);
    if (ec || r.empty() || *r.begin() == "..") return p.generic_string();
    return r.generic_string();
  }

  std::string command_;
  fs::path root_;
  json doc_;
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

void guard_overwrite(const fs::path& path, const Common& c) {
  if (!c.force && fs::exists(path)) {
    throw ValidationError("refusing to overwrite " + path.string() + " (pass --force)");
  }
}

void require_file(const fs::path& path, const std::string& hint) {
  if (!fs::exists(path)) {
    throw ValidationError("missing " + path.string() + "; run `spherewalk " + hint + "` first");
  }
}

std::string fmt(double v, int precision = 6) {
  std::ostringstream os;
  os << std::setprecision(precision) << v;
  return os.str();
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : s) {
    if (ch == ',') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else if (ch != ' ') {
      cur += ch;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

// ---------------------------------------------------------------------------
// Workspace dataset

struct WorkspaceData {
  toyworld::ToyDataset data;
  Split split;
  nn::Matrix images;
};

std::string serialize_dataset(const toyworld::ToyDataset& ds, const Split& split) {
  json doc;
  doc["format_version"] = kDatasetFormatVersion;
  doc["seed"] = ds.seed;
  doc["n"] = ds.size();
  doc["image_size"] = ds.image_size;
  doc["attributes"] = json::array();
  for (Attribute a : toyworld::kAllAttributes) doc["attributes"].push_back(toyworld::to_string(a));
  doc["medians"] = ds.medians;
  doc["split"] = {{"train", split.train}, {"heldout", split.heldout}};
  json params = json::array();
  for (const auto& p : ds.params) {
    params.push_back({p.smile, p.eye_size, p.nose_size, p.face_width});
  }
  doc["params"] = params;
  return doc.dump() + "\n";
}

WorkspaceData load_dataset(const Common& c, Manifest* manifest) {
  const fs::path path = c.ws() / "dataset.json";
  require_file(path, "prepare");
  if (manifest) manifest->input(path);
  json doc;
  try {
    doc = json::parse(read_file(path));
    if (doc.at("format_version").get<int>() != kDatasetFormatVersion) {
      throw FormatError(path.string() + ": unsupported format_version");
    }
    WorkspaceData w;
    w.data = toyworld::sample_dataset(doc.at("n").get<int>(), doc.at("seed").get<std::uint64_t>(),
                                      doc.at("image_size").get<int>());
    w.split.train = doc.at("split").at("train").get<std::vector<Eigen::Index>>();
    w.split.heldout = doc.at("split").at("heldout").get<std::vector<Eigen::Index>>();
    const auto& params = doc.at("params");
    if (params.size() != w.data.size()) throw FormatError(path.string() + ": params count");
    for (std::size_t i = 0; i < params.size(); ++i) {
      const auto& p = w.data.params[i];
      if (params[i] != json({p.smile, p.eye_size, p.nose_size, p.face_width})) {
        throw FormatError(path.string() + ": params do not match the recorded seed");
      }
    }
    w.images = toyworld::images_to_matrix(w.data.images);
    return w;
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

std::string glyph_id(std::size_t i) {
  std::ostringstream os;
  os << "glyph-" << std::setw(5) << std::setfill('0') << i;
  return os.str();
}

EmbeddingDataset make_embeddings(const nn::MlpModel& encoder, const WorkspaceData& w) {
  EmbeddingDataset e;
  e.dim = encoder.output_dim();
  for (Attribute a : toyworld::kAllAttributes) e.attributes.emplace_back(toyworld::to_string(a));
  e.vectors = toyworld::embed(encoder, w.images);
  for (std::size_t i = 0; i < w.data.size(); ++i) {
    e.ids.push_back(glyph_id(i));
    e.labels.emplace_back(w.data.labels[i].begin(), w.data.labels[i].end());
  }
  return e;
}

// ---------------------------------------------------------------------------
// Circle models and image sources

struct Circle {
  toyworld::CircleModels models;
  std::optional<WorkspaceData> data;
};

Circle load_circle(const Common& c, Manifest& m) {
  Circle circle;
  for (const char* name : {"sphere_encoder", "decoder"}) require_file(c.model(name), "prepare");
  require_file(c.model("mapping"), "train-mapping");
  for (const char* name : {"sphere_encoder", "mapping", "decoder"}) m.input(c.model(name));
  circle.models.sphere_encoder = load_model(c.model("sphere_encoder"));
  circle.models.mapping = load_model(c.model("mapping"));
  circle.models.decoder = load_model(c.model("decoder"));
  const int px = circle.models.decoder.output_dim();
  circle.models.image_size = static_cast<int>(std::lround(std::sqrt(static_cast<double>(px))));
  return circle;
}

// A source is a dataset index or a path to a PGM image.
struct Source {
  std::string tag;
  GlyphImage image;
};

Source resolve_source(const std::string& spec, Circle& circle, const Common& c, Manifest& m) {
  if (spec.empty()) throw ValidationError("empty image source");
  const bool numeric = std::all_of(spec.begin(), spec.end(), [](char ch) {
    return ch >= '0' && ch <= '9';
  });
  if (numeric) {
    if (!circle.data) circle.data = load_dataset(c, &m);
    const std::size_t id = std::stoul(spec);
    if (id >= circle.data->data.size()) {
      throw ValidationError("image id " + spec + " out of range (dataset has " +
                            std::to_string(circle.data->data.size()) + " glyphs)");
    }
    return {spec, circle.data->data.images[id]};
  }
  const fs::path path(spec);
  if (!fs::exists(path)) throw ValidationError("image source '" + spec + "' is neither an id nor a file");
  m.input(path);
  Source s{path.stem().string(), read_pgm(path)};
  if (s.image.width != circle.models.image_size || s.image.height != circle.models.image_size) {
    throw ValidationError(spec + ": expected a " + std::to_string(circle.models.image_size) +
                          "x" + std::to_string(circle.models.image_size) + " image");
  }
  return s;
}

std::string measures_header() {
  std::string h;
  for (Attribute a : toyworld::kAllAttributes) h += "\t" + std::string(toyworld::to_string(a));
  return h;
}

std::string measures_row(const GlyphImage& img) {
  std::string r;
  for (Attribute a : toyworld::kAllAttributes) r += "\t" + fmt(toyworld::measure_attribute(img, a));
  return r;
}

// ---------------------------------------------------------------------------
// prepare

struct PrepareOptions {
  int n = 2000;
  int image_size = toyworld::kDefaultImageSize;
  int latent_dim = 64;
  int dim = sphere::kDefaultDim;
  int ae_epochs = toyworld::AutoencoderConfig::default_train().epochs;
  int encoder_epochs = toyworld::SphereEncoderConfig::default_train().epochs;
};

int cmd_prepare(const Common& c, const PrepareOptions& o, const std::vector<std::string>& args,
                std::ostream& out) {
  const fs::path dataset_path = c.ws() / "dataset.json";
  const fs::path embeddings_path = c.ws() / "embeddings.jsonl";
  for (const fs::path& p : {dataset_path, embeddings_path, c.model("ae_encoder"),
                            c.model("decoder"), c.model("sphere_encoder")}) {
    guard_overwrite(p, c);
  }
  Manifest m("prepare", args, c);
  m.config() = {{"n", o.n},
                {"image_size", o.image_size},
                {"latent_dim", o.latent_dim},
                {"dim", o.dim},
                {"ae_epochs", o.ae_epochs},
                {"encoder_epochs", o.encoder_epochs}};

  auto t0 = std::chrono::steady_clock::now();
  WorkspaceData w;
  w.data = toyworld::sample_dataset(o.n, c.seed, o.image_size);
  w.split = make_split(o.n, mix_seed(c.seed, kStreamSplit));
  w.images = toyworld::images_to_matrix(w.data.images);
  m.timing("render", seconds_since(t0));

  t0 = std::chrono::steady_clock::now();
  toyworld::AutoencoderConfig ac;
  ac.latent_dim = o.latent_dim;
  ac.train.epochs = o.ae_epochs;
  ac.train.seed = mix_seed(c.seed, kStreamAutoencoder);
  const auto ae = toyworld::train_autoencoder(w.images, ac, &w.split);
  m.timing("autoencoder", seconds_since(t0));

  t0 = std::chrono::steady_clock::now();
  toyworld::SphereEncoderConfig sc;
  sc.dim = o.dim;
  sc.train.epochs = o.encoder_epochs;
  sc.train.seed = mix_seed(c.seed, kStreamSphereEncoder);
  const auto se = toyworld::train_sphere_encoder(w.images, w.data.params, sc, &w.split);
  m.timing("sphere_encoder", seconds_since(t0));

  m.write(dataset_path, serialize_dataset(w.data, w.split));
  m.write(c.model("ae_encoder"),
          serialize_checkpoint({ae.ae_encoder, "ae_encoder", "",
                                {{"train_pixel_mse", ae.train_pixel_mse},
                                 {"heldout_pixel_mse", ae.heldout_pixel_mse}},
                                std::nullopt}));
  m.write(c.model("decoder"),
          serialize_checkpoint({ae.decoder, "decoder", "",
                                {{"train_pixel_mse", ae.train_pixel_mse},
                                 {"heldout_pixel_mse", ae.heldout_pixel_mse}},
                                std::nullopt}));
  m.write(c.model("sphere_encoder"),
          serialize_checkpoint({se.encoder, "sphere_encoder", "",
                                {{"train_distance_rmse", se.train_distance_rmse},
                                 {"heldout_distance_rmse", se.heldout_distance_rmse},
                                 {"scale", sc.scale}},
                                std::nullopt}));
  m.write(embeddings_path, serialize_embeddings(make_embeddings(se.encoder, w)));

  std::string report = "metric\tvalue\n";
  report += "ae_train_pixel_mse\t" + fmt(ae.train_pixel_mse) + "\n";
  report += "ae_heldout_pixel_mse\t" + fmt(ae.heldout_pixel_mse) + "\n";
  report += "encoder_train_distance_rmse\t" + fmt(se.train_distance_rmse) + "\n";
  report += "encoder_heldout_distance_rmse\t" + fmt(se.heldout_distance_rmse) + "\n";
  m.write(c.ws() / "reports" / "prepare.tsv", report);
  m.save(c.ws(), "prepare");
  out << report;
  return kExitOk;
}

// ---------------------------------------------------------------------------
// train-mapping

struct MappingOptions {
  int epochs = mapping::default_train_config().epochs;
  double l2 = mapping::default_train_config().l2_lambda;
  double learning_rate = mapping::default_train_config().learning_rate;
};

int cmd_train_mapping(const Common& c, const MappingOptions& o,
                      const std::vector<std::string>& args, std::ostream& out) {
  guard_overwrite(c.model("mapping"), c);
  Manifest m("train-mapping", args, c);
  const WorkspaceData w = load_dataset(c, &m);
  for (const char* name : {"ae_encoder", "decoder", "sphere_encoder"}) {
    require_file(c.model(name), "prepare");
    m.input(c.model(name));
  }
  const nn::MlpModel ae_encoder = load_model(c.model("ae_encoder"));
  const nn::MlpModel decoder = load_model(c.model("decoder"));
  const nn::MlpModel sphere_encoder = load_model(c.model("sphere_encoder"));

  mapping::MappingSpec spec;
  spec.in_dim = sphere_encoder.output_dim();
  spec.out_dim = ae_encoder.output_dim();
  nn::TrainConfig tc = mapping::default_train_config();
  tc.epochs = o.epochs;
  tc.l2_lambda = o.l2;
  tc.learning_rate = o.learning_rate;
  tc.seed = mix_seed(c.seed, kStreamMapping);
  m.config() = {{"epochs", tc.epochs},
                {"l2_lambda", tc.l2_lambda},
                {"learning_rate", tc.learning_rate},
                {"batch_size", tc.batch_size},
                {"optimizer", nn::to_string(tc.optimizer)},
                {"hidden", spec.hidden},
                {"batchnorm", spec.batchnorm}};

  const auto t0 = std::chrono::steady_clock::now();
  const auto pairs = toyworld::mapping_pairs(sphere_encoder, ae_encoder, w.images);
  const auto result = mapping::train_mapping(pairs, spec, tc, &w.split);
  m.timing("train", seconds_since(t0));

  const toyworld::CircleModels circle{sphere_encoder, result.model, decoder, w.data.image_size};
  std::vector<GlyphImage> heldout;
  for (auto r : w.split.heldout) heldout.push_back(w.data.images[static_cast<std::size_t>(r)]);
  const double circle_mse = toyworld::circle_mse(circle, heldout);
  const double ae_mse = toyworld::reconstruction_mse(ae_encoder, decoder, w.images, w.split.heldout);

  m.write(c.model("mapping"),
          serialize_checkpoint({result.model, "mapping", "",
                                {{"train_mse", result.train_mse},
                                 {"heldout_mse", result.heldout_mse},
                                 {"circle_heldout_pixel_mse", circle_mse},
                                 {"ae_heldout_pixel_mse", ae_mse}},
                                std::nullopt}));
  std::string report = "metric\tvalue\n";
  report += "mapping_train_mse\t" + fmt(result.train_mse) + "\n";
  report += "mapping_heldout_mse\t" + fmt(result.heldout_mse) + "\n";
  report += "circle_heldout_pixel_mse\t" + fmt(circle_mse) + "\n";
  report += "ae_heldout_pixel_mse\t" + fmt(ae_mse) + "\n";
  m.write(c.ws() / "reports" / "mapping.tsv", report);
  m.save(c.ws(), "train-mapping");
  out << report;
  return kExitOk;
}

// ---------------------------------------------------------------------------
// train-classifiers

struct ClassifierOptions {
  std::string attrs;
  std::string embeddings;
  int depth = 5;
  int width = 128;
  int epochs = classifier::default_train_config().epochs;
  double learning_rate = classifier::default_train_config().learning_rate;
  double l2 = classifier::default_train_config().l2_lambda;
};

int cmd_train_classifiers(const Common& c, const ClassifierOptions& o,
                          const std::vector<std::string>& args, std::ostream& out) {
  Manifest m("train-classifiers", args, c);
  EmbeddingDataset data;
  Split split;
  if (o.embeddings.empty()) {
    const fs::path path = c.ws() / "embeddings.jsonl";
    require_file(path, "prepare");
    const WorkspaceData w = load_dataset(c, &m);
    m.input(path);
    data = import_embeddings(path);
    if (data.size() != w.data.size()) {
      throw ValidationError(path.string() + " does not match dataset.json");
    }
    split = w.split;
  } else {
    m.input(o.embeddings);
    data = import_embeddings(o.embeddings);
    split = make_split(static_cast<Eigen::Index>(data.size()), mix_seed(c.seed, kStreamSplit));
  }

  std::vector<std::string> attrs = o.attrs.empty() ? data.attributes : split_list(o.attrs);
  if (attrs.empty()) throw ValidationError("no attributes to train");
  for (const auto& a : attrs) data.attribute_index(a);
  for (const auto& a : attrs) guard_overwrite(c.classifier(a), c);

  nn::TrainConfig base = classifier::default_train_config();
  base.epochs = o.epochs;
  base.learning_rate = o.learning_rate;
  base.l2_lambda = o.l2;
  classifier::ClassifierSpec spec;
  spec.depth = o.depth;
  spec.width = o.width;
  spec.validate();
  const int jobs = std::max(1, std::min<int>(c.jobs > 0 ? c.jobs : static_cast<int>(attrs.size()),
                                             static_cast<int>(attrs.size())));
  m.config() = {{"attributes", attrs},
                {"depth", spec.depth},
                {"width", spec.width},
                {"epochs", base.epochs},
                {"learning_rate", base.learning_rate},
                {"l2_lambda", base.l2_lambda},
                {"batch_size", base.batch_size},
                {"jobs", jobs}};

  // Task i trains attrs[i] with seed ^ i, so results do not depend on
  // scheduling.
  std::vector<std::optional<classifier::ClassifierResult>> results(attrs.size());
  std::vector<std::exception_ptr> errors(attrs.size());
  std::vector<double> timings(attrs.size(), 0.0);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < attrs.size(); i = next++) {
      try {
        const auto t0 = std::chrono::steady_clock::now();
        classifier::ClassifierSpec s = spec;
        s.attribute = attrs[i];
        nn::TrainConfig tc = base;
        tc.seed = c.seed ^ static_cast<std::uint64_t>(i);
        results[i] = classifier::train_classifier(data, attrs[i], s, tc, &split);
        timings[i] = seconds_since(t0);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  std::string report = "attribute\tdepth\twidth\tseed\ttrain_accuracy\theldout_accuracy\n";
  for (std::size_t i = 0; i < attrs.size(); ++i) {
    const auto& r = *results[i];
    m.write(c.classifier(attrs[i]),
            serialize_checkpoint({r.model, "classifier", attrs[i],
                                  {{"train_accuracy", r.train_accuracy},
                                   {"heldout_accuracy", r.heldout_accuracy}},
                                  std::nullopt}));
    m.timing("classifier_" + attrs[i], timings[i]);
    report += attrs[i] + "\t" + std::to_string(spec.depth) + "\t" + std::to_string(spec.width) +
              "\t" + std::to_string(c.seed ^ i) + "\t" + fmt(r.train_accuracy) + "\t" +
              fmt(r.heldout_accuracy) + "\n";
  }
  m.write(c.ws() / "reports" / "classifiers.tsv", report);
  m.save(c.ws(), "train-classifiers");
  out << report;
  return kExitOk;
}

// ---------------------------------------------------------------------------
// walk

struct WalkOptions {
  std::string source;
  std::string attr = "smile";
  int y = 1;
  walk::WalkConfig config;
  int top_dims = 16;
};

int cmd_walk(const Common& c, const WalkOptions& o, const std::vector<std::string>& args,
             std::ostream& out) {
  Manifest m("walk", args, c);
  Circle circle = load_circle(c, m);
  const Attribute attr = toyworld::parse_attribute(o.attr);
  require_file(c.classifier(o.attr), "train-classifiers --attrs " + o.attr);
  m.input(c.classifier(o.attr));
  const nn::MlpModel cls = load_model(c.classifier(o.attr));
  const Source src = resolve_source(o.source, circle, c, m);

  walk::WalkConfig cfg = o.config;
  cfg.target = o.y;
  cfg.validate();
  m.config() = {{"source", o.source},
                {"attribute", o.attr},
                {"y", cfg.target},
                {"step_arc", cfg.step_arc},
                {"iterations", cfg.iterations},
                {"snapshot_every", cfg.snapshot_every},
                {"stop_loss", cfg.stop_loss},
                {"grad_floor", cfg.grad_floor}};

  const auto t0 = std::chrono::steady_clock::now();
  const sphere::LatentVector z0 = circle.models.encode(src.image);
  const walk::Trajectory traj = walk::semantic_walk(cls, z0, cfg);
  m.timing("walk", seconds_since(t0));
  const auto decoded = circle.models.decode(traj.snapshots);

  const std::string prefix = "walk_" + o.attr + "_y" + std::to_string(o.y) + "_" + src.tag;
  const fs::path dir = c.out_dir();
  m.write(dir / (prefix + ".trajectory.json"), walk::serialize_trajectory(traj));
  const std::vector<std::vector<GlyphImage>> rows = {decoded};
  m.write(dir / (prefix + ".pgm"), encode_pgm(make_grid(rows)));

  std::string table = "snapshot\titeration\tprobability" + measures_header() + "\n";
  Eigen::VectorXd grad_mass = Eigen::VectorXd::Zero(z0.dim());
  for (std::size_t k = 0; k < traj.snapshots.size(); ++k) {
    const auto e = classifier::evaluate(cls, traj.snapshots[k], cfg.target);
    grad_mass += e.gradient.cwiseAbs();
    table += std::to_string(k) + "\t" + std::to_string(traj.snapshot_iterations[k]) + "\t" +
             fmt(e.probability) + measures_row(decoded[k]) + "\n";
  }
  m.write(dir / (prefix + ".snapshots.tsv"), table);

  // Which latent dimensions carry the classifier gradient along the walk.
  // A diagnostic only.
  std::vector<int> order(static_cast<std::size_t>(z0.dim()));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return grad_mass[a] > grad_mass[b]; });
  const double total = grad_mass.sum();
  std::string dims = "rank\tdim\tmean_abs_gradient\tshare\n";
  const int top = std::min<int>(o.top_dims, z0.dim());
  for (int r = 0; r < top; ++r) {
    const int d = order[static_cast<std::size_t>(r)];
    dims += std::to_string(r + 1) + "\t" + std::to_string(d) + "\t" +
            fmt(grad_mass[d] / static_cast<double>(traj.snapshots.size())) + "\t" +
            fmt(total > 0.0 ? grad_mass[d] / total : 0.0) + "\n";
  }
  m.write(dir / (prefix + ".gradient_dims.tsv"), dims);
  m.save(dir, prefix);

  out << "attribute " << o.attr << " y=" << o.y << " iterations " << traj.iterations()
      << " reason " << walk::to_string(traj.reason) << "\n";
  if (!traj.diagnostic.empty()) out << "diagnostic: " << traj.diagnostic << "\n";
  out << "measured " << o.attr << ": "
      << fmt(toyworld::measure_attribute(decoded.front(), attr), 4) << " -> "
      << fmt(toyworld::measure_attribute(decoded.back(), attr), 4) << "\n";
  out << table;
  return kExitOk;
}

// ---------------------------------------------------------------------------
// interpolate / average / arith

struct InterpolateOptions {
  std::string a;
  std::string b;
  int steps = 10;
  std::string method = "both";
};

int cmd_interpolate(const Common& c, const InterpolateOptions& o,
                    const std::vector<std::string>& args, std::ostream& out) {
  Manifest m("interpolate", args, c);
  Circle circle = load_circle(c, m);
  const Source sa = resolve_source(o.a, circle, c, m);
  const Source sb = resolve_source(o.b, circle, c, m);
  std::vector<sphere::InterpolationMethod> methods;
  if (o.method == "both") {
    methods = {sphere::InterpolationMethod::kSlerp, sphere::InterpolationMethod::kLerpRenorm};
  } else {
    methods = {sphere::parse_interpolation_method(o.method)};
  }
  m.config() = {{"a", o.a}, {"b", o.b}, {"steps", o.steps}, {"method", o.method}};

  const sphere::LatentVector za = circle.models.encode(sa.image);
  const sphere::LatentVector zb = circle.models.encode(sb.image);
  std::vector<std::vector<sphere::LatentVector>> paths;
  std::vector<std::vector<GlyphImage>> rows;
  std::string table = "method\tstep\tgeodesic_from_a" + measures_header() + "\n";
  for (auto method : methods) {
    paths.push_back(sphere::interpolation_path(za, zb, o.steps, method));
    rows.push_back(circle.models.decode(paths.back()));
    for (std::size_t k = 0; k < paths.back().size(); ++k) {
      table += std::string(sphere::to_string(method)) + "\t" + std::to_string(k) + "\t" +
               fmt(sphere::geodesic_distance(za, paths.back()[k])) +
               measures_row(rows.back()[k]) + "\n";
    }
  }
  const std::string prefix = "interpolate_" + sa.tag + "_" + sb.tag;
  const fs::path dir = c.out_dir();
  m.write(dir / (prefix + ".pgm"), encode_pgm(make_grid(rows)));
  m.write(dir / (prefix + ".tsv"), table);
  m.save(dir, prefix);

  out << "geodesic distance " << fmt(sphere::geodesic_distance(za, zb)) << "\n";
  if (paths.size() == 2) {
    double dev = 0.0;
    for (std::size_t k = 0; k < paths[0].size(); ++k) {
      dev = std::max(dev, sphere::geodesic_distance(paths[0][k], paths[1][k]));
    }
    out << "max slerp/lerp_renorm deviation " << fmt(dev) << "\n";
  }
  out << table;
  return kExitOk;
}

struct AverageOptions {
  std::string ids;
  int random = 0;
};

int cmd_average(const Common& c, const AverageOptions& o, const std::vector<std::string>& args,
                std::ostream& out) {
  Manifest m("average", args, c);
  Circle circle = load_circle(c, m);
  std::vector<sphere::LatentVector> zs;
  std::vector<GlyphImage> inputs;
  std::string tag;
  if (!o.ids.empty() && o.random > 0) throw ValidationError("pass either --ids or --random");
  if (o.random > 0) {
    Rng rng(c.seed);
    const int d = circle.models.sphere_encoder.output_dim();
    for (int i = 0; i < o.random; ++i) zs.push_back(sphere::random_unit(d, rng));
    tag = "random" + std::to_string(o.random);
  } else {
    const auto ids = split_list(o.ids);
    if (ids.empty()) throw ValidationError("average needs --ids or --random");
    for (const auto& id : ids) {
      const Source s = resolve_source(id, circle, c, m);
      inputs.push_back(s.image);
      zs.push_back(circle.models.encode(s.image));
    }
    tag = "ids" + std::to_string(ids.size());
  }
  m.config() = {{"ids", o.ids}, {"random", o.random}};

  const sphere::LatentVector mean = sphere::spherical_mean(zs);
  const double lin_norm = sphere::linear_mean_norm(zs);
  Eigen::VectorXd lin = Eigen::VectorXd::Zero(mean.dim());
  for (const auto& z : zs) lin += z.values();
  lin /= static_cast<double>(zs.size());

  // Row 1: inputs (when images were given). Row 2: spherical mean, raw
  // linear mean and renormalized linear mean.
  std::vector<std::vector<GlyphImage>> rows;
  if (!inputs.empty()) {
    std::vector<GlyphImage> recon;
    for (const auto& z : zs) recon.push_back(circle.models.decode(z));
    rows.push_back(recon);
  }
  const nn::Matrix raw_px =
      nn::predict(circle.models.decoder, nn::predict(circle.models.mapping, lin.transpose()));
  std::vector<GlyphImage> means = {
      circle.models.decode(mean),
      toyworld::image_from_row(raw_px.row(0).transpose(), circle.models.image_size,
                               circle.models.image_size)};
  if (lin.norm() > sphere::kDegenerateNorm) means.push_back(circle.models.decode(sphere::normalize(lin)));
  rows.push_back(means);

  std::string table = "image" + measures_header() + "\n";
  table += "spherical_mean" + measures_row(means[0]) + "\n";
  table += "linear_mean" + measures_row(means[1]) + "\n";
  if (means.size() > 2) table += "linear_mean_renormalized" + measures_row(means[2]) + "\n";
  const std::string prefix = "average_" + tag;
  const fs::path dir = c.out_dir();
  m.write(dir / (prefix + ".pgm"), encode_pgm(make_grid(rows)));
  m.write(dir / (prefix + ".tsv"), table);
  m.save(dir, prefix);

  out << "n " << zs.size() << "\nlinear_mean_norm " << fmt(lin_norm) << "\nspherical_mean_norm "
      << fmt(mean.values().norm(), 17) << "\n"
      << table;
  return kExitOk;
}

struct ArithOptions {
  std::string a, b, c;
};

int cmd_arith(const Common& c, const ArithOptions& o, const std::vector<std::string>& args,
              std::ostream& out) {
  Manifest m("arith", args, c);
  Circle circle = load_circle(c, m);
  const Source sa = resolve_source(o.a, circle, c, m);
  const Source sb = resolve_source(o.b, circle, c, m);
  const Source sc = resolve_source(o.c, circle, c, m);
  m.config() = {{"a", o.a}, {"b", o.b}, {"c", o.c}};
  const auto za = circle.models.encode(sa.image);
  const auto zb = circle.models.encode(sb.image);
  const auto zc = circle.models.encode(sc.image);
  const auto zr = sphere::latent_arithmetic(za, zb, zc);
  const std::vector<sphere::LatentVector> zs = {za, zb, zc, zr};
  const auto decoded = circle.models.decode(zs);

  std::string table = "image" + measures_header() + "\n";
  const char* names[] = {"a", "b", "c", "a-b+c"};
  for (std::size_t i = 0; i < decoded.size(); ++i) table += names[i] + measures_row(decoded[i]) + "\n";
  const std::string prefix = "arith_" + sa.tag + "_" + sb.tag + "_" + sc.tag;
  const fs::path dir = c.out_dir();
  const std::vector<std::vector<GlyphImage>> rows = {decoded};
  m.write(dir / (prefix + ".pgm"), encode_pgm(make_grid(rows)));
  m.write(dir / (prefix + ".tsv"), table);
  m.save(dir, prefix);
  out << table;
  return kExitOk;
}

// ---------------------------------------------------------------------------
// eval-collapse

struct CollapseOptions {
  std::string n_list = "1,4,16,60,64";
  int trials = 1000;
  int dim = sphere::kDefaultDim;
};

int cmd_eval_collapse(const Common& c, const CollapseOptions& o,
                      const std::vector<std::string>& args, std::ostream& out) {
  if (o.trials < 2) throw ValidationError("eval-collapse: need at least 2 trials");
  Manifest m("eval-collapse", args, c);
  m.config() = {{"n", o.n_list}, {"trials", o.trials}, {"dim", o.dim}};
  std::string table =
      "n\ttrials\tmean_linear_norm\tstandard_error\tinv_sqrt_n\tspherical_norm_min\t"
      "spherical_norm_max\n";
  for (const auto& item : split_list(o.n_list)) {
    const int n = std::stoi(item);
    if (n < 1) throw ValidationError("eval-collapse: n must be positive");
    Rng rng(mix_seed(c.seed, static_cast<std::uint64_t>(n)));
    std::vector<double> norms;
    double smin = 2.0, smax = 0.0;
    for (int t = 0; t < o.trials; ++t) {
      std::vector<sphere::LatentVector> zs;
      for (int i = 0; i < n; ++i) zs.push_back(sphere::random_unit(o.dim, rng));
      norms.push_back(sphere::linear_mean_norm(zs));
      const double sn = sphere::spherical_mean(zs).values().norm();
      smin = std::min(smin, sn);
      smax = std::max(smax, sn);
    }
    table += std::to_string(n) + "\t" + std::to_string(o.trials) + "\t" +
             fmt(stats::mean(norms), 8) + "\t" + fmt(stats::standard_error(norms), 4) + "\t" +
             fmt(1.0 / std::sqrt(static_cast<double>(n)), 8) + "\t" + fmt(smin, 17) + "\t" +
             fmt(smax, 17) + "\n";
  }
  const fs::path dir = c.out_dir();
  m.write(dir / "collapse.tsv", table);
  m.save(dir, "eval-collapse");
  out << table;
  return kExitOk;
}

// ---------------------------------------------------------------------------
// gradcheck

struct GradcheckOptions {
  int seeds = 5;
  bool corrupt_backward = false;
};

struct KindCheck {
  std::string kind;
  double tolerance;
  double worst = 0.0;
  std::size_t parameters = 0;
};

int cmd_gradcheck(const Common& c, const GradcheckOptions& o, std::ostream& out) {
  using nn::LayerSpec;
  struct Case {
    std::string kind;
    double tolerance;
    std::vector<LayerSpec> specs;
    nn::LossKind loss;
    nn::Mode mode;
  };
  const std::vector<Case> cases = {
      {"dense", 1e-4, {LayerSpec::dense(6, 5), LayerSpec::dense(5, 3)}, nn::LossKind::kMse,
       nn::Mode::kInference},
      {"tanh", 1e-4,
       {LayerSpec::dense(6, 5), LayerSpec::tanh(5), LayerSpec::dense(5, 3)},
       nn::LossKind::kMse, nn::Mode::kInference},
      {"sigmoid", 1e-4,
       {LayerSpec::dense(6, 4), LayerSpec::tanh(4), LayerSpec::dense(4, 1), LayerSpec::sigmoid(1)},
       nn::LossKind::kBce, nn::Mode::kInference},
      {"batchnorm", 1e-3,
       {LayerSpec::dense(6, 5), LayerSpec::batchnorm(5), LayerSpec::tanh(5), LayerSpec::dense(5, 2)},
       nn::LossKind::kMse, nn::Mode::kTraining},
  };
  nn::GradientTamper tamper;
  if (o.corrupt_backward) {
    tamper = [](nn::Gradients& g) { g.layers.front().weight *= 1.01; };
  }
  bool ok = true;
  out << "kind\tworst_relative_error\ttolerance\tparameters\tstatus\n";
  for (std::size_t k = 0; k < cases.size(); ++k) {
    const Case& cs = cases[k];
    KindCheck r{cs.kind, cs.tolerance};
    for (int s = 0; s < o.seeds; ++s) {
      const std::uint64_t seed = mix_seed(c.seed, k * 1000 + static_cast<std::uint64_t>(s));
      nn::MlpModel model = nn::init_model(cs.specs, seed);
      model.set_mode(cs.mode);
      Rng rng(mix_seed(seed, 1));
      const int rows = 8;
      nn::Matrix x(rows, cs.specs.front().in_dim);
      for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = rng.normal();
      nn::Matrix t(rows, cs.specs.back().out_dim);
      for (Eigen::Index i = 0; i < t.size(); ++i) {
        t(i) = cs.loss == nn::LossKind::kBce ? static_cast<double>(rng.index(2)) : rng.normal();
      }
      const auto rep = nn::gradient_check_report(model, x, t, cs.loss, 1e-6, tamper);
      r.worst = std::max(r.worst, rep.max_error());
      r.parameters += rep.parameters_checked;
    }
    const bool pass = r.worst < r.tolerance;
    ok = ok && pass;
    out << r.kind << "\t" << fmt(r.worst, 3) << "\t" << fmt(r.tolerance, 2) << "\t"
        << r.parameters << "\t" << (pass ? "ok" : "FAIL") << "\n";
  }
  return ok ? kExitOk : kExitNumeric;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Semantic walks on a unit-hypersphere latent space, checked in a toy glyph world",
               "spherewalk"};
  app.require_subcommand(1);
  Common common;

  PrepareOptions prepare;
  auto* c_prepare = app.add_subcommand("prepare", "Render the dataset, train autoencoder and sphere encoder");
  add_common(c_prepare, common);
  c_prepare->add_option("--n", prepare.n, "Number of glyphs");
  c_prepare->add_option("--image-size", prepare.image_size, "Glyph side in pixels");
  c_prepare->add_option("--latent-dim", prepare.latent_dim, "Autoencoder latent width");
  c_prepare->add_option("--dim", prepare.dim, "Sphere dimension d");
  c_prepare->add_option("--ae-epochs", prepare.ae_epochs, "Autoencoder epochs");
  c_prepare->add_option("--encoder-epochs", prepare.encoder_epochs, "Sphere encoder epochs");

  MappingOptions mapping_opts;
  auto* c_mapping = app.add_subcommand("train-mapping", "Train the sphere -> decoder-latent mapping");
  add_common(c_mapping, common);
  c_mapping->add_option("--epochs", mapping_opts.epochs, "Training epochs");
  c_mapping->add_option("--l2", mapping_opts.l2, "L2 weight");
  c_mapping->add_option("--lr", mapping_opts.learning_rate, "Adam learning rate");

  ClassifierOptions cls_opts;
  auto* c_cls = app.add_subcommand("train-classifiers", "Train one attribute classifier per attribute");
  add_common(c_cls, common, true);
  c_cls->add_option("--attrs", cls_opts.attrs, "Comma-separated attributes (default: all)");
  c_cls->add_option("--embeddings", cls_opts.embeddings, "Train on an external embedding file");
  c_cls->add_option("--depth", cls_opts.depth, "Dense layers, 4..7");
  c_cls->add_option("--width", cls_opts.width, "Hidden width");
  c_cls->add_option("--epochs", cls_opts.epochs, "Training epochs");
  c_cls->add_option("--lr", cls_opts.learning_rate, "Adam learning rate");
  c_cls->add_option("--l2", cls_opts.l2, "L2 weight");

  WalkOptions walk_opts;
  auto* c_walk = app.add_subcommand("walk", "Walk a glyph's latent toward or away from an attribute");
  add_common(c_walk, common);
  c_walk->add_option("--image", walk_opts.source, "Dataset id or PGM path")->required();
  c_walk->add_option("--attr", walk_opts.attr, "Attribute");
  c_walk->add_option("--y", walk_opts.y, "Target label 0 or 1");
  c_walk->add_option("--delta", walk_opts.config.step_arc, "Geodesic step per iteration (rad)");
  c_walk->add_option("--iterations", walk_opts.config.iterations, "Iterations");
  c_walk->add_option("--snapshot-every", walk_opts.config.snapshot_every, "Snapshot period");
  c_walk->add_option("--stop-loss", walk_opts.config.stop_loss, "Early stop threshold (0 disables)");
  c_walk->add_option("--top-dims", walk_opts.top_dims, "Rows in the gradient-dimension report");

  InterpolateOptions interp;
  auto* c_interp = app.add_subcommand("interpolate", "Interpolate between two glyphs on the sphere");
  add_common(c_interp, common);
  c_interp->add_option("--a", interp.a, "Dataset id or PGM path")->required();
  c_interp->add_option("--b", interp.b, "Dataset id or PGM path")->required();
  c_interp->add_option("--steps", interp.steps, "Points including endpoints");
  c_interp->add_option("--method", interp.method, "slerp, lerp_renorm or both");

  AverageOptions avg;
  auto* c_avg = app.add_subcommand("average", "Spherical and linear means of several latents");
  add_common(c_avg, common);
  c_avg->add_option("--ids", avg.ids, "Comma-separated dataset ids or PGM paths");
  c_avg->add_option("--random", avg.random, "Average this many random unit latents instead");

  ArithOptions arith;
  auto* c_arith = app.add_subcommand("arith", "Decode normalize(a - b + c)");
  add_common(c_arith, common);
  c_arith->add_option("--a", arith.a, "Dataset id or PGM path")->required();
  c_arith->add_option("--b", arith.b, "Dataset id or PGM path")->required();
  c_arith->add_option("--c", arith.c, "Dataset id or PGM path")->required();

  CollapseOptions collapse;
  auto* c_collapse = app.add_subcommand("eval-collapse", "Mean-collapse study on random unit vectors");
  add_common(c_collapse, common);
  c_collapse->add_option("--n", collapse.n_list, "Comma-separated sample counts");
  c_collapse->add_option("--trials", collapse.trials, "Trials per n");
  c_collapse->add_option("--dim", collapse.dim, "Dimension");

  GradcheckOptions gc;
  auto* c_gc = app.add_subcommand("gradcheck", "Backprop vs central differences per layer kind");
  add_common(c_gc, common);
  c_gc->add_option("--seeds", gc.seeds, "Random models per layer kind");
  c_gc->add_flag("--corrupt-backward", gc.corrupt_backward)->group("");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  }

  try {
    if (c_prepare->parsed()) return cmd_prepare(common, prepare, args, out);
    if (c_mapping->parsed()) return cmd_train_mapping(common, mapping_opts, args, out);
    if (c_cls->parsed()) return cmd_train_classifiers(common, cls_opts, args, out);
    if (c_walk->parsed()) return cmd_walk(common, walk_opts, args, out);
    if (c_interp->parsed()) return cmd_interpolate(common, interp, args, out);
    if (c_avg->parsed()) return cmd_average(common, avg, args, out);
    if (c_arith->parsed()) return cmd_arith(common, arith, args, out);
    if (c_collapse->parsed()) return cmd_eval_collapse(common, collapse, args, out);
    if (c_gc->parsed()) return cmd_gradcheck(common, gc, out);
  } catch (const NumericError& e) {
    err << "numeric error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const StaleCacheError& e) {
    err << "numeric error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  return kExitValidation;
}

int run(int argc, const char* const* argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, std::cout, std::cerr);
}

}  // namespace spherewalk::cli
