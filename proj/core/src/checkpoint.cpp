// Copyright 2026 The spherewalk Authors.
// SPDX-License-Identifier: Apache-2.0

#include "spherewalk/checkpoint.hpp"

#include <json.hpp>

#include "spherewalk/errors.hpp"
#include "spherewalk/io.hpp"

namespace spherewalk {
namespace {

using nlohmann::json;
using nn::Layer;
using nn::LayerKind;
using nn::LayerSpec;

json to_json(const nn::Vector& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

json row_major(const nn::Matrix& m) {
  json arr = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) arr.push_back(m(r, c));
  return arr;
}

const json& field(const json& obj, const char* name, const std::string& where) {
  if (!obj.is_object()) throw FormatError(where + ": expected an object");
  auto it = obj.find(name);
  if (it == obj.end()) throw FormatError(where + ": missing field '" + name + "'");
  return *it;
}

nn::Vector vector_from(const json& arr, Eigen::Index size, const std::string& where) {
  if (!arr.is_array() || static_cast<Eigen::Index>(arr.size()) != size) {
    throw FormatError(where + ": expected an array of " + std::to_string(size) + " numbers");
  }
  nn::Vector v(size);
  for (Eigen::Index i = 0; i < size; ++i) {
    const json& x = arr[static_cast<std::size_t>(i)];
    if (!x.is_number()) throw FormatError(where + ": non-numeric entry");
    v[i] = x.get<double>();
  }
  return v;
}

std::vector<double> doubles_from(const json& arr, const std::string& where) {
  if (!arr.is_array()) throw FormatError(where + ": expected an array");
  std::vector<double> out;
  out.reserve(arr.size());
  for (const json& x : arr) {
    if (!x.is_number()) throw FormatError(where + ": non-numeric entry");
    out.push_back(x.get<double>());
  }
  return out;
}

int int_field(const json& obj, const char* name, const std::string& where) {
  const json& v = field(obj, name, where);
  if (!v.is_number_integer()) throw FormatError(where + ": '" + name + "' must be an integer");
  return v.get<int>();
}

}  // namespace

std::string serialize_checkpoint(const Checkpoint& cp) {
  json doc = json::object();
  doc["format_version"] = kCheckpointFormatVersion;
  doc["role"] = cp.role;
  if (!cp.attribute.empty()) doc["attribute"] = cp.attribute;
  doc["mode"] = cp.model.mode() == nn::Mode::kTraining ? "training" : "inference";

  json specs = json::array();
  json layers = json::array();
  for (const Layer& l : cp.model.layers()) {
    json s = {{"kind", std::string(nn::to_string(l.spec.kind))},
              {"in_dim", l.spec.in_dim},
              {"out_dim", l.spec.out_dim}};
    json p = json::object();
    if (l.spec.kind == LayerKind::kBatchNorm) {
      s["epsilon"] = l.spec.epsilon;
      s["momentum"] = l.spec.momentum;
      p["gamma"] = to_json(l.gamma);
      p["beta"] = to_json(l.beta);
      p["running_mean"] = to_json(l.running_mean);
      p["running_var"] = to_json(l.running_var);
    } else if (l.spec.kind == LayerKind::kDense) {
      p["weight"] = row_major(l.weight);
      p["bias"] = to_json(l.bias);
    }
    specs.push_back(std::move(s));
    layers.push_back(std::move(p));
  }
  doc["specs"] = std::move(specs);
  doc["layers"] = std::move(layers);

  json metrics = json::object();
  for (const auto& [k, v] : cp.metrics) metrics[k] = v;
  doc["metrics"] = std::move(metrics);

  if (cp.optimizer) {
    const nn::OptimizerState& st = *cp.optimizer;
    doc["optimizer_state"] = {{"kind", std::string(nn::to_string(st.kind))},
                              {"step", st.step},
                              {"epochs_done", st.epochs_done},
                              {"first_moment", st.first_moment},
                              {"second_moment", st.second_moment}};
  }
  return doc.dump(1) + "\n";
}

Checkpoint parse_checkpoint(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw FormatError(std::string("checkpoint: malformed file: ") + e.what());
  }
  const std::string where = "checkpoint";
  const int version = int_field(doc, "format_version", where);
  if (version != kCheckpointFormatVersion) {
    throw FormatError("checkpoint: unsupported format_version " + std::to_string(version) +
                      " (expected " + std::to_string(kCheckpointFormatVersion) + ")");
  }

  try {
    Checkpoint cp;
    cp.role = field(doc, "role", where).get<std::string>();
    if (doc.contains("attribute")) cp.attribute = doc["attribute"].get<std::string>();
    const std::string mode = field(doc, "mode", where).get<std::string>();
    if (mode != "training" && mode != "inference") {
      throw FormatError("checkpoint: unknown mode '" + mode + "'");
    }

    const json& specs = field(doc, "specs", where);
    const json& layers = field(doc, "layers", where);
    if (!specs.is_array() || !layers.is_array() || specs.size() != layers.size()) {
      throw FormatError("checkpoint: 'specs' and 'layers' must be arrays of equal length");
    }
    std::vector<Layer> out;
    for (std::size_t i = 0; i < specs.size(); ++i) {
      const std::string w = "checkpoint layer " + std::to_string(i);
      const json& s = specs[i];
      const json& p = layers[i];
      Layer l;
      l.spec.kind = nn::parse_layer_kind(field(s, "kind", w).get<std::string>());
      l.spec.in_dim = int_field(s, "in_dim", w);
      l.spec.out_dim = int_field(s, "out_dim", w);
      if (l.spec.in_dim <= 0 || l.spec.out_dim <= 0) throw FormatError(w + ": bad dims");
      if (l.spec.kind == LayerKind::kBatchNorm) {
        l.spec.epsilon = field(s, "epsilon", w).get<double>();
        l.spec.momentum = field(s, "momentum", w).get<double>();
        const Eigen::Index d = l.spec.in_dim;
        l.gamma = vector_from(field(p, "gamma", w), d, w + " gamma");
        l.beta = vector_from(field(p, "beta", w), d, w + " beta");
        l.running_mean = vector_from(field(p, "running_mean", w), d, w + " running_mean");
        l.running_var = vector_from(field(p, "running_var", w), d, w + " running_var");
      } else if (l.spec.kind == LayerKind::kDense) {
        const Eigen::Index rows = l.spec.out_dim;
        const Eigen::Index cols = l.spec.in_dim;
        const nn::Vector flat = vector_from(field(p, "weight", w), rows * cols, w + " weight");
        l.weight.resize(rows, cols);
        for (Eigen::Index r = 0; r < rows; ++r)
          for (Eigen::Index c = 0; c < cols; ++c) l.weight(r, c) = flat[r * cols + c];
        l.bias = vector_from(field(p, "bias", w), rows, w + " bias");
      }
      out.push_back(std::move(l));
    }
    cp.model = nn::MlpModel(std::move(out),
                            mode == "training" ? nn::Mode::kTraining : nn::Mode::kInference);

    if (doc.contains("metrics")) {
      for (const auto& [k, v] : doc["metrics"].items()) {
        if (!v.is_number()) throw FormatError("checkpoint: metric '" + k + "' is not a number");
        cp.metrics[k] = v.get<double>();
      }
    }
    if (doc.contains("optimizer_state")) {
      const json& o = doc["optimizer_state"];
      const std::string w = "checkpoint optimizer_state";
      nn::OptimizerState st;
      st.kind = nn::parse_optimizer_kind(field(o, "kind", w).get<std::string>());
      st.step = field(o, "step", w).get<std::uint64_t>();
      st.epochs_done = int_field(o, "epochs_done", w);
      st.first_moment = doubles_from(field(o, "first_moment", w), w);
      st.second_moment = doubles_from(field(o, "second_moment", w), w);
      cp.optimizer = std::move(st);
    }
    return cp;
  } catch (const json::exception& e) {
    throw FormatError(std::string("checkpoint: malformed file: ") + e.what());
  } catch (const SpecError& e) {
    throw FormatError(std::string("checkpoint: ") + e.what());
  }
}

void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path) {
  write_file(path, serialize_checkpoint(checkpoint));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  try {
    return parse_checkpoint(read_file(path));
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void save_model(const nn::MlpModel& model, const std::filesystem::path& path) {
  Checkpoint cp;
  cp.model = model;
  cp.role = "model";
  save_checkpoint(cp, path);
}

nn::MlpModel load_model(const std::filesystem::path& path) {
  return load_checkpoint(path).model;
}

}  // namespace spherewalk
