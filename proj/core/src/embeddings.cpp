// Copyright 2026 The spherewalk Authors.
// SPDX-License-Identifier: Apache-2.0

#include "spherewalk/embeddings.hpp"

#include <json.hpp>

#include <sstream>

#include "spherewalk/errors.hpp"
#include "spherewalk/io.hpp"

namespace spherewalk {

using nlohmann::json;

std::size_t EmbeddingDataset::attribute_index(std::string_view name) const {
  for (std::size_t i = 0; i < attributes.size(); ++i)
    if (attributes[i] == name) return i;
  throw ValidationError("unknown attribute '" + std::string(name) + "'");
}

void EmbeddingDataset::validate() const {
  if (dim <= 0) throw ValidationError("embedding dataset: dimension must be positive");
  if (ids.size() != vectors.size() || labels.size() != vectors.size()) {
    throw ValidationError("embedding dataset: ids / vectors / labels differ in length");
  }
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    if (vectors[i].dim() != dim) {
      throw ValidationError("embedding dataset: vector " + std::to_string(i) +
                            " has dimension " + std::to_string(vectors[i].dim()));
    }
    if (labels[i].size() != attributes.size()) {
      throw ValidationError("embedding dataset: record " + std::to_string(i) +
                            " has the wrong number of labels");
    }
    for (int y : labels[i])
      if (y != 0 && y != 1) throw ValidationError("embedding dataset: labels must be 0 or 1");
  }
}

std::string serialize_embeddings(const EmbeddingDataset& data) {
  data.validate();
  std::ostringstream os;
  json header = {{"format_version", kEmbeddingFormatVersion},
                 {"d", data.dim},
                 {"attributes", data.attributes}};
  os << header.dump() << "\n";
  for (std::size_t i = 0; i < data.size(); ++i) {
    json vec = json::array();
    for (Eigen::Index k = 0; k < data.vectors[i].dim(); ++k) vec.push_back(data.vectors[i][k]);
    json attrs = json::object();
    for (std::size_t a = 0; a < data.attributes.size(); ++a) attrs[data.attributes[a]] = data.labels[i][a];
    json rec = {{"id", data.ids[i]}, {"vector", std::move(vec)}, {"attrs", std::move(attrs)}};
    os << rec.dump() << "\n";
  }
  return os.str();
}

EmbeddingDataset parse_embeddings(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  auto fail = [&](const std::string& msg) -> FormatError {
    return FormatError("embeddings line " + std::to_string(line_no) + ": " + msg);
  };

  EmbeddingDataset data;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::exception&) {
      throw fail("malformed JSON record");
    }
    if (!obj.is_object()) throw fail("expected a JSON object");

    if (!have_header) {
      if (!obj.contains("format_version") || !obj["format_version"].is_number_integer()) {
        throw fail("header must carry an integer format_version");
      }
      if (obj["format_version"].get<int>() != kEmbeddingFormatVersion) {
        throw fail("unsupported format_version " + obj["format_version"].dump());
      }
      if (!obj.contains("d") || !obj["d"].is_number_integer() || obj["d"].get<int>() <= 0) {
        throw fail("header must carry a positive integer d");
      }
      if (!obj.contains("attributes") || !obj["attributes"].is_array()) {
        throw fail("header must list attributes");
      }
      data.dim = obj["d"].get<int>();
      for (const auto& a : obj["attributes"]) {
        if (!a.is_string()) throw fail("attribute names must be strings");
        data.attributes.push_back(a.get<std::string>());
      }
      have_header = true;
      continue;
    }

    if (!obj.contains("id") || !obj["id"].is_string()) throw fail("record needs a string id");
    if (!obj.contains("vector") || !obj["vector"].is_array()) throw fail("record needs a vector");
    const json& vec = obj["vector"];
    if (static_cast<int>(vec.size()) != data.dim) {
      throw fail("vector has dimension " + std::to_string(vec.size()) + ", header says " +
                 std::to_string(data.dim));
    }
    Eigen::VectorXd v(data.dim);
    for (int k = 0; k < data.dim; ++k) {
      if (!vec[static_cast<std::size_t>(k)].is_number()) throw fail("non-numeric vector entry");
      v[k] = vec[static_cast<std::size_t>(k)].get<double>();
    }
    const double norm = v.norm();
    if (!(std::abs(norm - 1.0) <= kEmbeddingNormTolerance)) {
      std::ostringstream msg;
      msg << "vector norm " << norm << " deviates from 1 by more than "
          << kEmbeddingNormTolerance;
      throw fail(msg.str());
    }
    if (!obj.contains("attrs") || !obj["attrs"].is_object()) throw fail("record needs attrs");
    std::vector<int> labels;
    for (const auto& name : data.attributes) {
      const json& attrs = obj["attrs"];
      if (!attrs.contains(name)) throw fail("missing label for attribute '" + name + "'");
      const json& y = attrs[name];
      if (!y.is_number_integer() || (y.get<int>() != 0 && y.get<int>() != 1)) {
        throw fail("label for '" + name + "' must be 0 or 1");
      }
      labels.push_back(y.get<int>());
    }
    data.ids.push_back(obj["id"].get<std::string>());
    data.vectors.push_back(sphere::LatentVector::from_unit(v, kEmbeddingNormTolerance));
    data.labels.push_back(std::move(labels));
  }
  if (!have_header) throw FormatError("embeddings: missing header line");
  return data;
}

void export_embeddings(const EmbeddingDataset& data, const std::filesystem::path& path) {
  write_file(path, serialize_embeddings(data));
}

EmbeddingDataset import_embeddings(const std::filesystem::path& path) {
  try {
    return parse_embeddings(read_file(path));
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

}  // namespace spherewalk
