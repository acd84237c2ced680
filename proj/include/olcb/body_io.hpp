#pragma once

#include <fstream>
#include <string>

#include <json.hpp>

#include "olcb/body.hpp"
#include "olcb/error.hpp"

namespace olcb {

/// Parses the body schema
///   {"type": "polytope"|"ball"|"ellipsoid", "dim": n,
///    "vertices": [[..],..], "radius": r, "shape": [[..],..]}
/// reporting the first invariant violation with indices.
inline Body body_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ValidationError("body: expected a JSON object");
  if (!j.contains("type") || !j["type"].is_string()) {
    throw ValidationError("body: missing string field 'type'");
  }
  const std::string type = j["type"].get<std::string>();
  if (!j.contains("dim") || !j["dim"].is_number_integer()) {
    throw ValidationError("body: missing integer field 'dim'");
  }
  const int n = j["dim"].get<int>();
  if (n < 1) throw ValidationError("body: 'dim' must be positive");

  if (type == "ball") {
    if (!j.contains("radius") || !j["radius"].is_number()) {
      throw ValidationError("body: ball requires numeric 'radius'");
    }
    return Body::ball(n, j["radius"].get<double>());
  }
  if (type == "polytope") {
    if (!j.contains("vertices") || !j["vertices"].is_array() || j["vertices"].empty()) {
      throw ValidationError("body: polytope requires nonempty 'vertices'");
    }
    const auto& rows = j["vertices"];
    Mat verts(rows.size(), n);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (!rows[i].is_array() || static_cast<int>(rows[i].size()) != n) {
        throw ValidationError("body: vertex " + std::to_string(i) + " must have " +
                              std::to_string(n) + " coordinates");
      }
      for (int c = 0; c < n; ++c) {
        if (!rows[i][c].is_number()) {
          throw ValidationError("body: vertex " + std::to_string(i) + " coordinate " +
                                std::to_string(c) + " is not a number");
        }
        verts(i, c) = rows[i][c].get<double>();
      }
    }
    return Body::polytope(verts);
  }
  if (type == "ellipsoid") {
    if (!j.contains("shape") || !j["shape"].is_array() ||
        static_cast<int>(j["shape"].size()) != n) {
      throw ValidationError("body: ellipsoid requires an n x n 'shape'");
    }
    Mat shape(n, n);
    for (int r = 0; r < n; ++r) {
      const auto& row = j["shape"][r];
      if (!row.is_array() || static_cast<int>(row.size()) != n) {
        throw ValidationError("body: shape row " + std::to_string(r) + " must have " +
                              std::to_string(n) + " entries");
      }
      for (int c = 0; c < n; ++c) {
        if (!row[c].is_number()) {
          throw ValidationError("body: shape entry (" + std::to_string(r) + "," +
                                std::to_string(c) + ") is not a number");
        }
        shape(r, c) = row[c].get<double>();
      }
    }
    return Body::ellipsoid(shape);
  }
  throw ValidationError("body: unknown type '" + type + "'");
}

inline nlohmann::json body_to_json(const Body& b) {
  nlohmann::json j;
  j["dim"] = b.dim();
  switch (b.kind()) {
    case BodyKind::Ball:
      j["type"] = "ball";
      j["radius"] = b.ball_radius();
      break;
    case BodyKind::Ellipsoid: {
      j["type"] = "ellipsoid";
      nlohmann::json rows = nlohmann::json::array();
      for (int r = 0; r < b.dim(); ++r) {
        nlohmann::json row = nlohmann::json::array();
        for (int c = 0; c < b.dim(); ++c) row.push_back(b.ellipsoid_shape()(r, c));
        rows.push_back(row);
      }
      j["shape"] = rows;
      break;
    }
    case BodyKind::Polytope: {
      j["type"] = "polytope";
      nlohmann::json rows = nlohmann::json::array();
      for (int i = 0; i < b.vertices().rows(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (int c = 0; c < b.dim(); ++c) row.push_back(b.vertices()(i, c));
        rows.push_back(row);
      }
      j["vertices"] = rows;
      break;
    }
    case BodyKind::SupportSampled:
      throw ValidationError("body_to_json: sampled bodies are not serializable in this schema");
  }
  return j;
}

inline Body load_body_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open body file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("invalid JSON in " + path + ": " + e.what());
  }
  return body_from_json(j);
}

}  // namespace olcb
