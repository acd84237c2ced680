#pragma once

#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "olcb/body_io.hpp"
#include "olcb/centroid.hpp"
#include "olcb/error.hpp"
#include "olcb/orlicz.hpp"
#include "olcb/random_bodies.hpp"

namespace olcb {

inline OrliczFunction phi_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("family")) {
    throw ConfigError("phi: expected an object with a 'family' field");
  }
  const std::string family = j["family"].get<std::string>();
  if (family == "power") {
    if (!j.contains("p")) throw ConfigError("phi: power family requires 'p'");
    return OrliczFunction::power(j["p"].get<double>());
  }
  if (family == "scaled_exp") {
    if (!j.contains("c")) throw ConfigError("phi: scaled_exp family requires 'c'");
    return OrliczFunction::scaled_exp(j["c"].get<double>());
  }
  if (family == "piecewise_linear") {
    if (!j.contains("points")) throw ConfigError("phi: piecewise_linear requires 'points'");
    std::vector<std::pair<double, double>> pts;
    for (const auto& row : j["points"]) {
      pts.emplace_back(row.at(0).get<double>(), row.at(1).get<double>());
    }
    return OrliczFunction::piecewise_linear(std::move(pts));
  }
  throw ConfigError("phi: unknown family '" + family + "'");
}

inline WeightFunction omega_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("family")) {
    throw ConfigError("omega: expected an object with a 'family' field");
  }
  const std::string family = j["family"].get<std::string>();
  if (family == "constant") return WeightFunction::constant();
  if (family == "power_singular") {
    if (!j.contains("beta")) throw ConfigError("omega: power_singular requires 'beta'");
    return WeightFunction::power_singular(j["beta"].get<double>());
  }
  if (family == "piecewise_constant") {
    if (!j.contains("steps")) throw ConfigError("omega: piecewise_constant requires 'steps'");
    std::vector<std::pair<double, double>> steps;
    for (const auto& row : j["steps"]) {
      steps.emplace_back(row.at(0).get<double>(), row.at(1).get<double>());
    }
    return WeightFunction::piecewise_constant(std::move(steps));
  }
  throw ConfigError("omega: unknown family '" + family + "'");
}

struct BodySpec {
  std::string source;  // "file" | "inline" | "generator"
  std::string path;
  nlohmann::json inline_body;
  std::string generator_kind = "random_polygon";
  int count = 1;
  int vertices = 12;
  double inradius_floor = 0.1;
};

struct NamedBody {
  std::string id;
  Body body;
};

/// Experiment configuration (versioned JSON schema). Fields irrelevant to
/// a subcommand are ignored by it.
struct ExperimentConfig {
  int schema_version = 1;
  std::string experiment = "experiment";
  std::uint64_t seed = 1;
  BodySpec body;
  nlohmann::json phi_spec;
  nlohmann::json omega_spec;
  std::vector<nlohmann::json> phi_list;    // campaign sweeps
  std::vector<nlohmann::json> omega_list;  // campaign sweeps
  int grid_size = 0;  // 0 -> per-dimension default
  int quadrature_cells = 4096;
  bool richardson = true;
  int trials = 100;
  int direction_count = 16;
  std::vector<Vec> directions;
  int steps = 50;
  std::size_t mc_samples = 100000;
  std::string out_dir = "out";
  bool inject_bug = false;
  bool export_profiles = false;
  bool include_ellipses = false;
  bool include_regular_64gons = false;
  Vec steiner_direction;

  OrliczFunction phi() const {
    return phi_spec.is_null() ? OrliczFunction::power(1) : phi_from_json(phi_spec);
  }
  WeightFunction omega() const {
    return omega_spec.is_null() ? WeightFunction::constant() : omega_from_json(omega_spec);
  }

  std::vector<OrliczFunction> phis() const {
    std::vector<OrliczFunction> out;
    if (phi_list.empty()) {
      out.push_back(phi());
    } else {
      for (const auto& j : phi_list) out.push_back(phi_from_json(j));
    }
    return out;
  }
  std::vector<WeightFunction> omegas() const {
    std::vector<WeightFunction> out;
    if (omega_list.empty()) {
      out.push_back(omega());
    } else {
      for (const auto& j : omega_list) out.push_back(omega_from_json(j));
    }
    return out;
  }

  NormSolveOptions solver_options() const {
    NormSolveOptions opts;
    opts.cells = quadrature_cells;
    opts.richardson = richardson;
    if (inject_bug) {
      // harness self-test: a 2-cell quadrature with the first weight cell
      // negated makes the functional nonpositive, so every solve must fail
      opts.cells = 2;
      opts.inject_negate_cell = 0;
    }
    return opts;
  }

  CentroidOptions centroid_options() const {
    CentroidOptions opts;
    opts.grid_size = grid_size;
    opts.solver = solver_options();
    opts.mc_samples = mc_samples;
    opts.mc_seed = seed;
    return opts;
  }

  /// Bodies named for result rows; generator output is seed-deterministic.
  std::vector<NamedBody> make_bodies() const {
    std::vector<NamedBody> out;
    if (body.source == "file") {
      out.push_back({"file:" + body.path, load_body_file(body.path)});
    } else if (body.source == "inline") {
      out.push_back({"inline", body_from_json(body.inline_body)});
    } else if (body.source == "generator") {
      std::mt19937_64 rng(seed);
      for (int i = 0; i < body.count; ++i) {
        if (body.generator_kind == "random_polygon") {
          out.push_back({"polygon_" + std::to_string(i),
                         random_polygon(rng, body.vertices, body.inradius_floor)});
        } else if (body.generator_kind == "random_polytope_3d") {
          out.push_back({"polytope3d_" + std::to_string(i),
                         random_polytope_3d(rng, body.vertices, body.inradius_floor)});
        } else if (body.generator_kind == "random_ellipse") {
          out.push_back({"ellipse_" + std::to_string(i), random_ellipse(rng)});
        } else {
          throw ConfigError("unknown generator kind '" + body.generator_kind + "'");
        }
      }
    } else {
      throw ConfigError("body: unknown source '" + body.source + "'");
    }
    if (include_ellipses) {
      std::mt19937_64 rng(split_seed(seed, 777));
      for (int i = 0; i < 3; ++i) {
        out.push_back({"ellipse_extra_" + std::to_string(i), random_ellipse(rng)});
      }
    }
    if (include_regular_64gons) {
      out.push_back({"regular64_r1", regular_polygon(64, 1.0)});
      out.push_back({"regular64_r07", regular_polygon(64, 0.7)});
    }
    return out;
  }
};

inline ExperimentConfig config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config: expected a JSON object");
  ExperimentConfig cfg;
  if (!j.contains("schema_version") || !j["schema_version"].is_number_integer()) {
    throw ConfigError("config: missing integer 'schema_version'");
  }
  cfg.schema_version = j["schema_version"].get<int>();
  if (cfg.schema_version != 1) {
    throw ConfigError("config: unsupported schema_version " +
                      std::to_string(cfg.schema_version));
  }
  auto get_or = [&](const char* key, auto fallback) {
    using T = decltype(fallback);
    if (!j.contains(key)) return fallback;
    return j[key].get<T>();
  };
  cfg.experiment = get_or("experiment", std::string("experiment"));
  cfg.seed = get_or("seed", std::uint64_t{1});
  cfg.grid_size = get_or("grid_size", 0);
  cfg.quadrature_cells = get_or("quadrature_cells", 4096);
  cfg.richardson = get_or("richardson", true);
  cfg.trials = get_or("trials", 100);
  cfg.direction_count = get_or("direction_count", 16);
  cfg.steps = get_or("steps", 50);
  cfg.mc_samples = get_or("mc_samples", std::size_t{100000});
  cfg.out_dir = get_or("out", std::string("out"));
  cfg.inject_bug = get_or("inject_bug", false);
  cfg.export_profiles = get_or("export_profiles", false);
  cfg.include_ellipses = get_or("include_ellipses", false);
  cfg.include_regular_64gons = get_or("include_regular_64gons", false);

  if (j.contains("body")) {
    const auto& jb = j["body"];
    if (!jb.is_object() || !jb.contains("source")) {
      throw ConfigError("config: body requires a 'source' field");
    }
    cfg.body.source = jb["source"].get<std::string>();
    if (cfg.body.source == "file") {
      if (!jb.contains("path")) throw ConfigError("config: body file source requires 'path'");
      cfg.body.path = jb["path"].get<std::string>();
    } else if (cfg.body.source == "inline") {
      if (!jb.contains("body")) throw ConfigError("config: inline source requires 'body'");
      cfg.body.inline_body = jb["body"];
    } else if (cfg.body.source == "generator") {
      cfg.body.generator_kind = jb.value("kind", std::string("random_polygon"));
      cfg.body.count = jb.value("count", 1);
      cfg.body.vertices = jb.value("vertices", 12);
      cfg.body.inradius_floor = jb.value("inradius_floor", 0.1);
      if (cfg.body.inradius_floor < 0.1) {
        throw ConfigError("config: generator inradius_floor must be >= 0.1");
      }
    } else {
      throw ConfigError("config: unknown body source '" + cfg.body.source + "'");
    }
  } else {
    cfg.body.source = "generator";
  }

  if (j.contains("phi")) cfg.phi_spec = j["phi"];
  if (j.contains("omega")) cfg.omega_spec = j["omega"];
  if (j.contains("phis")) {
    for (const auto& e : j["phis"]) cfg.phi_list.push_back(e);
  }
  if (j.contains("omegas")) {
    for (const auto& e : j["omegas"]) cfg.omega_list.push_back(e);
  }
  if (j.contains("directions")) {
    for (const auto& row : j["directions"]) {
      Vec u(row.size());
      for (std::size_t c = 0; c < row.size(); ++c) u[c] = row[c].get<double>();
      if (u.norm() < 1e-300) throw ConfigError("config: zero direction");
      cfg.directions.push_back(u);
    }
  }
  if (j.contains("steiner_direction")) {
    const auto& row = j["steiner_direction"];
    Vec u(row.size());
    for (std::size_t c = 0; c < row.size(); ++c) u[c] = row[c].get<double>();
    const double norm = u.norm();
    if (norm < 1e-300) throw ConfigError("config: zero steiner_direction");
    cfg.steiner_direction = u / norm;
  }
  // validate phi/omega specs eagerly so bad configs fail before solving
  cfg.phis();
  cfg.omegas();
  return cfg;
}

inline ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("invalid JSON in " + path + ": " + e.what());
  }
  return config_from_json(j);
}

}  // namespace olcb
