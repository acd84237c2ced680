#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "olcb/campaigns.hpp"
#include "olcb/config.hpp"

using namespace olcb;
using Catch::Approx;

namespace {

nlohmann::json base_config() {
  return nlohmann::json{
      {"schema_version", 1},
      {"experiment", "unit"},
      {"seed", 99},
      {"body",
       {{"source", "generator"}, {"kind", "random_polygon"}, {"count", 3}, {"vertices", 8}}},
      {"phi", {{"family", "power"}, {"p", 1}}},
      {"omega", {{"family", "constant"}}},
      {"grid_size", 64},
      {"quadrature_cells", 512},
      {"direction_count", 8},
      {"trials", 6},
  };
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("config parsing validates the schema", "[harness]") {
  const ExperimentConfig cfg = config_from_json(base_config());
  CHECK(cfg.seed == 99);
  CHECK(cfg.grid_size == 64);
  CHECK(cfg.make_bodies().size() == 3);

  nlohmann::json bad = base_config();
  bad.erase("schema_version");
  CHECK_THROWS_AS(config_from_json(bad), ConfigError);

  bad = base_config();
  bad["schema_version"] = 7;
  CHECK_THROWS_AS(config_from_json(bad), ConfigError);

  bad = base_config();
  bad["phi"] = {{"family", "mystery"}};
  CHECK_THROWS_AS(config_from_json(bad), ConfigError);

  bad = base_config();
  bad["body"] = {{"source", "generator"}, {"inradius_floor", 0.01}};
  CHECK_THROWS_AS(config_from_json(bad), ConfigError);

  bad = base_config();
  bad["directions"] = {{0.0, 0.0}};
  CHECK_THROWS_AS(config_from_json(bad), ConfigError);
}

TEST_CASE("generator produces origin-interior bodies deterministically", "[harness]") {
  const ExperimentConfig cfg = config_from_json(base_config());
  const auto bodies1 = cfg.make_bodies();
  const auto bodies2 = cfg.make_bodies();
  REQUIRE(bodies1.size() == bodies2.size());
  for (std::size_t i = 0; i < bodies1.size(); ++i) {
    CHECK(bodies1[i].id == bodies2[i].id);
    CHECK(bodies1[i].body.inradius_outradius().first >= 0.1);
    CHECK(bodies1[i].body.vertices().isApprox(bodies2[i].body.vertices()));
  }
}

TEST_CASE("verification rows encode pass as slack >= -tolerance", "[harness]") {
  const auto ok = VerificationRow::make("b", "s", 1.0, 2.0, 1.0, 0.0);
  CHECK(ok.pass);
  const auto edge = VerificationRow::make("b", "s", 0.0, 0.0, -1e-7, 1e-6);
  CHECK(edge.pass);
  const auto bad = VerificationRow::make("b", "s", 0.0, 0.0, -1e-3, 1e-6);
  CHECK(!bad.pass);
  const auto failed = VerificationRow::failure("b", "s", "boom");
  CHECK(!failed.pass);
  CHECK(failed.metadata.find("boom") != std::string::npos);
}

TEST_CASE("campaign CSVs are byte-identical across reruns", "[harness]") {
  ExperimentConfig cfg = config_from_json(base_config());
  const auto tmp = std::filesystem::temp_directory_path() / "olcb_csv_determinism";
  std::filesystem::create_directories(tmp);
  const std::string a = (tmp / "a.csv").string();
  const std::string b = (tmp / "b.csv").string();
  write_rows_csv(a, sandwich_campaign(cfg).rows);
  write_rows_csv(b, sandwich_campaign(cfg).rows);
  const std::string ca = slurp(a);
  CHECK(!ca.empty());
  CHECK(ca == slurp(b));
}

TEST_CASE("sandwich campaign passes on a clean corpus", "[harness]") {
  const ExperimentConfig cfg = config_from_json(base_config());
  const auto result = sandwich_campaign(cfg);
  CHECK(result.failures() == 0);
  CHECK(result.rows.size() > 0);
  CHECK(result.budget.max_solver_residual <= 1e-7);
}

TEST_CASE("injected weight bug makes sandwich rows fail", "[harness]") {
  nlohmann::json j = base_config();
  j["inject_bug"] = true;
  j["body"]["count"] = 1;
  j["direction_count"] = 2;
  const ExperimentConfig cfg = config_from_json(j);
  const auto result = sandwich_campaign(cfg);
  CHECK(result.failures() == static_cast<int>(result.rows.size()));
  CHECK(result.failures() > 0);
}

TEST_CASE("equivariance campaign on a tiny corpus", "[harness]") {
  nlohmann::json j = base_config();
  j["trials"] = 4;
  j["direction_count"] = 6;
  const auto result = equivariance_campaign(config_from_json(j));
  CHECK(result.rows.size() == 4);
  CHECK(result.failures() == 0);
}

TEST_CASE("steiner inequality campaign on a tiny corpus", "[harness]") {
  nlohmann::json j = base_config();
  j["trials"] = 5;
  j["grid_size"] = 32;
  const auto result = steiner_inequality_campaign(config_from_json(j));
  CHECK(result.rows.size() == 5);
  CHECK(result.failures() == 0);
}

TEST_CASE("bp campaign: ball bracket and polygon dominance", "[harness]") {
  nlohmann::json j = base_config();
  j["body"]["count"] = 2;
  j["grid_size"] = 128;
  const auto result = bp_campaign(config_from_json(j));
  CHECK(result.failures() == 0);
  bool saw_closed_form = false;
  for (const auto& r : result.rows) {
    if (r.statistic == "bp_ball_contains_closed_form_lower") saw_closed_form = true;
  }
  CHECK(saw_closed_form);
}

TEST_CASE("converge campaign writes traces and monotone brackets", "[harness]") {
  nlohmann::json j = base_config();
  j["body"]["count"] = 1;
  j["steps"] = 4;
  j["grid_size"] = 64;
  const auto tmp = std::filesystem::temp_directory_path() / "olcb_converge_test";
  std::filesystem::remove_all(tmp);
  const auto result = converge_campaign(config_from_json(j), tmp.string());
  CHECK(result.failures() == 0);
  const std::string trace = slurp((tmp / "trace_polygon_0.jsonl").string());
  CHECK(!trace.empty());
  // every line is a JSON object with the trace fields
  std::istringstream lines(trace);
  std::string line;
  int count = 0;
  while (std::getline(lines, line)) {
    const auto jline = nlohmann::json::parse(line);
    CHECK(jline.contains("step"));
    CHECK(jline.contains("direction"));
    CHECK(jline.contains("volume"));
    CHECK(jline.contains("ball_distance"));
    CHECK(jline.contains("vertex_count"));
    ++count;
  }
  CHECK(count == 4);
}

TEST_CASE("g12 formatting is stable and 12-significant-digit", "[harness]") {
  CHECK(format_g12(0.5) == "0.5");
  CHECK(format_g12(1.0 / 3.0) == "0.333333333333");
  CHECK(format_g12(123456789.123456) == "123456789.123");
}
