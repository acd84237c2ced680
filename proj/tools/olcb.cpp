#include <cstdio>
#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "olcb/body_io.hpp"
#include "olcb/campaigns.hpp"
#include "olcb/centroid.hpp"
#include "olcb/config.hpp"
#include "olcb/csv.hpp"
#include "olcb/steiner.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitViolation = 2;

int finish(const olcb::CampaignResult& result, const std::string& out_csv) {
  olcb::write_rows_csv(out_csv, result.rows);
  std::cout << result.budget.describe() << "\n";
  std::cout << "rows: " << result.rows.size() << "  failures: " << result.failures()
            << "  min slack: " << olcb::format_g12(result.min_slack()) << "\n";
  std::cout << "results written to " << out_csv << "\n";
  return result.failures() == 0 ? kExitOk : kExitViolation;
}

int cmd_norm(const olcb::ExperimentConfig& cfg, const std::string& out_dir) {
  olcb::ensure_directory(out_dir);
  auto result = olcb::norm_campaign(cfg, out_dir);
  return finish(result, out_dir + "/norm_checks.csv");
}

int cmd_centroid(const olcb::ExperimentConfig& cfg, const std::string& out_dir) {
  olcb::ensure_directory(out_dir);
  const auto bodies = cfg.make_bodies();
  const auto phi = cfg.phi();
  const auto omega = cfg.omega();
  const auto opts = cfg.centroid_options();
  for (const auto& [id, body] : bodies) {
    const olcb::CentroidBody gamma(body, phi, omega, opts);
    olcb::CsvWriter csv(out_dir + "/centroid_" + id + ".csv",
                        {"u_0", "u_1", "u_2", "h", "bracket_lo", "bracket_hi", "residual",
                         "backend"});
    for (int i = 0; i < gamma.grid_size(); ++i) {
      const auto& rep = gamma.reports()[i];
      csv.row({olcb::CsvWriter::num(gamma.directions()(i, 0)),
               olcb::CsvWriter::num(gamma.directions()(i, 1)),
               olcb::CsvWriter::num(body.dim() > 2 ? gamma.directions()(i, 2) : 0.0),
               olcb::CsvWriter::num(gamma.supports()[i]), olcb::CsvWriter::num(rep.bracket_lo),
               olcb::CsvWriter::num(rep.bracket_hi), olcb::CsvWriter::num(rep.residual),
               olcb::backend_name(rep.backend)});
    }
    const auto vr = olcb::volume_ratio(body, phi, omega, opts);
    std::cout << id << ": |Gamma K|/|K| in [" << olcb::format_g12(vr.inner_ratio()) << ", "
              << olcb::format_g12(vr.outer_ratio()) << "]"
              << (vr.inner_certified ? "" : " (inner estimated)") << "\n";
  }
  std::cout << "centroid CSVs written to " << out_dir << "\n";
  return kExitOk;
}

int cmd_steiner(const olcb::ExperimentConfig& cfg, const std::string& out_dir) {
  olcb::ensure_directory(out_dir);
  if (cfg.steiner_direction.size() == 0) {
    throw olcb::ConfigError("steiner command requires 'steiner_direction' in the config");
  }
  const auto bodies = cfg.make_bodies();
  for (const auto& [id, body] : bodies) {
    const auto res = olcb::steiner_symmetrize(body, cfg.steiner_direction);
    const double before = body.volume_exact();
    const double after = res.body.volume_exact();
    std::ofstream out(out_dir + "/steiner_" + id + ".json");
    out << olcb::body_to_json(res.body).dump(2) << "\n";
    std::cout << id << ": volume " << olcb::format_g12(before) << " -> "
              << olcb::format_g12(after) << " (drift "
              << olcb::format_g12(std::fabs(after - before) / before) << ")\n";
  }
  return kExitOk;
}

int cmd_verify_bp(const olcb::ExperimentConfig& cfg, const std::string& out_dir) {
  olcb::ensure_directory(out_dir);
  auto result = olcb::bp_campaign(cfg);
  return finish(result, out_dir + "/verify_bp.csv");
}

int cmd_verify_lemmas(const olcb::ExperimentConfig& cfg, const std::string& out_dir) {
  olcb::ensure_directory(out_dir);
  auto result = olcb::verify_lemmas_campaign(cfg);
  return finish(result, out_dir + "/verify_lemmas.csv");
}

int cmd_converge(const olcb::ExperimentConfig& cfg, const std::string& out_dir) {
  olcb::ensure_directory(out_dir);
  auto result = olcb::converge_campaign(cfg, out_dir);
  return finish(result, out_dir + "/converge_checks.csv");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Orlicz-Lorentz centroid body toolkit"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;

  auto add = [&](const std::string& name, const std::string& desc) {
    CLI::App* sub = app.add_subcommand(name, desc);
    sub->add_option("--config", config_path, "experiment config JSON")->required();
    sub->add_option("--out", out_dir, "output directory (overrides config)");
    return sub;
  };
  CLI::App* norm = add("norm", "solve centroid-body support values over directions");
  CLI::App* centroid = add("centroid", "build the centroid body on a direction grid");
  CLI::App* steiner = add("steiner", "Steiner-symmetrize bodies along a direction");
  CLI::App* verify_bp = add("verify-bp", "volume-ratio extremality campaign");
  CLI::App* verify_lemmas = add("verify-lemmas", "sandwich/equivariance/Steiner/inclusion campaigns");
  CLI::App* converge = add("converge", "iterated symmetrization traces");

  CLI11_PARSE(app, argc, argv);

  try {
    const olcb::ExperimentConfig cfg = olcb::load_config_file(config_path);
    const std::string out = out_dir.empty() ? cfg.out_dir : out_dir;
    if (norm->parsed()) return cmd_norm(cfg, out);
    if (centroid->parsed()) return cmd_centroid(cfg, out);
    if (steiner->parsed()) return cmd_steiner(cfg, out);
    if (verify_bp->parsed()) return cmd_verify_bp(cfg, out);
    if (verify_lemmas->parsed()) return cmd_verify_lemmas(cfg, out);
    if (converge->parsed()) return cmd_converge(cfg, out);
    std::cerr << "no subcommand selected\n";
    return kExitRuntime;
  } catch (const olcb::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "unexpected error: " << e.what() << "\n";
    return kExitRuntime;
  }
}
