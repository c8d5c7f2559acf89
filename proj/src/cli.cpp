#include "kreinlab/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "kreinlab/config.hpp"
#include "kreinlab/convergence_lab.hpp"
#include "kreinlab/errors.hpp"
#include "kreinlab/matrix_oracle.hpp"
#include "kreinlab/report_io.hpp"
#include "kreinlab/schrodinger.hpp"

namespace kreinlab::cli {

namespace {

struct Common {
  std::string config_path;
  std::string out_dir = "reports";
  std::vector<std::string> overrides;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--config", c.config_path, "Config file (key = value sections, or a report sidecar JSON)");
  sub->add_option("--out", c.out_dir, "Output directory")->capture_default_str();
  sub->add_option("overrides", c.overrides, "key=value overrides, e.g. alpha=2.5 experiment.schedule=10,100");
}

ExperimentConfig load(const Common& c) {
  ExperimentConfig config = c.config_path.empty() ? ExperimentConfig{} : load_config(c.config_path);
  for (const auto& o : c.overrides) apply_override(config, o);
  return config;
}

nlohmann::json numerical_error_json(const NumericalError& e) {
  nlohmann::json j;
  j["error"] = e.kind();
  j["message"] = e.what();
  nlohmann::json details = nlohmann::json::object();
  for (const auto& [k, v] : e.details()) details[k] = v;
  j["details"] = details;
  return j;
}

int report_written(std::ostream& out, const std::pair<std::string, std::string>& paths,
                   const lab::ConvergenceReport& report) {
  for (const auto& w : report.warnings) out << "warning: " << w << "\n";
  out << "wrote " << paths.first << "\nwrote " << paths.second << "\n";
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Semibounded extensions of a singular 1D Schrödinger operator: resolvent convergence lab"};
  app.require_subcommand(1);
  app.set_version_flag("--version", report::library_version());

  Common convergence, admissibility, spectrum, form_bound, oracle_common;
  auto* c_cmd = app.add_subcommand("convergence", "Strong/norm resolvent convergence of the cut-off sequences");
  add_common(c_cmd, convergence);
  auto* a_cmd = app.add_subcommand("admissibility", "(V_n h, h) for the deficiency vectors with a fitted growth law");
  add_common(a_cmd, admissibility);
  auto* s_cmd = app.add_subcommand("spectrum", "Lowest eigenvalues of every operator of the sequences");
  add_common(s_cmd, spectrum);
  int k = 3;
  s_cmd->add_option("--k", k, "Number of eigenvalues (1..5)")->capture_default_str();
  auto* f_cmd = app.add_subcommand("form-bound", "Relative form bound (a, b) of the potential");
  add_common(f_cmd, form_bound);
  auto* o_cmd = app.add_subcommand("oracle", "Dense random-instance checks of the extension correspondence");
  int seeds = 100, dim = 8, codim = 2, generals = 3;
  o_cmd->add_option("--seeds", seeds, "Number of seeds")->capture_default_str();
  o_cmd->add_option("--dim", dim, "Ambient dimension N (2..12)")->capture_default_str();
  o_cmd->add_option("--codim", codim, "Codimension d of the domain")->capture_default_str();
  o_cmd->add_option("--general-specs", generals, "Random General specs per seed")->capture_default_str();
  o_cmd->add_option("--out", oracle_common.out_dir, "Output directory")->capture_default_str();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::CallForVersion& e) {
    out << report::library_version() << "\n";
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kValidationFailure;
  }

  try {
    if (c_cmd->parsed()) {
      const auto report = lab::run_convergence(load(convergence));
      return report_written(out, report::write_report(report, convergence.out_dir, "convergence"), report);
    }
    if (a_cmd->parsed()) {
      const auto report = lab::run_admissibility(load(admissibility));
      out << "verdict: " << report.metadata["verdict"].get<std::string>() << "\n";
      return report_written(out, report::write_report(report, admissibility.out_dir, "admissibility"), report);
    }
    if (s_cmd->parsed()) {
      const auto report = lab::run_spectrum_tracking(load(spectrum), k);
      return report_written(out, report::write_report(report, spectrum.out_dir, "spectrum"), report);
    }
    if (f_cmd->parsed()) {
      const ExperimentConfig config = load(form_bound);
      const auto mesh = schrodinger::build_mesh(config.half_length, config.k_per_side, config.grading_exponent);
      const auto potential = config.zero_potential ? schrodinger::SingularPotential::zero_potential()
                                                   : schrodinger::SingularPotential::power_law(config.kappa, config.beta);
      const auto bound = schrodinger::estimate_form_bound(mesh, potential);
      nlohmann::json j;
      j["config"] = to_json(config);
      j["config_hash"] = config_hash(config);
      j["library_version"] = report::library_version();
      j["a"] = bound.a;
      j["b"] = bound.b;
      j["alpha_max"] = std::isfinite(bound.alpha_max) ? nlohmann::json(bound.alpha_max) : nlohmann::json(nullptr);
      nlohmann::json trade = nlohmann::json::array();
      for (const auto& [b, a] : bound.trade_off) trade.push_back({{"b", b}, {"a", a}});
      j["trade_off"] = trade;
      std::filesystem::create_directories(form_bound.out_dir);
      const std::string path = (std::filesystem::path(form_bound.out_dir) / "form_bound.json").string();
      report::write_files_atomically({{path, j.dump(2) + "\n"}});
      out << "a = " << bound.a << ", b = " << bound.b << ", alpha_max = " << bound.alpha_max << "\n";
      if (!(bound.a < 1.0)) out << "warning: a >= 1, the coupling range α < 1/a excludes α = 1\n";
      out << "wrote " << path << "\n";
      return kOk;
    }
    if (o_cmd->parsed()) {
      const auto result = oracle::run_suite(seeds, dim, codim, generals, lab::worker_threads());
      std::filesystem::create_directories(oracle_common.out_dir);
      const std::string path = (std::filesystem::path(oracle_common.out_dir) / "oracle_failures.jsonl").string();
      report::write_files_atomically({{path, oracle::to_json_lines(result.failures)}});
      out << "instances " << result.instances << ", verifications " << result.verifications << ", redraws "
          << result.redraws << ", failures " << result.failures.size() << "\nwrote " << path << "\n";
      return result.failures.empty() ? kOk : kNumericalFailure;
    }
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return kValidationFailure;
  } catch (const NumericalError& e) {
    err << numerical_error_json(e).dump() << "\n";
    return kNumericalFailure;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: out: " << e.what() << "\n";
    return kValidationFailure;
  }
  return kValidationFailure;
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace kreinlab::cli
