// mellin_fde solve <config.json> [--out DIR] [--rho R] [--delta-eta D]
//                  [--eta-bar E] [--no-oracle] [--spectrum]

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "mellinfde/cli/config.hpp"
#include "mellinfde/cli/run.hpp"

namespace mcli = mellinfde::cli;

int main(int argc, char** argv) {
  CLI::App app{"Mellin-transform solver for multi-order fractional differential equations"};
  app.require_subcommand(1);

  auto* solve = app.add_subcommand("solve", "solve the problem described by a JSON config");
  std::string config_path;
  std::string out_dir = ".";
  mcli::Overrides overrides;
  double rho = 0.0;
  double delta_eta = 0.0;
  double eta_bar = 0.0;
  solve->add_option("config", config_path, "configuration document")->required();
  solve->add_option("--out", out_dir, "output directory (created if missing)");
  auto* rho_opt = solve->add_option("--rho", rho, "inversion line abscissa");
  auto* de_opt = solve->add_option("--delta-eta", delta_eta, "imaginary-axis step");
  auto* eb_opt = solve->add_option("--eta-bar", eta_bar, "imaginary-axis cutoff");
  solve->add_flag("--no-oracle", overrides.no_oracle, "skip all oracles");
  solve->add_flag("--spectrum", overrides.spectrum, "also write the solved spectrum");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : mcli::exit_config;
  }
  if (*rho_opt) overrides.rho = rho;
  if (*de_opt) overrides.delta_eta = delta_eta;
  if (*eb_opt) overrides.eta_bar = eta_bar;

  std::ifstream in(config_path);
  if (!in) {
    std::cerr << "error: cannot read " << config_path << '\n';
    return mcli::exit_config;
  }
  std::stringstream text;
  text << in.rdbuf();

  mcli::RunConfig config;
  try {
    config = mcli::parse_config(text.str(), overrides);
  } catch (const mellinfde::ConfigError& e) {
    std::cerr << config_path << ": " << e.what() << '\n';
    return mcli::exit_config;
  }

  try {
    return mcli::run(config, std::filesystem::path(out_dir), std::cerr).exit_code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return mcli::exit_io;
  }
}
