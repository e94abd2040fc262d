#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "lmc/commands.hpp"
#include "lmc/error.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Second boundary value problem solver for the arctan-eigenvalue equation"};
  app.require_subcommand(1);

  std::string config_path;
  std::string output_dir;
  std::string field_path;
  std::optional<double> c_inf;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("config", config_path, "configuration file")->required();
    sub->add_option("-o,--output", output_dir, "override [output] directory");
  };
  CLI::App* run = app.add_subcommand("run", "flow to the translating solution");
  CLI::App* solve = app.add_subcommand("solve", "stationary Newton solve");
  CLI::App* check = app.add_subcommand("check", "admissibility report");
  CLI::App* legendre = app.add_subcommand("legendre", "conjugate and duality checks");
  CLI::App* refine = app.add_subcommand("refine", "grid study at 33, 65, 129");
  for (CLI::App* sub : {run, solve, check, legendre, refine}) add_common(sub);
  legendre->add_option("-f,--field", field_path,
                       "field CSV (default: <output>/profile.csv)");
  legendre->add_option("-c,--c-inf", c_inf, "translation constant for the dual residual");

  CLI11_PARSE(app, argc, argv);

  lmc::RunConfig config;
  try {
    config = lmc::parse_config(config_path);
  } catch (const lmc::Error& e) {
    std::cerr << e.what() << "\n";
    std::cout << "ERROR " << e.module() << " " << e.code() << std::endl;
    return 2;
  }
  if (!output_dir.empty()) config.output.directory = output_dir;

  try {
    if (run->parsed()) return lmc::run_command(config, std::cout);
    if (solve->parsed()) return lmc::solve_command(config, std::cout);
    if (check->parsed()) return lmc::check_command(config, std::cout);
    if (refine->parsed()) return lmc::refine_command(config, std::cout);
    if (field_path.empty()) field_path = config.output.directory + "/profile.csv";
    return lmc::legendre_command(config, field_path, c_inf, std::cout);
  } catch (const lmc::Error& e) {
    std::cerr << e.what() << "\n";
    std::cout << "ERROR " << e.module() << " " << e.code() << std::endl;
    return 1;
  }
}
