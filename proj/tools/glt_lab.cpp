// glt-lab: configuration-driven runner for the matrix-sequence experiments.

#include <glt/lab/config.hpp>
#include <glt/lab/report.hpp>
#include <glt/lab/runner.hpp>

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

namespace {

constexpr int kExitConfig = 2;

int emit(const glt::lab::Report& report, const std::optional<std::string>& path) {
  if (path && *path != "-") {
    std::ofstream out(*path, std::ios::binary);
    if (!out) {
      std::cerr << "error: cannot write '" << *path << "'\n";
      return kExitConfig;
    }
    report.write_csv(out);
  } else {
    report.write_csv(std::cout);
  }
  return report.exit_code();
}

std::optional<glt::Role> role_from(const std::string& name) {
  if (name == "a") return glt::Role::A;
  if (name == "F" || name == "f") return glt::Role::F;
  if (name == "k") return glt::Role::K;
  if (name == "theta") return glt::Role::Theta;
  if (name == "any") return glt::Role::Any;
  return std::nullopt;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"glt-lab: spectral experiments on Toeplitz, circulant and GLT matrix sequences"};
  app.require_subcommand(1);

  std::string config_path;
  std::string output;
  std::string dump_dir;
  auto* run = app.add_subcommand("run", "run every experiment in a config file");
  run->add_option("config", config_path, "INI config file")->required();
  run->add_option("-o,--output", output, "CSV output path (overrides the config; '-' for stdout)");
  run->add_option("--dump-matrices", dump_dir, "write every generated matrix to this directory");

  std::string demo_name;
  auto* demo = app.add_subcommand("demo", "run a canned counterexample experiment");
  demo->add_option("name", demo_name, "alt_identity | half_shift | scaled_cycle | jordan_shift")->required();
  demo->add_option("-o,--output", output, "CSV output path");

  std::string expr;
  std::string role = "any";
  auto* parse = app.add_subcommand("parse", "parse an expression and print its tree");
  parse->add_option("expr", expr, "expression")->required();
  parse->add_option("--role", role, "a | F | k | theta | any");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  glt::lab::RunOptions opt;
  opt.threads = glt::lab::threads_from_env();

  try {
    if (*parse) {
      const auto r = role_from(role);
      if (!r) throw glt::ConfigError("unknown role '" + role + "'");
      std::cout << glt::parse_expr(expr, *r).to_string() << '\n';
      return 0;
    }
    if (*demo) {
      bool known = false;
      for (const auto& n : glt::lab::demo_names()) known = known || n == demo_name;
      if (!known) throw glt::UnknownName("unknown demo '" + demo_name + "'");
      std::optional<std::string> out;
      if (!output.empty()) out = output;
      return emit(glt::lab::demo(demo_name, opt), out);
    }
    const glt::lab::LabConfig cfg = glt::lab::load_config_file(config_path);
    if (!dump_dir.empty()) opt.dump_dir = dump_dir;
    std::optional<std::string> out = cfg.output;
    if (!output.empty()) out = output;
    return emit(glt::lab::run(cfg, opt), out);
  } catch (const glt::Error& e) {
    // Config, parse and name errors: nothing was run.
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  }
}
