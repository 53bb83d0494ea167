#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "commands.hpp"

using fraclab::cli::ConfigError;
using fraclab::cli::json;

int main(int argc, char** argv) {
  CLI::App app{"fraclab: fractional Hardy-Sobolev experiments"};
  app.require_subcommand(1);

  std::string config_path;
  int verbose = -1;
  fraclab::cli::Overrides ov;
  std::optional<std::string> out;

  for (const auto& name : fraclab::cli::commands) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "JSON run config")->check(CLI::ExistingFile);
    sub->add_option("--out", ov.out, "output directory");
    sub->add_option("--seed", ov.seed, "seed for randomized probes");
    sub->add_option("--verbose", verbose, "log level 0-2")->check(CLI::Range(0, 2));
    sub->add_option("--n", ov.n, "dimension");
    sub->add_option("--s", ov.s, "fractional order");
    sub->add_option("--lambda", ov.lambda, "Hardy coefficient");
    sub->add_option("--alpha", ov.alpha, "Hardy weight exponent");
    sub->add_option("--p", ov.p, "power");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  const std::string command = app.get_subcommands().front()->get_name();

  json cfg;
  try {
    json user = json::object();
    if (!config_path.empty()) {
      std::ifstream f(config_path);
      user = json::parse(f, nullptr, false);
      if (user.is_discarded()) throw ConfigError("cannot parse " + config_path);
    }
    cfg = fraclab::cli::resolve_config(user, ov);
    if (verbose >= 0) cfg["verbose"] = verbose;
    return fraclab::cli::execute(command, cfg, cfg.at("out").get<std::string>(), cfg.at("verbose").get<int>());
  } catch (const ConfigError& e) {
    std::cerr << "fraclab: config error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "fraclab: " << e.what() << '\n';
    return 2;
  }
}
