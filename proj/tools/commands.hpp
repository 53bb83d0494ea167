#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

namespace fraclab::cli {

using json = nlohmann::json;

/// Bad flags, unreadable or malformed config, missing keys: exit code 1.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Check {
  std::string name;
  double value = 0.0;
  double threshold = 0.0;
  bool pass = false;
};

struct Report {
  json results = json::object();
  std::vector<Check> checks;
  /// File name inside the output directory -> contents.
  std::map<std::string, std::string> files;

  bool passed() const;
  /// value <= threshold
  void check_le(const std::string& name, double value, double threshold);
  void check_true(const std::string& name, bool ok);
};

/// Flag values that override config keys.
struct Overrides {
  std::optional<int> n;
  std::optional<double> s, lambda, alpha, p;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
};

extern const std::vector<std::string> commands;

json default_config();

/// Merges a user config over the defaults, applies overrides and validates.
/// Throws ConfigError listing every unknown, missing or mistyped key.
json resolve_config(const json& user, const Overrides& ov);

/// Runs one experiment; numeric failures propagate as exceptions.
Report run_command(const std::string& command, const json& config, int verbose);

/// Runs and writes summary.json plus CSVs under out. Returns the exit code:
/// 0 all checks pass, 2 a check failed or the computation failed.
int execute(const std::string& command, const json& config, const std::filesystem::path& out, int verbose);

}  // namespace fraclab::cli
