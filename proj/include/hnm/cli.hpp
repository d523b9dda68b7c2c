#pragma once

#include "hnm/model.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace hnm::cli {

/// Fully resolved run configuration.
struct RunConfig {
  ModelParams params;
  FormFactor form_factor;
  std::string form_factor_source = "two-point"; // shorthand name or "explicit"
  double dt = 0.01;
  int e_max = 2;
  double t_max = 8.0;
  double dx = 0.01;
  int jobs = 1;
  bool timestamp = true;
  std::string out; // empty: stdout
};

/// Values given on the command line; each one overrides the file.
struct Overrides {
  std::optional<double> gamma, omega0, epsilon0, delay, dt, t_max, dx;
  std::optional<int> e_max, jobs;
  std::optional<std::string> form_factor;
  std::optional<std::string> out;
  bool no_timestamp = false;
};

/// Parses the JSON config format (keys gamma, omega0, epsilon0, T,
/// form_factor, dt, emax, t_max, dx). Throws ConfigError.
RunConfig resolve_config(const std::optional<std::string>& json_text, const Overrides& overrides);
RunConfig load_config(const std::optional<std::string>& path, const Overrides& overrides);

/// Process exit status for an exception category.
int exit_code_for(const std::exception& e);

/// Entry point shared by the binary and the tests.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace hnm::cli
