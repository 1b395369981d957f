#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "clustersim/config.hpp"

namespace clustersim::cli {

inline constexpr const char* kVersion = "0.1.0";

enum class Command { Coverage, Rate, RateLoss, PmfN, Sweep };
enum class Mode { Mc, Analytic, Both };

/// Flat key=value settings; keys match the long option names without dashes.
using Settings = std::map<std::string, std::string>;

struct RunSpec {
  Command command = Command::Coverage;
  Mode mode = Mode::Both;
  SimConfig cfg;
  std::string grid_param;
  std::vector<double> grid;
  std::string output_path;  ///< empty writes to standard output
  Settings settings;        ///< resolved settings, echoed in the metadata block
};

/// Inclusive "start:step:stop", a comma list, or a single number. Throws ConfigError.
std::vector<double> parse_grid(const std::string& text);

/// Reads a flat key=value file ('#' starts a comment). Throws ConfigError / std::ios_base::failure.
Settings read_config_file(const std::string& path);

/// Settings recorded in the metadata block of a CSV written by this tool.
Settings read_replay_file(const std::string& path);

/// Builds a run from resolved settings. Throws ConfigError.
RunSpec make_run_spec(Command command, const Settings& settings);

/// Evaluates the run and returns the CSV text (metadata block, header, rows).
std::string render(const RunSpec& spec);

/// Shortest round-trip decimal form.
std::string format_number(double x);

/// Full command-line entry point; returns the process exit status
/// (0 ok, 2 configuration, 3 quadrature, 4 I/O, 1 anything else).
int main(int argc, char** argv, std::ostream& err);

}  // namespace clustersim::cli
