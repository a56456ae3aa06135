#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "alignrecon/pipeline.hpp"

namespace alignrecon {

// Everything a CLI command needs, loadable from a key=value file.
// Lines are `key = value`; `#` starts a comment; blank lines are ignored.
// Unknown keys and repeated keys are errors. Every key is optional.
struct RunConfig {
  SolverConfig solver;
  ExperimentSpec experiment;

  std::vector<std::uint64_t> seeds{0};  // sweep seeds
  SweepAxis sweep_axis = SweepAxis::Sigma;
  std::vector<double> sweep_values{0.0, 1.0, 2.0};
  unsigned threads = 1;
  bool align = true;    // false: phi stays 0
  bool use_ref = true;  // false: single-modal reconstruction
  std::filesystem::path out = "out";

  void validate() const;
};

RunConfig parse_run_config(const std::string& text);
RunConfig load_run_config(const std::filesystem::path& path);

// Applies one assignment; throws InvalidSpec for unknown keys or bad values.
void set_run_config_value(RunConfig& cfg, const std::string& key, const std::string& value);

// Canonical text listing every key. Doubles are written in shortest
// round-trip form, so parse_run_config(format_run_config(c)) reproduces c exactly.
std::string format_run_config(const RunConfig& cfg);
void save_run_config(const RunConfig& cfg, const std::filesystem::path& path);

// Recognized keys, in canonical order.
const std::vector<std::string>& run_config_keys();

}  // namespace alignrecon
