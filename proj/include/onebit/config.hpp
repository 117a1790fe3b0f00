#pragma once

#include <filesystem>
#include <string>

#include "onebit/core_model.hpp"
#include "onebit/sim_harness.hpp"

namespace onebit {

// JSON configuration shared by the CLI subcommands; schema in docs/config.md.
// Unknown keys are rejected so typos surface as errors.
SweepConfig parse_config(const std::string& json_text);
SweepConfig load_config(const std::filesystem::path& path);

// Model and statistics at one SNR point of the configuration.
struct Scenario {
  SystemModel model;
  SecondOrderStats stats;
  double snr_db;
};

Scenario make_scenario(const SweepConfig& config, double snr_db);

// Parses {"re": [...], "im": [...]} (vector) or nested arrays (matrix); the
// imaginary part is optional.
CVec parse_complex_vector(const std::string& json_text);
Mat parse_real_matrix(const std::string& json_text);

std::string read_text_file(const std::filesystem::path& path);

}  // namespace onebit
