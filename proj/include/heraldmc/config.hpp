#pragma once

// Flat typed key-value config files, TOML-style:
//
//   [source]
//   mean_pairs_per_pulse = 0.01
//   [detectors.H]
//   efficiency = 1.0
//
// write() emits a canonical ordering so identical configs produce identical
// bytes, and a config written by the tool re-parses to an identical
// ExperimentConfig.

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <variant>

#include "heraldmc/experiment.hpp"

namespace heraldmc::config {

using Value = std::variant<std::int64_t, double, bool, std::string>;

struct Table {
  // Dotted keys: "detectors.H.efficiency".
  std::map<std::string, Value> entries;

  bool operator==(const Table&) const = default;
};

// Throws ConfigError with a line number on malformed input or duplicate keys.
Table parse(std::string_view text);

Table parse_file(const std::filesystem::path& path);

std::string write(const Table& table);

// Applies a "section.key=value" override, parsed with the same value rules
// as the file format.
void apply_override(Table& table, const std::string& assignment);

// Builds and validates an ExperimentConfig; unset keys take the reference
// apparatus defaults, unknown keys are rejected.
experiment::ExperimentConfig to_experiment(const Table& table);

Table from_experiment(const experiment::ExperimentConfig& config);

// The two shipped configurations; they differ only by the delay-line swap.
experiment::ExperimentConfig preset_spacelike();
experiment::ExperimentConfig preset_timelike();

}  // namespace heraldmc::config
