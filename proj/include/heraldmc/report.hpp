#pragma once

// Serialization of run outputs: counts.json, estimates.json, audit.json,
// comparison reports, the trial-log CSV and the human-readable tables.
// JSON uses a fixed key order so identical runs produce identical bytes.

#include <optional>
#include <ostream>
#include <string>

#include <json.hpp>

#include "heraldmc/analysis.hpp"
#include "heraldmc/experiment.hpp"

namespace heraldmc::report {

nlohmann::ordered_json counts_json(const experiment::ExperimentConfig& config,
                                   const experiment::CoincidenceCounts& counts);

nlohmann::ordered_json estimates_json(const analysis::ProbabilityEstimates& est);

// Throws ConfigError on malformed input (missing or mistyped fields).
analysis::ProbabilityEstimates estimates_from_json(const nlohmann::json& j);

nlohmann::ordered_json audit_json(const std::optional<analysis::EnergyAudit>& audit,
                                  const std::string& skip_reason);

nlohmann::ordered_json comparison_json(const analysis::ComparisonReport& report,
                                       const analysis::ProbabilityEstimates& a,
                                       const analysis::ProbabilityEstimates& b,
                                       const std::string& label_a, const std::string& label_b);

std::string run_report_text(const experiment::ExperimentConfig& config,
                            const experiment::CoincidenceCounts& counts,
                            const analysis::ProbabilityEstimates& est,
                            const std::optional<analysis::EnergyAudit>& audit);

// Two-row table (one per configuration) with columns P_A, P_B, P11, ratio,
// plus the z-scores and the P11 ratio between the rows.
std::string comparison_table_text(const analysis::ComparisonReport& report,
                                  const analysis::ProbabilityEstimates& a,
                                  const analysis::ProbabilityEstimates& b,
                                  const std::string& label_a, const std::string& label_b);

// Trial log CSV. Column order: pulse_index,n_pairs,herald,A,B,branch_weight,hidden_path.
void write_trial_csv_header(std::ostream& out);
void write_trial_csv_row(std::ostream& out, const experiment::TrialRecord& record);

}  // namespace heraldmc::report
