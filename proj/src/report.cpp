#include "heraldmc/report.hpp"

#include <cstdio>
#include <sstream>

#include "heraldmc/errors.hpp"

namespace heraldmc::report {

namespace {

nlohmann::ordered_json separation_json(const spacetime::SeparationClass& sc) {
  return {{"kind", spacetime::to_string(sc.kind)},
          {"signaling_window_s", sc.signaling_window_s},
          {"signaling_threshold_distance_m", sc.signaling_threshold_distance_m},
          {"detector_distance_m", sc.detector_distance_m}};
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

}  // namespace

nlohmann::ordered_json counts_json(const experiment::ExperimentConfig& config,
                                   const experiment::CoincidenceCounts& counts) {
  nlohmann::ordered_json j;
  j["model"] = models::to_string(config.model);
  j["pulses"] = config.n_pulses;
  j["seed"] = config.master_seed;
  j["separation"] = separation_json(config.separation());
  j["counts"] = {{"r_h", counts.r_h},
                 {"r_ha", counts.r_ha},
                 {"r_hb", counts.r_hb},
                 {"r_hab", counts.r_hab},
                 {"r_h00", counts.r_h00}};
  return j;
}

nlohmann::ordered_json estimates_json(const analysis::ProbabilityEstimates& est) {
  nlohmann::ordered_json j;
  j["separation"] = spacetime::to_string(est.separation);
  j["r_h"] = est.r_h;
  j["p_a"] = est.p_a;
  j["p_b"] = est.p_b;
  j["p11"] = est.p11;
  j["p00"] = est.p00;
  j["p10"] = est.p10;
  j["p01"] = est.p01;
  j["se_p_a"] = est.se_p_a;
  j["se_p_b"] = est.se_p_b;
  j["se_p11"] = est.se_p11;
  j["se_p00"] = est.se_p00;
  j["se_p10"] = est.se_p10;
  j["se_p01"] = est.se_p01;
  j["locality_ratio"] = est.locality_ratio ? nlohmann::ordered_json(*est.locality_ratio)
                                           : nlohmann::ordered_json(nullptr);
  j["se_locality_ratio"] = est.se_locality_ratio
                               ? nlohmann::ordered_json(*est.se_locality_ratio)
                               : nlohmann::ordered_json(nullptr);
  return j;
}

analysis::ProbabilityEstimates estimates_from_json(const nlohmann::json& j) {
  analysis::ProbabilityEstimates est;
  try {
    const std::string sep = j.at("separation").get<std::string>();
    if (sep == "spacelike")
      est.separation = spacetime::SeparationKind::Spacelike;
    else if (sep == "timelike")
      est.separation = spacetime::SeparationKind::Timelike;
    else
      throw ConfigError("estimates file has unknown separation '" + sep + "'");
    est.r_h = j.at("r_h").get<double>();
    est.p_a = j.at("p_a").get<double>();
    est.p_b = j.at("p_b").get<double>();
    est.p11 = j.at("p11").get<double>();
    est.p00 = j.at("p00").get<double>();
    est.p10 = j.at("p10").get<double>();
    est.p01 = j.at("p01").get<double>();
    est.se_p_a = j.at("se_p_a").get<double>();
    est.se_p_b = j.at("se_p_b").get<double>();
    est.se_p11 = j.at("se_p11").get<double>();
    est.se_p00 = j.at("se_p00").get<double>();
    est.se_p10 = j.at("se_p10").get<double>();
    est.se_p01 = j.at("se_p01").get<double>();
    if (j.contains("locality_ratio") && !j.at("locality_ratio").is_null())
      est.locality_ratio = j.at("locality_ratio").get<double>();
    if (j.contains("se_locality_ratio") && !j.at("se_locality_ratio").is_null())
      est.se_locality_ratio = j.at("se_locality_ratio").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed estimates file: ") + e.what());
  }
  return est;
}

nlohmann::ordered_json audit_json(const std::optional<analysis::EnergyAudit>& audit,
                                  const std::string& skip_reason) {
  nlohmann::ordered_json j;
  j["computed"] = audit.has_value();
  if (audit) {
    j["n_heralded"] = audit->n_heralded;
    j["n_zero_click"] = audit->n_zero_click;
    j["n_double_click"] = audit->n_double_click;
    j["anomaly_fraction"] = audit->anomaly_fraction;
  } else {
    j["reason"] = skip_reason;
  }
  return j;
}

nlohmann::ordered_json comparison_json(const analysis::ComparisonReport& report,
                                       const analysis::ProbabilityEstimates& a,
                                       const analysis::ProbabilityEstimates& b,
                                       const std::string& label_a, const std::string& label_b) {
  nlohmann::ordered_json j;
  j["a"] = estimates_json(a);
  j["b"] = estimates_json(b);
  j["a"]["label"] = label_a;
  j["b"]["label"] = label_b;
  j["z_scores"] = {{"p_a", report.z_p_a}, {"p_b", report.z_p_b}, {"p11", report.z_p11},
                   {"p00", report.z_p00}, {"p10", report.z_p10}, {"p01", report.z_p01}};
  j["max_z"] = report.max_z();
  j["p11_ratio"] = report.p11_ratio ? nlohmann::ordered_json(*report.p11_ratio)
                                    : nlohmann::ordered_json(nullptr);
  j["locality_ratio_of_ratios"] = report.locality_ratio_of_ratios
                                      ? nlohmann::ordered_json(*report.locality_ratio_of_ratios)
                                      : nlohmann::ordered_json(nullptr);
  return j;
}

namespace {

std::string estimate_cell(double p, double se) { return fixed(p, 6) + " +- " + fixed(se, 6); }

std::string ratio_cell(const analysis::ProbabilityEstimates& est) {
  if (!est.locality_ratio) return "undefined";
  std::string cell = fixed(*est.locality_ratio, 4);
  if (est.se_locality_ratio) cell += " +- " + fixed(*est.se_locality_ratio, 4);
  return cell;
}

void estimate_rows(std::ostringstream& out, const std::string& label,
                   const analysis::ProbabilityEstimates& est) {
  out << label << '\n';
  out << "  P_A   = " << estimate_cell(est.p_a, est.se_p_a) << '\n';
  out << "  P_B   = " << estimate_cell(est.p_b, est.se_p_b) << '\n';
  out << "  P(1,1)= " << estimate_cell(est.p11, est.se_p11) << '\n';
  out << "  P(0,0)= " << estimate_cell(est.p00, est.se_p00) << '\n';
  out << "  P(1,0)= " << estimate_cell(est.p10, est.se_p10) << '\n';
  out << "  P(0,1)= " << estimate_cell(est.p01, est.se_p01) << '\n';
  out << "  P(1,1)/(P_A*P_B) = " << ratio_cell(est) << '\n';
}

}  // namespace

std::string run_report_text(const experiment::ExperimentConfig& config,
                            const experiment::CoincidenceCounts& counts,
                            const analysis::ProbabilityEstimates& est,
                            const std::optional<analysis::EnergyAudit>& audit) {
  const auto sc = config.separation();
  std::ostringstream out;
  out << "model: " << models::to_string(config.model)
      << "   separation: " << spacetime::to_string(sc.kind)
      << "   pulses: " << config.n_pulses << "   seed: " << config.master_seed << '\n';
  out << "signaling window: " << sc.signaling_window_s
      << " s   threshold distance: " << sc.signaling_threshold_distance_m
      << " m   detector distance: " << sc.detector_distance_m << " m\n";
  out << "counts: R_H=" << counts.r_h << " R_HA=" << counts.r_ha << " R_HB=" << counts.r_hb
      << " R_HAB=" << counts.r_hab << " R_H00=" << counts.r_h00 << '\n';
  estimate_rows(out, "heralded estimates:", est);
  if (audit) {
    out << "energy audit (heralded single-pair trials): anomaly_fraction = "
        << fixed(audit->anomaly_fraction, 6) << "  (zero-click "
        << fixed(audit->n_zero_click / audit->n_heralded, 6) << ", double-click "
        << fixed(audit->n_double_click / audit->n_heralded, 6) << ")\n";
  }
  return out.str();
}

std::string comparison_table_text(const analysis::ComparisonReport& report,
                                  const analysis::ProbabilityEstimates& a,
                                  const analysis::ProbabilityEstimates& b,
                                  const std::string& label_a, const std::string& label_b) {
  std::ostringstream out;
  estimate_rows(out, label_a + " (" + spacetime::to_string(a.separation) + "):", a);
  estimate_rows(out, label_b + " (" + spacetime::to_string(b.separation) + "):", b);
  out << "z-scores: P_A " << fixed(report.z_p_a, 2) << " | P_B " << fixed(report.z_p_b, 2)
      << " | P11 " << fixed(report.z_p11, 2) << " | P00 " << fixed(report.z_p00, 2)
      << " | P10 " << fixed(report.z_p10, 2) << " | P01 " << fixed(report.z_p01, 2) << '\n';
  out << "max z: " << fixed(report.max_z(), 2) << '\n';
  if (report.p11_ratio)
    out << "P11 ratio (a/b): " << fixed(*report.p11_ratio, 3) << '\n';
  else
    out << "P11 ratio (a/b): undefined\n";
  return out.str();
}

void write_trial_csv_header(std::ostream& out) {
  out << "pulse_index,n_pairs,herald,A,B,branch_weight,hidden_path\n";
}

void write_trial_csv_row(std::ostream& out, const experiment::TrialRecord& rec) {
  char weight[64];
  std::snprintf(weight, sizeof(weight), "%.17g", rec.branch_weight);
  out << rec.pulse_index << ',' << rec.n_pairs << ',' << (rec.herald_clicked ? 1 : 0) << ','
      << (rec.click_a ? 1 : 0) << ',' << (rec.click_b ? 1 : 0) << ',' << weight << ','
      << (rec.hidden_path ? models::to_string(*rec.hidden_path) : "") << '\n';
}

}  // namespace heraldmc::report
