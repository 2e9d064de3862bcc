#pragma once

// Heralded probability estimators, the locality ratio P(1,1)/(P_A*P_B), the
// per-event energy-conservation audit, and the analytic accidental-triples
// oracle that closes the source loophole.
//
// Estimator mapping: the hardware measures R_HA, R_HB and R_HAB in separate
// sessions, each normalized by that session's herald singles. The simulator
// measures A and B simultaneously, so a single R_H serves as every
// denominator:
//
//   P_A = R_HA / R_H,  P_B = R_HB / R_H,  P(1,1) = R_HAB / R_H,
//   P(0,0) = R_H00 / R_H,  P(1,0) = P_A - P(1,1),  P(0,1) = P_B - P(1,1).

#include <optional>
#include <span>

#include "heraldmc/experiment.hpp"
#include "heraldmc/spacetime.hpp"

namespace heraldmc::analysis {

struct ProbabilityEstimates {
  double p_a = 0.0, p_b = 0.0;
  double p11 = 0.0, p00 = 0.0, p10 = 0.0, p01 = 0.0;
  double se_p_a = 0.0, se_p_b = 0.0;
  double se_p11 = 0.0, se_p00 = 0.0, se_p10 = 0.0, se_p01 = 0.0;
  // Undefined (no value) when P_A * P_B == 0.
  std::optional<double> locality_ratio;
  std::optional<double> se_locality_ratio;
  double r_h = 0.0;
  spacetime::SeparationKind separation = spacetime::SeparationKind::Spacelike;

  bool operator==(const ProbabilityEstimates&) const = default;
};

// Throws std::invalid_argument when counts.r_h == 0. Standard errors are
// plain binomial sqrt(p(1-p)/R_H); the ratio error uses first-order
// propagation and is present only when the ratio is defined and P11 > 0.
ProbabilityEstimates estimate(const experiment::CoincidenceCounts& counts,
                              spacetime::SeparationKind separation);

struct OracleResult {
  double p11_given_herald = 0.0;
  double truncation_bound = 0.0;
};

// Exact accidental-triples prediction for a NonlocalCollapse (quantum) run:
// P(1,1 | herald) caused purely by multi-pair pulses, computed by enumerating
// the pair number n up to n_max:
//
//   P(1,1 | herald) = sum_n Pois(n; mu) (1-(1-eta_h)^n) P(both | n, eta_ab)
//                     / (1 - exp(-mu * eta_h))
//
// with the n signal photons routed 50-50 through detectors of efficiency
// eta_ab. Throws std::invalid_argument when n_max < 2 or the truncation tail
// exceeds 1e-12 of the result.
OracleResult accidental_triples_oracle(double mu, double eta_h, double eta_ab, int n_max);

// P(both detectors click | n signal photons split 50-50, efficiency eta).
double p_both_click_given_n(int n_signals, double eta);

struct EnergyAudit {
  double n_heralded = 0.0;
  double n_zero_click = 0.0;
  double n_double_click = 0.0;
  double anomaly_fraction = 0.0;
};

// Streaming tally of heralded single-pair trials; usable as a TrialSink so
// the audit never needs the full log in memory.
class EnergyAuditAccumulator : public experiment::TrialSink {
 public:
  void on_trial(const experiment::TrialRecord& record) override;
  // Empty when no heralded single-pair trial was seen.
  std::optional<EnergyAudit> result() const;

 private:
  double n_heralded_ = 0.0;
  double n_zero_click_ = 0.0;
  double n_double_click_ = 0.0;
};

// Tallies energy-balance anomalies (no click / double click) over heralded
// single-pair trials. Meaningful only with ideal A/B detectors, which the
// caller asserts via `ideal_detectors`; throws std::invalid_argument when the
// flag is false or no trial survives the single-pair filter.
EnergyAudit energy_audit(std::span<const experiment::TrialRecord> records,
                         bool ideal_detectors);

struct ComparisonReport {
  double z_p_a = 0.0, z_p_b = 0.0;
  double z_p11 = 0.0, z_p00 = 0.0, z_p10 = 0.0, z_p01 = 0.0;
  std::optional<double> p11_ratio;               // a.p11 / b.p11
  std::optional<double> locality_ratio_of_ratios;

  double max_z() const;
};

// Per-field z = |p_a - p_b| / sqrt(se_a^2 + se_b^2) (0 when both the
// difference and the errors vanish), plus the P11 ratio, the orders-of-
// magnitude figure of merit.
ComparisonReport compare_runs(const ProbabilityEstimates& a, const ProbabilityEstimates& b);

}  // namespace heraldmc::analysis
