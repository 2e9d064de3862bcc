#include "heraldmc/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace heraldmc::analysis {

namespace {

double binomial_se(double p, double n) { return std::sqrt(std::max(0.0, p * (1.0 - p)) / n); }

}  // namespace

ProbabilityEstimates estimate(const experiment::CoincidenceCounts& counts,
                              spacetime::SeparationKind separation) {
  if (!(counts.r_h > 0.0))
    throw std::invalid_argument("cannot estimate probabilities from a run with no herald counts");

  ProbabilityEstimates est;
  est.r_h = counts.r_h;
  est.separation = separation;
  est.p_a = counts.r_ha / counts.r_h;
  est.p_b = counts.r_hb / counts.r_h;
  est.p11 = counts.r_hab / counts.r_h;
  est.p00 = counts.r_h00 / counts.r_h;
  est.p10 = est.p_a - est.p11;
  est.p01 = est.p_b - est.p11;

  est.se_p_a = binomial_se(est.p_a, counts.r_h);
  est.se_p_b = binomial_se(est.p_b, counts.r_h);
  est.se_p11 = binomial_se(est.p11, counts.r_h);
  est.se_p00 = binomial_se(est.p00, counts.r_h);
  est.se_p10 = binomial_se(est.p10, counts.r_h);
  est.se_p01 = binomial_se(est.p01, counts.r_h);

  const double denom = est.p_a * est.p_b;
  if (denom > 0.0) {
    est.locality_ratio = est.p11 / denom;
    if (est.p11 > 0.0) {
      const double rel = std::sqrt(std::pow(est.se_p11 / est.p11, 2) +
                                   std::pow(est.se_p_a / est.p_a, 2) +
                                   std::pow(est.se_p_b / est.p_b, 2));
      est.se_locality_ratio = *est.locality_ratio * rel;
    }
  }
  return est;
}

double p_both_click_given_n(int n_signals, double eta) {
  if (n_signals < 0) throw std::invalid_argument("n_signals must be >= 0");
  if (!std::isfinite(eta) || eta < 0.0 || eta > 1.0)
    throw std::invalid_argument("efficiency must be in [0, 1]");
  // Sum over k photons transmitted to A out of n, each routing 50-50.
  double total = 0.0;
  double binom = std::pow(0.5, n_signals);  // C(n,0) / 2^n
  for (int k = 0; k <= n_signals; ++k) {
    const double p_a_clicks = 1.0 - std::pow(1.0 - eta, k);
    const double p_b_clicks = 1.0 - std::pow(1.0 - eta, n_signals - k);
    total += binom * p_a_clicks * p_b_clicks;
    binom *= static_cast<double>(n_signals - k) / static_cast<double>(k + 1);
  }
  return total;
}

OracleResult accidental_triples_oracle(double mu, double eta_h, double eta_ab, int n_max) {
  if (!std::isfinite(mu) || mu < 0.0 || mu > 500.0)
    throw std::invalid_argument("mu must be finite, >= 0 and <= 500");
  if (!std::isfinite(eta_h) || eta_h < 0.0 || eta_h > 1.0)
    throw std::invalid_argument("eta_h must be in [0, 1]");
  if (!std::isfinite(eta_ab) || eta_ab < 0.0 || eta_ab > 1.0)
    throw std::invalid_argument("eta_ab must be in [0, 1]");
  if (n_max < 2) throw std::invalid_argument("n_max must be >= 2");

  if (mu == 0.0 || eta_ab == 0.0) return {0.0, 0.0};
  if (eta_h == 0.0)
    throw std::invalid_argument("eta_h = 0 gives zero herald probability; "
                                "the heralded triple rate is undefined");

  const double p_herald = -std::expm1(-mu * eta_h);  // Poisson thinning, exact

  double numerator = 0.0;
  double pmf = std::exp(-mu);
  for (int n = 0; n <= n_max; ++n) {
    if (n >= 1) {
      const double herald_given_n = 1.0 - std::pow(1.0 - eta_h, n);
      numerator += pmf * herald_given_n * p_both_click_given_n(n, eta_ab);
    }
    pmf *= mu / static_cast<double>(n + 1);
  }

  // Tail bound: every conditional factor is <= 1, so the truncated mass of
  // the Poisson pmf bounds the numerator error.
  double tail = 0.0;
  double term = pmf;  // pmf at n_max + 1
  for (int n = n_max + 1; n < n_max + 10000; ++n) {
    tail += term;
    term *= mu / static_cast<double>(n + 1);
    if (term < tail * 1e-18 + 1e-300) break;
  }

  OracleResult result;
  result.p11_given_herald = numerator / p_herald;
  result.truncation_bound = tail / p_herald;
  if (result.truncation_bound > 1e-12 * result.p11_given_herald)
    throw std::invalid_argument("n_max too small: truncation bound exceeds 1e-12 of the result");
  return result;
}

void EnergyAuditAccumulator::on_trial(const experiment::TrialRecord& rec) {
  if (!rec.herald_clicked || rec.n_pairs != 1) return;
  n_heralded_ += rec.branch_weight;
  if (!rec.click_a && !rec.click_b) n_zero_click_ += rec.branch_weight;
  if (rec.click_a && rec.click_b) n_double_click_ += rec.branch_weight;
}

std::optional<EnergyAudit> EnergyAuditAccumulator::result() const {
  if (!(n_heralded_ > 0.0)) return std::nullopt;
  EnergyAudit audit;
  audit.n_heralded = n_heralded_;
  audit.n_zero_click = n_zero_click_;
  audit.n_double_click = n_double_click_;
  audit.anomaly_fraction = (n_zero_click_ + n_double_click_) / n_heralded_;
  return audit;
}

EnergyAudit energy_audit(std::span<const experiment::TrialRecord> records,
                         bool ideal_detectors) {
  if (!ideal_detectors)
    throw std::invalid_argument("energy audit requires ideal detectors "
                                "(unit efficiency, no dark counts) on A and B");
  EnergyAuditAccumulator acc;
  for (const auto& rec : records) acc.on_trial(rec);
  const auto audit = acc.result();
  if (!audit)
    throw std::invalid_argument("energy audit has no heralded single-pair trials to score");
  return *audit;
}

namespace {

double z_score(double pa, double sa, double pb, double sb) {
  const double diff = std::abs(pa - pb);
  if (diff == 0.0) return 0.0;
  const double denom = std::sqrt(sa * sa + sb * sb);
  if (denom == 0.0) return std::numeric_limits<double>::infinity();
  return diff / denom;
}

}  // namespace

double ComparisonReport::max_z() const {
  return std::max({z_p_a, z_p_b, z_p11, z_p00, z_p10, z_p01});
}

ComparisonReport compare_runs(const ProbabilityEstimates& a, const ProbabilityEstimates& b) {
  if (!(a.r_h > 0.0) || !(b.r_h > 0.0))
    throw std::invalid_argument("comparison requires runs with herald counts");
  ComparisonReport report;
  report.z_p_a = z_score(a.p_a, a.se_p_a, b.p_a, b.se_p_a);
  report.z_p_b = z_score(a.p_b, a.se_p_b, b.p_b, b.se_p_b);
  report.z_p11 = z_score(a.p11, a.se_p11, b.p11, b.se_p11);
  report.z_p00 = z_score(a.p00, a.se_p00, b.p00, b.se_p00);
  report.z_p10 = z_score(a.p10, a.se_p10, b.p10, b.se_p10);
  report.z_p01 = z_score(a.p01, a.se_p01, b.p01, b.se_p01);
  if (b.p11 > 0.0) report.p11_ratio = a.p11 / b.p11;
  if (a.locality_ratio && b.locality_ratio && *b.locality_ratio > 0.0)
    report.locality_ratio_of_ratios = *a.locality_ratio / *b.locality_ratio;
  return report;
}

}  // namespace heraldmc::analysis
