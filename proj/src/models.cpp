#include "heraldmc/models.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>

#include "heraldmc/errors.hpp"

namespace heraldmc::models {

const char* to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::NonlocalCollapse: return "nonlocal_collapse";
    case ModelKind::LocalCollapse: return "local_collapse";
    case ModelKind::EmptyWave: return "empty_wave";
    default: return "many_worlds";
  }
}

ModelKind model_from_string(const std::string& name) {
  if (name == "nonlocal_collapse") return ModelKind::NonlocalCollapse;
  if (name == "local_collapse") return ModelKind::LocalCollapse;
  if (name == "empty_wave") return ModelKind::EmptyWave;
  if (name == "many_worlds") return ModelKind::ManyWorlds;
  throw ConfigError("unknown model '" + name +
                    "' (expected nonlocal_collapse | local_collapse | empty_wave | many_worlds)");
}

const char* to_string(HiddenPath path) {
  return path == HiddenPath::Transmitted ? "transmitted" : "reflected";
}

double BranchSet::total_weight() const {
  double sum = 0.0;
  for (const auto& b : branches) sum += b.branch_weight;
  return sum;
}

void validate(const BranchSet& set, int n_signal_photons) {
  if (std::abs(set.total_weight() - 1.0) > 1e-12)
    throw std::logic_error("branch weights must sum to 1");
  for (const auto& b : set.branches) {
    if (!(b.branch_weight > 0.0) || b.branch_weight > 1.0)
      throw std::logic_error("branch weight must be in (0, 1]");
  }
  if (n_signal_photons == 1 && set.branches.size() > 1) {
    if (set.branches.size() != 2) throw std::logic_error("single photon must yield 2 branches");
    for (const auto& b : set.branches)
      if (b.click_a == b.click_b)
        throw std::logic_error("single-photon branches must have exactly one click");
  }
}

void validate(const ModelParams& params) {
  if (!std::isfinite(params.transmittance) || params.transmittance < 0.0 ||
      params.transmittance > 1.0)
    throw std::invalid_argument("transmittance must be in [0, 1]");
  if (params.branch_cap < 2) throw std::invalid_argument("branch_cap must be >= 2");
}

namespace {

OutcomeDecision finish(OutcomeDecision d) {
  d.click_a = d.photons_at_a > 0;
  d.click_b = d.photons_at_b > 0;
  return d;
}

// One photon reaches exactly one detector; which one is drawn at the
// transmittance threshold. Shared by NonlocalCollapse, LocalCollapse under
// timelike separation (coordinated anti-correlation) and EmptyWave (where the
// draw is the hidden variable, fixed at the beam-splitter).
OutcomeDecision route_exclusively(int n, double transmittance, bool record_hidden,
                                  rng::Stream& routing) {
  OutcomeDecision d;
  for (int i = 0; i < n; ++i) {
    const bool transmitted = routing.bernoulli(transmittance);
    if (transmitted)
      ++d.photons_at_a;
    else
      ++d.photons_at_b;
    if (record_hidden && i == 0)
      d.hidden_path = transmitted ? HiddenPath::Transmitted : HiddenPath::Reflected;
  }
  return finish(d);
}

OutcomeDecision local_independent(int n, double transmittance, rng::Stream& routing) {
  OutcomeDecision d;
  for (int i = 0; i < n; ++i) {
    // Each detector collapses independently with its port probability; a
    // single photon can therefore fire both detectors or neither.
    if (routing.bernoulli(transmittance)) ++d.photons_at_a;
    if (routing.bernoulli(1.0 - transmittance)) ++d.photons_at_b;
  }
  return finish(d);
}

BranchSet enumerate_worlds(int n, const ModelParams& params) {
  if (n > 62 || (std::uint64_t{1} << n) > params.branch_cap)
    throw BranchCapExceeded("many_worlds branch set for " + std::to_string(n) +
                            " photons exceeds branch cap " + std::to_string(params.branch_cap));
  const std::uint64_t n_branches = std::uint64_t{1} << n;
  const double t = params.transmittance;
  BranchSet set;
  set.branches.reserve(n_branches);
  for (std::uint64_t assignment = 0; assignment < n_branches; ++assignment) {
    OutcomeDecision d;
    d.photons_at_a = static_cast<std::uint32_t>(std::popcount(assignment));
    d.photons_at_b = static_cast<std::uint32_t>(n) - d.photons_at_a;
    d.branch_weight = std::pow(t, d.photons_at_a) * std::pow(1.0 - t, d.photons_at_b);
    if (d.branch_weight > 0.0) set.branches.push_back(finish(d));
  }
  return set;
}

}  // namespace

BranchSet decide(ModelKind model, int n_signal_photons, spacetime::SeparationKind separation,
                 const ModelParams& params, rng::Stream& routing) {
  if (n_signal_photons < 0)
    throw std::invalid_argument("n_signal_photons must be >= 0");
  validate(params);

  const int n = n_signal_photons;
  switch (model) {
    case ModelKind::NonlocalCollapse:
      return BranchSet{{route_exclusively(n, params.transmittance, false, routing)}};
    case ModelKind::LocalCollapse:
      if (separation == spacetime::SeparationKind::Timelike)
        return BranchSet{{route_exclusively(n, params.transmittance, false, routing)}};
      return BranchSet{{local_independent(n, params.transmittance, routing)}};
    case ModelKind::EmptyWave:
      return BranchSet{{route_exclusively(n, params.transmittance, true, routing)}};
    default:
      return enumerate_worlds(n, params);
  }
}

OutcomeDecision counterfactual_decide(ModelKind model, HiddenPath hidden,
                                      double detector_distance_from_bs_m) {
  if (!std::isfinite(detector_distance_from_bs_m) || detector_distance_from_bs_m < 0.0)
    throw std::invalid_argument("detector distance must be finite and >= 0");
  if (model != ModelKind::EmptyWave)
    throw CounterfactualUndefined(std::string("counterfactual undefined for ") +
                                  to_string(model) +
                                  ": no hidden variable propagates in spacetime");
  // The hidden variable alone fixes the outcome; the detector placement is
  // deliberately ignored.
  OutcomeDecision d;
  d.hidden_path = hidden;
  if (hidden == HiddenPath::Transmitted)
    d.photons_at_a = 1;
  else
    d.photons_at_b = 1;
  return finish(d);
}

std::array<double, 4> nonlocal_collapse_class_probabilities(int n_signal_photons,
                                                            double transmittance) {
  if (n_signal_photons < 0) throw std::invalid_argument("n_signal_photons must be >= 0");
  const int n = n_signal_photons;
  if (n == 0) return {0.0, 0.0, 0.0, 1.0};
  const double all_a = std::pow(transmittance, n);
  const double all_b = std::pow(1.0 - transmittance, n);
  return {all_a, all_b, 1.0 - all_a - all_b, 0.0};
}

std::array<double, 4> class_weights(const BranchSet& set) {
  std::array<double, 4> w{0.0, 0.0, 0.0, 0.0};
  for (const auto& b : set.branches) {
    if (b.click_a && !b.click_b)
      w[0] += b.branch_weight;
    else if (!b.click_a && b.click_b)
      w[1] += b.branch_weight;
    else if (b.click_a && b.click_b)
      w[2] += b.branch_weight;
    else
      w[3] += b.branch_weight;
  }
  return w;
}

}  // namespace heraldmc::models
