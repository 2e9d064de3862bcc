#pragma once

// The four competing outcome-decision models for a single photon meeting a
// beam-splitter whose output ports are monitored by detectors A (transmitted
// arm) and B (reflected arm):
//
//   NonlocalCollapse  outcome decided at detection, coordinated between the
//                     detectors regardless of their separation: exactly one
//                     of A/B fires per photon.
//   LocalCollapse     outcome decided at detection but only locally: with
//                     timelike separation the detectors can coordinate and
//                     reproduce NonlocalCollapse; with spacelike separation
//                     each detector fires independently with the port
//                     probability, allowing double and zero clicks.
//   EmptyWave         outcome decided at the beam-splitter by a hidden
//                     variable (the particle takes one definite path, an
//                     unobservable wave takes the other). Separation never
//                     matters and counterfactual outcomes are well defined.
//   ManyWorlds        no single outcome: each beam-splitter passage splits
//                     the world, and the full weighted branch set is
//                     returned.
//
// Decisions here are at the ideal-detector layer; efficiency, dark counts and
// timing are applied downstream by the experiment module.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "heraldmc/rng.hpp"
#include "heraldmc/spacetime.hpp"

namespace heraldmc::models {

enum class ModelKind { NonlocalCollapse, LocalCollapse, EmptyWave, ManyWorlds };

const char* to_string(ModelKind kind);
// Accepts the config names: nonlocal_collapse | local_collapse | empty_wave | many_worlds.
// Throws ConfigError on anything else.
ModelKind model_from_string(const std::string& name);

enum class HiddenPath { Transmitted, Reflected };

const char* to_string(HiddenPath path);

struct OutcomeDecision {
  bool click_a = false;
  bool click_b = false;
  double branch_weight = 1.0;  // in (0, 1]; 1 unless ManyWorlds
  // Photon-detection opportunities delivered to each detector; the experiment
  // applies detector efficiency per opportunity.
  std::uint32_t photons_at_a = 0;
  std::uint32_t photons_at_b = 0;
  std::optional<HiddenPath> hidden_path;  // EmptyWave: first photon's path

  bool operator==(const OutcomeDecision&) const = default;
};

struct BranchSet {
  std::vector<OutcomeDecision> branches;

  double total_weight() const;
};

// Throws std::logic_error if weights do not sum to 1 within 1e-12, or if a
// single-photon set does not consist of exactly two single-click branches.
void validate(const BranchSet& set, int n_signal_photons);

struct ModelParams {
  double transmittance = 0.5;        // beam-splitter T; the apparatus uses 50-50
  std::uint32_t branch_cap = 65536;  // ManyWorlds: max branches, exceeding is an error

  bool operator==(const ModelParams&) const = default;
};

void validate(const ModelParams& params);

// Decides the outcome for one pulse carrying n signal photons. Every model
// except ManyWorlds yields exactly one branch of weight 1; ManyWorlds yields
// the full set of 2^n path-assignment branches with weights
// T^(#transmitted) * (1-T)^(#reflected).
//
// Randomness consumption from `routing` is fixed per model: one uniform per
// photon (NonlocalCollapse, LocalCollapse/timelike, EmptyWave), two uniforms
// per photon (LocalCollapse/spacelike: one per detector), none (ManyWorlds).
BranchSet decide(ModelKind model, int n_signal_photons, spacetime::SeparationKind separation,
                 const ModelParams& params, rng::Stream& routing);

// The Fig. 1 question: had the detectors been placed at a different distance
// from the beam-splitter, would the same detector have fired? Only EmptyWave
// defines an answer (the hidden variable fixes the path independently of
// where the detectors sit). All other models throw CounterfactualUndefined.
OutcomeDecision counterfactual_decide(ModelKind model, HiddenPath hidden,
                                      double detector_distance_from_bs_m);

// Analytic outcome-class probabilities {A only, B only, both, neither} for a
// NonlocalCollapse decision over n photons: every photon reaches exactly one
// detector, so "both" requires the n photons to split.
std::array<double, 4> nonlocal_collapse_class_probabilities(int n_signal_photons,
                                                            double transmittance = 0.5);

// Sum of branch weights per outcome class {A only, B only, both, neither}.
std::array<double, 4> class_weights(const BranchSet& set);

}  // namespace heraldmc::models
