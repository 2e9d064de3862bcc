#pragma once

// Photon-pair source and detector response. The source emits pairs of
// photons per pulse (a 1550 nm signal routed to the beam-splitter and an
// 810 nm idler routed to the herald detector H); the pair number is
// Poissonian at low gain, which is what produces accidental triple
// coincidences from double pairs.

#include <cstdint>
#include <optional>
#include <span>

#include "heraldmc/rng.hpp"

namespace heraldmc::source {

enum class PairNumberMode {
  Poisson,  // n ~ Poisson(mean_pairs_per_pulse)
  Fixed,    // n = fixed_pairs every pulse (exact single-pair regime)
};

struct SourceSpec {
  double mean_pairs_per_pulse = 0.0;
  double pulse_rate_hz = 1.0e6;  // bookkeeping only
  PairNumberMode pair_number = PairNumberMode::Poisson;
  std::uint32_t fixed_pairs = 1;

  bool operator==(const SourceSpec&) const = default;
};

void validate(const SourceSpec& spec);

enum class DetectorId { H, A, B };

const char* to_string(DetectorId id);

struct DetectorSpec {
  DetectorId id = DetectorId::H;
  double efficiency = 1.0;        // in [0, 1]
  double dark_count_prob = 0.0;   // per coincidence window, in [0, 1)
  double jitter_s = 0.0;

  bool operator==(const DetectorSpec&) const = default;
};

void validate(const DetectorSpec& spec);

struct PulseEmission {
  std::uint64_t pulse_index = 0;  // keys the per-photon routing substreams
  std::uint32_t n_pairs = 0;
};

// Draws the pair number for one pulse. Deterministic given the stream, which
// the caller derives from (master_seed, pulse_index, StreamTag::PairCount).
PulseEmission emit_pulse(const SourceSpec& spec, std::uint64_t pulse_index, rng::Stream& stream);

struct ClickResult {
  bool clicked = false;
  std::optional<double> click_time_s;
};

// Interval in which a dark count may fall (uniform over center +- width/2).
struct DarkWindow {
  double center_s = 0.0;
  double width_s = 0.0;
};

// Detector response. Draw order is fixed and part of the reproducibility
// contract: one threshold uniform per arrival, then one jitter uniform, then
// one dark-count uniform, then (only if the dark count fired) one dark-time
// uniform. Each arrival registers independently with probability
// `efficiency`; the detector is not photon-number-resolving, so any number of
// registrations in a window produce a single click at the earliest
// registration time smeared by the jitter.
ClickResult detect(const DetectorSpec& spec, std::span<const double> photon_arrivals_s,
                   const DarkWindow& dark_window, rng::Stream& stream);

ClickResult detect(const DetectorSpec& spec, std::span<const double> photon_arrivals_s,
                   rng::Stream& stream);

}  // namespace heraldmc::source
