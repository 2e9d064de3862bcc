#pragma once

// Wires source, beam-splitter model, fibers and detectors into the reference
// apparatus topology and runs pulse batches:
//
//   source --fiber--> BS --fiber--> detector A   (Alice, transmitted arm)
//                        \--fiber--> detector B  (Bob, reflected arm)
//   source --fiber--> detector H                 (herald)
//
// Counting is heralded: a pulse enters the statistics only when H clicks, and
// A/B clicks are accepted only inside the coincidence window around the
// herald click (after compensating the known fiber delay difference).
//
// Reproducibility contract: the result is a pure function of the config.
// Every pulse draws from private substreams keyed by (master_seed,
// pulse_index, tag), and parallel execution accumulates per fixed-size chunk
// and merges in chunk order, so counts are identical for any thread count.

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "heraldmc/models.hpp"
#include "heraldmc/source.hpp"
#include "heraldmc/spacetime.hpp"

namespace heraldmc::experiment {

struct ExperimentConfig {
  source::SourceSpec source;
  source::DetectorSpec detector_h{source::DetectorId::H, 1.0, 0.0, 1.0e-9};
  source::DetectorSpec detector_a{source::DetectorId::A, 1.0, 0.0, 1.0e-9};
  source::DetectorSpec detector_b{source::DetectorId::B, 1.0, 0.0, 1.0e-9};

  spacetime::FiberPath fiber_source_to_bs{1.0, 2.0e8};
  spacetime::FiberPath fiber_source_to_h{1.0, 2.0e8};
  spacetime::FiberPath fiber_bs_to_a{10.0, 2.0e8};
  spacetime::FiberPath fiber_bs_to_b{10.0, 2.0e8};

  double detector_distance_ab_m = 10.0;
  double light_speed_mps = spacetime::kVacuumLightSpeed;
  double coincidence_window_s = 2.0e-9;

  models::ModelKind model = models::ModelKind::NonlocalCollapse;
  models::ModelParams model_params;

  std::uint64_t n_pulses = 1'000'000;
  std::uint64_t master_seed = 42;

  unsigned threads = 0;  // 0 = hardware concurrency, 1 = serial

  // The signaling window adds one jitter time by default; this switches to
  // the stricter variant adding one jitter per detector.
  bool two_jitter_window = false;

  // Coincidence electronics delay compensation per detector. When unset the
  // offsets are derived from the configured fibers (signal arm minus herald
  // arm), which is always consistent; setting them manually can misconfigure
  // the windowing, which run() rejects.
  std::optional<double> window_offset_a_s;
  std::optional<double> window_offset_b_s;

  bool operator==(const ExperimentConfig&) const = default;

  // Detector positions on the lab line; A sits at the origin.
  Eigen::Vector3d detector_position_a() const { return Eigen::Vector3d::Zero(); }
  Eigen::Vector3d detector_position_b() const {
    return Eigen::Vector3d(detector_distance_ab_m, 0.0, 0.0);
  }

  double herald_arrival_s() const;    // source emission at t = 0 per pulse
  double signal_arrival_a_s() const;
  double signal_arrival_b_s() const;
  double offset_a_s() const;          // effective window offsets
  double offset_b_s() const;

  // Recomputed from the current fields on every call; never stored.
  spacetime::SeparationClass separation() const;

  // Throws ConfigError on any invariant violation, including windowing that
  // can never accept a coincidence.
  void validate() const;
};

// Weighted coincidence tallies. Values are integers for every model except
// ManyWorlds, where each branch contributes its weight; with the default
// 50-50 splitter those weights are dyadic rationals, so the sums below stay
// exact in double precision.
struct CoincidenceCounts {
  double r_h = 0.0;    // herald clicks
  double r_ha = 0.0;   // herald AND A in window
  double r_hb = 0.0;   // herald AND B in window
  double r_hab = 0.0;  // triple coincidences
  double r_h00 = 0.0;  // herald with neither A nor B in window

  void merge(const CoincidenceCounts& other);

  bool operator==(const CoincidenceCounts&) const = default;
};

// Throws std::logic_error if counts violate inclusion-exclusion or ordering
// invariants (r_ha + r_hb - r_hab + r_h00 == r_h, r_hab <= min(r_ha, r_hb)).
void validate(const CoincidenceCounts& counts);

struct TrialRecord {
  std::uint64_t pulse_index = 0;
  std::uint32_t n_pairs = 0;
  bool herald_clicked = false;
  bool click_a = false;  // counted-in-window click
  bool click_b = false;
  double branch_weight = 1.0;
  std::optional<models::HiddenPath> hidden_path;

  bool operator==(const TrialRecord&) const = default;
};

// Receives one record per heralded pulse (one per branch under ManyWorlds),
// in pulse order regardless of the execution schedule.
class TrialSink {
 public:
  virtual ~TrialSink() = default;
  virtual void on_trial(const TrialRecord& record) = 0;
};

// |click - herald - known_offset| <= window / 2
bool within_window(double herald_time_s, double click_time_s, double window_s,
                   double known_offset_s);

CoincidenceCounts run(const ExperimentConfig& config, TrialSink* sink = nullptr);

std::pair<CoincidenceCounts, std::vector<TrialRecord>> run_with_log(
    const ExperimentConfig& config);

// Switches the reference spacelike configuration (equal BS->A and BS->B
// fibers) to the timelike one by adding 20 m of fiber on Bob's arm. Detector
// positions are untouched. Throws ConfigError if the input is already in
// timelike form or not in a recognized reference form.
ExperimentConfig swap_delay_line(const ExperimentConfig& config);

inline constexpr double kDelayLineExtraLengthM = 20.0;

}  // namespace heraldmc::experiment
