#pragma once

// Lab geometry, fiber propagation, and the spacelike/timelike classification
// of detector pairs. A pair of detectors is timelike separated when a light
// speed signal could cross the distance between them within the signaling
// window (one-way fiber delay difference plus detector jitter).

#include <Eigen/Core>

namespace heraldmc::spacetime {

// Rounded vacuum light speed, m/s. Configurable where it matters so the
// 0.3 m threshold comes out exact.
inline constexpr double kVacuumLightSpeed = 3.0e8;

struct SpacetimeEvent {
  Eigen::Vector3d position_m = Eigen::Vector3d::Zero();
  double time_s = 0.0;
};

bool is_finite(const SpacetimeEvent& event);

double euclidean_distance_m(const SpacetimeEvent& a, const SpacetimeEvent& b);

struct FiberPath {
  double length_m = 0.0;
  double signal_speed_mps = 2.0e8;

  bool operator==(const FiberPath&) const = default;
};

// Throws std::invalid_argument unless 0 <= length and 0 < speed <= light_speed.
void validate(const FiberPath& path, double light_speed_mps = kVacuumLightSpeed);

enum class SeparationKind { Spacelike, Timelike };

const char* to_string(SeparationKind kind);

struct SeparationClass {
  SeparationKind kind = SeparationKind::Spacelike;
  double signaling_window_s = 0.0;
  double signaling_threshold_distance_m = 0.0;
  double detector_distance_m = 0.0;

  bool operator==(const SeparationClass&) const = default;
};

double propagation_delay_s(const FiberPath& path);

double arrival_time_s(const SpacetimeEvent& emission, const FiberPath& path);

// Timelike iff detector_distance <= light_speed * (delay difference + jitter).
// Throws std::invalid_argument on negative or non-finite inputs.
SeparationClass classify_separation(double detector_distance_m,
                                    double fiber_delay_difference_s,
                                    double jitter_s,
                                    double light_speed_mps = kVacuumLightSpeed);

}  // namespace heraldmc::spacetime
