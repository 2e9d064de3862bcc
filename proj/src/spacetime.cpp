#include "heraldmc/spacetime.hpp"

#include <cmath>
#include <stdexcept>

namespace heraldmc::spacetime {

bool is_finite(const SpacetimeEvent& event) {
  return event.position_m.allFinite() && std::isfinite(event.time_s);
}

double euclidean_distance_m(const SpacetimeEvent& a, const SpacetimeEvent& b) {
  return (a.position_m - b.position_m).norm();
}

void validate(const FiberPath& path, double light_speed_mps) {
  if (!std::isfinite(path.length_m) || path.length_m < 0.0)
    throw std::invalid_argument("fiber length must be finite and >= 0");
  if (!std::isfinite(path.signal_speed_mps) || path.signal_speed_mps <= 0.0 ||
      path.signal_speed_mps > light_speed_mps)
    throw std::invalid_argument("fiber signal speed must be in (0, c]");
}

const char* to_string(SeparationKind kind) {
  return kind == SeparationKind::Spacelike ? "spacelike" : "timelike";
}

double propagation_delay_s(const FiberPath& path) {
  validate(path);
  return path.length_m / path.signal_speed_mps;
}

double arrival_time_s(const SpacetimeEvent& emission, const FiberPath& path) {
  if (!is_finite(emission))
    throw std::invalid_argument("emission event must have finite coordinates");
  return emission.time_s + propagation_delay_s(path);
}

SeparationClass classify_separation(double detector_distance_m,
                                    double fiber_delay_difference_s,
                                    double jitter_s,
                                    double light_speed_mps) {
  auto check = [](double v, const char* name) {
    if (!std::isfinite(v) || v < 0.0)
      throw std::invalid_argument(std::string(name) + " must be finite and >= 0");
  };
  check(detector_distance_m, "detector distance");
  check(fiber_delay_difference_s, "fiber delay difference");
  check(jitter_s, "jitter");
  if (!std::isfinite(light_speed_mps) || light_speed_mps <= 0.0)
    throw std::invalid_argument("light speed must be finite and > 0");

  SeparationClass sc;
  sc.detector_distance_m = detector_distance_m;
  sc.signaling_window_s = fiber_delay_difference_s + jitter_s;
  sc.signaling_threshold_distance_m = light_speed_mps * sc.signaling_window_s;
  sc.kind = detector_distance_m <= sc.signaling_threshold_distance_m
                ? SeparationKind::Timelike
                : SeparationKind::Spacelike;
  return sc;
}

}  // namespace heraldmc::spacetime
