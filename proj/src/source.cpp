#include "heraldmc/source.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace heraldmc::source {

void validate(const SourceSpec& spec) {
  if (!std::isfinite(spec.mean_pairs_per_pulse) || spec.mean_pairs_per_pulse < 0.0)
    throw std::invalid_argument("mean_pairs_per_pulse must be finite and >= 0");
  if (!std::isfinite(spec.pulse_rate_hz) || spec.pulse_rate_hz < 0.0)
    throw std::invalid_argument("pulse_rate_hz must be finite and >= 0");
}

const char* to_string(DetectorId id) {
  switch (id) {
    case DetectorId::H: return "H";
    case DetectorId::A: return "A";
    default: return "B";
  }
}

void validate(const DetectorSpec& spec) {
  if (!std::isfinite(spec.efficiency) || spec.efficiency < 0.0 || spec.efficiency > 1.0)
    throw std::invalid_argument("detector efficiency must be in [0, 1]");
  if (!std::isfinite(spec.dark_count_prob) || spec.dark_count_prob < 0.0 ||
      spec.dark_count_prob >= 1.0)
    throw std::invalid_argument("dark_count_prob must be in [0, 1)");
  if (!std::isfinite(spec.jitter_s) || spec.jitter_s < 0.0)
    throw std::invalid_argument("detector jitter must be finite and >= 0");
}

PulseEmission emit_pulse(const SourceSpec& spec, std::uint64_t pulse_index, rng::Stream& stream) {
  validate(spec);
  PulseEmission emission;
  emission.pulse_index = pulse_index;
  if (spec.pair_number == PairNumberMode::Fixed) {
    emission.n_pairs = spec.fixed_pairs;
  } else {
    emission.n_pairs = static_cast<std::uint32_t>(stream.poisson(spec.mean_pairs_per_pulse));
  }
  return emission;
}

ClickResult detect(const DetectorSpec& spec, std::span<const double> photon_arrivals_s,
                   const DarkWindow& dark_window, rng::Stream& stream) {
  validate(spec);
  for (double t : photon_arrivals_s)
    if (!std::isfinite(t)) throw std::invalid_argument("photon arrival times must be finite");

  bool registered = false;
  double earliest = std::numeric_limits<double>::infinity();
  for (double t : photon_arrivals_s) {
    if (stream.bernoulli(spec.efficiency)) {
      registered = true;
      earliest = std::min(earliest, t);
    }
  }
  const double jitter_offset = stream.jitter(spec.jitter_s);
  const bool dark_fired = stream.bernoulli(spec.dark_count_prob);

  ClickResult result;
  if (registered) {
    result.clicked = true;
    result.click_time_s = earliest + jitter_offset;
  }
  if (dark_fired) {
    const double dark_time = dark_window.center_s + stream.jitter(dark_window.width_s);
    result.clicked = true;
    result.click_time_s =
        result.click_time_s ? std::min(*result.click_time_s, dark_time) : dark_time;
  }
  return result;
}

ClickResult detect(const DetectorSpec& spec, std::span<const double> photon_arrivals_s,
                   rng::Stream& stream) {
  return detect(spec, photon_arrivals_s, DarkWindow{}, stream);
}

}  // namespace heraldmc::source
