#include "heraldmc/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <stdexcept>
#include <thread>

#include "heraldmc/errors.hpp"

namespace heraldmc::experiment {

double ExperimentConfig::herald_arrival_s() const {
  return spacetime::propagation_delay_s(fiber_source_to_h);
}

double ExperimentConfig::signal_arrival_a_s() const {
  return spacetime::propagation_delay_s(fiber_source_to_bs) +
         spacetime::propagation_delay_s(fiber_bs_to_a);
}

double ExperimentConfig::signal_arrival_b_s() const {
  return spacetime::propagation_delay_s(fiber_source_to_bs) +
         spacetime::propagation_delay_s(fiber_bs_to_b);
}

double ExperimentConfig::offset_a_s() const {
  return window_offset_a_s ? *window_offset_a_s : signal_arrival_a_s() - herald_arrival_s();
}

double ExperimentConfig::offset_b_s() const {
  return window_offset_b_s ? *window_offset_b_s : signal_arrival_b_s() - herald_arrival_s();
}

spacetime::SeparationClass ExperimentConfig::separation() const {
  const spacetime::SpacetimeEvent at_a{detector_position_a(), 0.0};
  const spacetime::SpacetimeEvent at_b{detector_position_b(), 0.0};
  const double distance = spacetime::euclidean_distance_m(at_a, at_b);
  const double delay_difference = std::abs(spacetime::propagation_delay_s(fiber_bs_to_a) -
                                           spacetime::propagation_delay_s(fiber_bs_to_b));
  const double jitter = two_jitter_window ? detector_a.jitter_s + detector_b.jitter_s
                                          : std::max(detector_a.jitter_s, detector_b.jitter_s);
  return spacetime::classify_separation(distance, delay_difference, jitter, light_speed_mps);
}

void ExperimentConfig::validate() const {
  try {
    source::validate(source);
    source::validate(detector_h);
    source::validate(detector_a);
    source::validate(detector_b);
    spacetime::validate(fiber_source_to_bs, light_speed_mps);
    spacetime::validate(fiber_source_to_h, light_speed_mps);
    spacetime::validate(fiber_bs_to_a, light_speed_mps);
    spacetime::validate(fiber_bs_to_b, light_speed_mps);
    models::validate(model_params);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (detector_h.id != source::DetectorId::H || detector_a.id != source::DetectorId::A ||
      detector_b.id != source::DetectorId::B)
    throw ConfigError("detector specs are not wired to the H/A/B slots they describe");
  if (!std::isfinite(detector_distance_ab_m) || detector_distance_ab_m < 0.0)
    throw ConfigError("detector_distance_ab_m must be finite and >= 0");
  if (!std::isfinite(light_speed_mps) || light_speed_mps <= 0.0)
    throw ConfigError("light_speed_mps must be finite and > 0");
  if (!std::isfinite(coincidence_window_s) || coincidence_window_s <= 0.0)
    throw ConfigError("coincidence_window_s must be > 0");
  if (n_pulses < 1) throw ConfigError("n_pulses must be >= 1");
  if (n_pulses > (std::uint64_t{1} << 53))
    throw ConfigError("n_pulses exceeds exactly countable range");

  // A manual window offset so far from the fiber-derived one that no click
  // could ever land in the window is a wiring mistake, not a measurement.
  const double tolerance_a =
      coincidence_window_s / 2.0 + (detector_a.jitter_s + detector_h.jitter_s) / 2.0;
  const double tolerance_b =
      coincidence_window_s / 2.0 + (detector_b.jitter_s + detector_h.jitter_s) / 2.0;
  const double auto_a = signal_arrival_a_s() - herald_arrival_s();
  const double auto_b = signal_arrival_b_s() - herald_arrival_s();
  if (std::abs(auto_a - offset_a_s()) > tolerance_a)
    throw ConfigError("window offset for detector A can never accept a coincidence "
                      "(fiber delay exceeds the coincidence window)");
  if (std::abs(auto_b - offset_b_s()) > tolerance_b)
    throw ConfigError("window offset for detector B can never accept a coincidence "
                      "(fiber delay exceeds the coincidence window)");
}

void CoincidenceCounts::merge(const CoincidenceCounts& other) {
  r_h += other.r_h;
  r_ha += other.r_ha;
  r_hb += other.r_hb;
  r_hab += other.r_hab;
  r_h00 += other.r_h00;
}

void validate(const CoincidenceCounts& c) {
  if (c.r_h < 0 || c.r_ha < 0 || c.r_hb < 0 || c.r_hab < 0 || c.r_h00 < 0)
    throw std::logic_error("coincidence counts must be >= 0");
  if (c.r_hab > std::min(c.r_ha, c.r_hb) + 1e-9)
    throw std::logic_error("triple coincidences exceed a pair rate");
  if (std::abs(c.r_ha + c.r_hb - c.r_hab + c.r_h00 - c.r_h) > 1e-9 * std::max(1.0, c.r_h))
    throw std::logic_error("coincidence counts violate inclusion-exclusion");
}

bool within_window(double herald_time_s, double click_time_s, double window_s,
                   double known_offset_s) {
  return std::abs(click_time_s - herald_time_s - known_offset_s) <= window_s / 2.0;
}

namespace {

struct Context {
  double t_h, t_a, t_b;
  double off_a, off_b;
  double window;
  double eff_h, eff_a, eff_b;
  double dark_h, dark_a, dark_b;
  double jit_h, jit_a, jit_b;
  bool fixed_pairs;
  std::uint32_t fixed_n;
  double exp_neg_mu;
  models::ModelKind model;
  models::ModelParams params;
  spacetime::SeparationKind kind;
  std::uint64_t seed;
};

Context make_context(const ExperimentConfig& cfg) {
  Context ctx;
  ctx.t_h = cfg.herald_arrival_s();
  ctx.t_a = cfg.signal_arrival_a_s();
  ctx.t_b = cfg.signal_arrival_b_s();
  ctx.off_a = cfg.offset_a_s();
  ctx.off_b = cfg.offset_b_s();
  ctx.window = cfg.coincidence_window_s;
  ctx.eff_h = cfg.detector_h.efficiency;
  ctx.eff_a = cfg.detector_a.efficiency;
  ctx.eff_b = cfg.detector_b.efficiency;
  ctx.dark_h = cfg.detector_h.dark_count_prob;
  ctx.dark_a = cfg.detector_a.dark_count_prob;
  ctx.dark_b = cfg.detector_b.dark_count_prob;
  ctx.jit_h = cfg.detector_h.jitter_s;
  ctx.jit_a = cfg.detector_a.jitter_s;
  ctx.jit_b = cfg.detector_b.jitter_s;
  ctx.fixed_pairs = cfg.source.pair_number == source::PairNumberMode::Fixed;
  ctx.fixed_n = cfg.source.fixed_pairs;
  ctx.exp_neg_mu = std::exp(-cfg.source.mean_pairs_per_pulse);
  ctx.model = cfg.model;
  ctx.params = cfg.model_params;
  ctx.kind = cfg.separation().kind;
  ctx.seed = cfg.master_seed;
  return ctx;
}

struct Scratch {
  // prefix_any[k]: did any of the first k per-photon efficiency draws pass.
  std::vector<std::uint8_t> prefix_any_a;
  std::vector<std::uint8_t> prefix_any_b;
};

struct DetectorDraws {
  double jitter_offset = 0.0;
  bool dark_fired = false;
  double dark_time = 0.0;
};

// Per-photon efficiency thresholds for one detector, as a prefix-OR table.
// Opportunities are matched to draw indices 0..k-1; since the draws are iid
// and independent of the routing, this is distributionally identical to
// thresholding the routed subset itself, and it keeps the draw count (and
// hence the stream alignment) the same for every model.
DetectorDraws draw_detector(double efficiency, double jitter_s, double dark_prob,
                            double dark_center, double window, std::uint32_t n,
                            std::vector<std::uint8_t>& prefix_any, rng::Stream& stream) {
  prefix_any.resize(n + 1);
  prefix_any[0] = 0;
  for (std::uint32_t i = 0; i < n; ++i)
    prefix_any[i + 1] = prefix_any[i] | static_cast<std::uint8_t>(stream.bernoulli(efficiency));
  DetectorDraws d;
  d.jitter_offset = stream.jitter(jitter_s);
  d.dark_fired = stream.bernoulli(dark_prob);
  if (d.dark_fired) d.dark_time = dark_center + stream.jitter(window);
  return d;
}

struct WindowedClick {
  bool in_window = false;
};

WindowedClick resolve_click(const DetectorDraws& draws, bool photon_registered,
                            double nominal_arrival, double herald_time, double window,
                            double offset) {
  if (!photon_registered && !draws.dark_fired) return {};
  double click_time;
  if (photon_registered && draws.dark_fired)
    click_time = std::min(nominal_arrival + draws.jitter_offset, draws.dark_time);
  else if (photon_registered)
    click_time = nominal_arrival + draws.jitter_offset;
  else
    click_time = draws.dark_time;
  return {within_window(herald_time, click_time, window, offset)};
}

void simulate_pulse(const Context& ctx, std::uint64_t pulse, CoincidenceCounts& counts,
                    std::vector<TrialRecord>* records, Scratch& scratch) {
  rng::Stream pair_stream(ctx.seed, pulse, rng::StreamTag::PairCount);
  const std::uint32_t n_pairs =
      ctx.fixed_pairs ? ctx.fixed_n
                      : static_cast<std::uint32_t>(pair_stream.poisson_knuth(ctx.exp_neg_mu));
  if (n_pairs == 0 && ctx.dark_h == 0.0) return;  // no herald possible

  // Herald response: n idler photons all arriving at t_h.
  rng::Stream herald_stream(ctx.seed, pulse, rng::StreamTag::HeraldDetect);
  bool herald_registered = false;
  for (std::uint32_t i = 0; i < n_pairs; ++i)
    herald_registered |= herald_stream.bernoulli(ctx.eff_h);
  const double herald_jitter = herald_stream.jitter(ctx.jit_h);
  const bool herald_dark = herald_stream.bernoulli(ctx.dark_h);
  if (!herald_registered && !herald_dark) return;

  double herald_time = herald_registered ? ctx.t_h + herald_jitter : 0.0;
  if (herald_dark) {
    const double dark_time = ctx.t_h + herald_stream.jitter(ctx.window);
    herald_time = herald_registered ? std::min(herald_time, dark_time) : dark_time;
  }

  rng::Stream routing(ctx.seed, pulse, rng::StreamTag::Routing);
  const models::BranchSet branches =
      models::decide(ctx.model, static_cast<int>(n_pairs), ctx.kind, ctx.params, routing);

  rng::Stream stream_a(ctx.seed, pulse, rng::StreamTag::DetectA);
  const DetectorDraws draws_a =
      draw_detector(ctx.eff_a, ctx.jit_a, ctx.dark_a, ctx.t_h + ctx.off_a, ctx.window, n_pairs,
                    scratch.prefix_any_a, stream_a);
  rng::Stream stream_b(ctx.seed, pulse, rng::StreamTag::DetectB);
  const DetectorDraws draws_b =
      draw_detector(ctx.eff_b, ctx.jit_b, ctx.dark_b, ctx.t_h + ctx.off_b, ctx.window, n_pairs,
                    scratch.prefix_any_b, stream_b);

  counts.r_h += 1.0;
  for (const auto& branch : branches.branches) {
    const bool photon_a = scratch.prefix_any_a[branch.photons_at_a] != 0;
    const bool photon_b = scratch.prefix_any_b[branch.photons_at_b] != 0;
    const bool a_in = resolve_click(draws_a, photon_a, ctx.t_a, herald_time, ctx.window,
                                    ctx.off_a).in_window;
    const bool b_in = resolve_click(draws_b, photon_b, ctx.t_b, herald_time, ctx.window,
                                    ctx.off_b).in_window;
    const double w = branch.branch_weight;
    if (a_in) counts.r_ha += w;
    if (b_in) counts.r_hb += w;
    if (a_in && b_in) counts.r_hab += w;
    if (!a_in && !b_in) counts.r_h00 += w;
    if (records) {
      TrialRecord rec;
      rec.pulse_index = pulse;
      rec.n_pairs = n_pairs;
      rec.herald_clicked = true;
      rec.click_a = a_in;
      rec.click_b = b_in;
      rec.branch_weight = w;
      rec.hidden_path = branch.hidden_path;
      records->push_back(rec);
    }
  }
}

void process_chunk(const Context& ctx, std::uint64_t begin, std::uint64_t end,
                   CoincidenceCounts& counts, std::vector<TrialRecord>* records,
                   Scratch& scratch) {
  for (std::uint64_t pulse = begin; pulse < end; ++pulse)
    simulate_pulse(ctx, pulse, counts, records, scratch);
}

constexpr std::uint64_t kChunkPulses = 1 << 16;

}  // namespace

CoincidenceCounts run(const ExperimentConfig& config, TrialSink* sink) {
  config.validate();
  const Context ctx = make_context(config);
  const std::uint64_t n_chunks = (config.n_pulses + kChunkPulses - 1) / kChunkPulses;

  unsigned threads = config.threads;
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(
      std::min<std::uint64_t>(threads, n_chunks));

  std::vector<CoincidenceCounts> partial(n_chunks);
  std::vector<std::vector<TrialRecord>> logs(sink ? n_chunks : 0);

  auto chunk_range = [&](std::uint64_t c) {
    const std::uint64_t begin = c * kChunkPulses;
    return std::pair{begin, std::min(begin + kChunkPulses, config.n_pulses)};
  };

  if (threads <= 1) {
    Scratch scratch;
    for (std::uint64_t c = 0; c < n_chunks; ++c) {
      auto [begin, end] = chunk_range(c);
      process_chunk(ctx, begin, end, partial[c], sink ? &logs[c] : nullptr, scratch);
    }
  } else {
    std::atomic<std::uint64_t> next_chunk{0};
    std::vector<std::exception_ptr> errors(threads);
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) {
      pool.emplace_back([&, t] {
        Scratch scratch;
        try {
          for (std::uint64_t c = next_chunk.fetch_add(1); c < n_chunks;
               c = next_chunk.fetch_add(1)) {
            auto [begin, end] = chunk_range(c);
            process_chunk(ctx, begin, end, partial[c], sink ? &logs[c] : nullptr, scratch);
          }
        } catch (...) {
          errors[t] = std::current_exception();
        }
      });
    }
    for (auto& worker : pool) worker.join();
    for (const auto& err : errors)
      if (err) std::rethrow_exception(err);
  }

  CoincidenceCounts total;
  for (const auto& part : partial) total.merge(part);
  if (sink)
    for (const auto& log : logs)
      for (const auto& rec : log) sink->on_trial(rec);
  return total;
}

namespace {

class VectorSink : public TrialSink {
 public:
  void on_trial(const TrialRecord& record) override { records.push_back(record); }
  std::vector<TrialRecord> records;
};

}  // namespace

std::pair<CoincidenceCounts, std::vector<TrialRecord>> run_with_log(
    const ExperimentConfig& config) {
  VectorSink sink;
  CoincidenceCounts counts = run(config, &sink);
  return {counts, std::move(sink.records)};
}

ExperimentConfig swap_delay_line(const ExperimentConfig& config) {
  const double len_a = config.fiber_bs_to_a.length_m;
  const double len_b = config.fiber_bs_to_b.length_m;
  if (len_b == len_a + kDelayLineExtraLengthM)
    throw ConfigError("config is already in the timelike form (BS->B fiber carries the delay)");
  if (len_a != len_b)
    throw ConfigError("config is not in the reference spacelike form "
                      "(BS->A and BS->B fibers must be equal)");
  ExperimentConfig timelike = config;
  timelike.fiber_bs_to_b.length_m += kDelayLineExtraLengthM;
  return timelike;
}

}  // namespace heraldmc::experiment
