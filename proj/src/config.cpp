#include "heraldmc/config.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "heraldmc/errors.hpp"

namespace heraldmc::config {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

bool valid_key(std::string_view key) {
  if (key.empty()) return false;
  for (char c : key)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '.') return false;
  return true;
}

Value parse_value(std::string_view text, int line) {
  text = trim(text);
  if (text.empty()) throw ConfigError("line " + std::to_string(line) + ": missing value");
  if (text.front() == '"') {
    if (text.size() < 2 || text.back() != '"')
      throw ConfigError("line " + std::to_string(line) + ": unterminated string");
    return std::string(text.substr(1, text.size() - 2));
  }
  if (text == "true") return true;
  if (text == "false") return false;
  {
    std::int64_t i = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), i);
    if (ec == std::errc() && ptr == text.data() + text.size()) return i;
  }
  {
    double d = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), d);
    if (ec == std::errc() && ptr == text.data() + text.size()) return d;
  }
  throw ConfigError("line " + std::to_string(line) + ": cannot parse value '" +
                    std::string(text) + "'");
}

std::string format_value(const Value& value) {
  if (const auto* i = std::get_if<std::int64_t>(&value)) return std::to_string(*i);
  if (const auto* d = std::get_if<double>(&value)) {
    std::array<char, 64> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), *d);
    return std::string(buf.data(), ptr);
  }
  if (const auto* b = std::get_if<bool>(&value)) return *b ? "true" : "false";
  return '"' + std::get<std::string>(value) + '"';
}

// Canonical section and key ordering for write().
const std::vector<std::pair<std::string, std::vector<std::string>>> kSchema = {
    {"source", {"mean_pairs_per_pulse", "pulse_rate_hz", "pair_number", "fixed_pairs"}},
    {"detectors.H", {"efficiency", "dark_count_prob", "jitter_s"}},
    {"detectors.A", {"efficiency", "dark_count_prob", "jitter_s"}},
    {"detectors.B", {"efficiency", "dark_count_prob", "jitter_s"}},
    {"fibers",
     {"signal_speed_mps", "source_to_bs_m", "source_to_h_m", "bs_to_a_m", "bs_to_b_m"}},
    {"geometry", {"detector_distance_ab_m", "light_speed_mps"}},
    {"run",
     {"model", "pulses", "seed", "coincidence_window_s", "transmittance", "branch_cap",
      "threads", "two_jitter_window", "window_offset_a_s", "window_offset_b_s"}},
};

}  // namespace

Table parse(std::string_view text) {
  Table table;
  std::string section;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t eol = text.find('\n', pos);
    std::string_view line =
        text.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
    pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
    ++line_no;

    // Strip comments; '#' inside a quoted string does not count.
    bool in_string = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      if (line[i] == '"') in_string = !in_string;
      if (line[i] == '#' && !in_string) {
        line = line.substr(0, i);
        break;
      }
    }
    line = trim(line);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("line " + std::to_string(line_no) + ": malformed section header");
      std::string_view name = trim(line.substr(1, line.size() - 2));
      if (!valid_key(name))
        throw ConfigError("line " + std::to_string(line_no) + ": invalid section name");
      section = std::string(name);
      continue;
    }

    const std::size_t eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
    std::string_view key = trim(line.substr(0, eq));
    if (!valid_key(key) || key.find('.') != std::string_view::npos)
      throw ConfigError("line " + std::to_string(line_no) + ": invalid key '" +
                        std::string(key) + "'");
    std::string full = section.empty() ? std::string(key) : section + '.' + std::string(key);
    if (table.entries.count(full))
      throw ConfigError("line " + std::to_string(line_no) + ": duplicate key '" + full + "'");
    table.entries.emplace(std::move(full), parse_value(line.substr(eq + 1), line_no));
  }
  return table;
}

Table parse_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse(buffer.str());
}

std::string write(const Table& table) {
  std::set<std::string> written;
  std::ostringstream out;
  bool first = true;
  for (const auto& [section, keys] : kSchema) {
    std::ostringstream body;
    for (const auto& key : keys) {
      const std::string full = section + '.' + key;
      auto it = table.entries.find(full);
      if (it == table.entries.end()) continue;
      body << key << " = " << format_value(it->second) << '\n';
      written.insert(full);
    }
    if (body.str().empty()) continue;
    if (!first) out << '\n';
    first = false;
    out << '[' << section << "]\n" << body.str();
  }
  // Keys outside the schema keep their map order at the end.
  std::string last_section;
  for (const auto& [full, value] : table.entries) {
    if (written.count(full)) continue;
    const std::size_t dot = full.rfind('.');
    const std::string section = dot == std::string::npos ? "" : full.substr(0, dot);
    const std::string key = dot == std::string::npos ? full : full.substr(dot + 1);
    if (section != last_section) {
      if (!first) out << '\n';
      if (!section.empty()) out << '[' << section << "]\n";
      last_section = section;
    }
    first = false;
    out << key << " = " << format_value(value) << '\n';
  }
  return out.str();
}

void apply_override(Table& table, const std::string& assignment) {
  const std::size_t eq = assignment.find('=');
  if (eq == std::string::npos)
    throw ConfigError("override must be key=value, got '" + assignment + "'");
  const std::string key(trim(std::string_view(assignment).substr(0, eq)));
  if (!valid_key(key)) throw ConfigError("override has invalid key '" + key + "'");
  const std::string_view rhs = std::string_view(assignment).substr(eq + 1);
  try {
    table.entries[key] = parse_value(rhs, 0);
  } catch (const ConfigError&) {
    // Overrides may spell strings without quotes: --set run.model=empty_wave
    const std::string_view word = trim(rhs);
    if (!valid_key(word)) throw;
    table.entries[key] = std::string(word);
  }
}

namespace {

class Reader {
 public:
  explicit Reader(const Table& table) : table_(table) {}

  double number(const std::string& key, double fallback) {
    const Value* v = find(key);
    if (!v) return fallback;
    if (const auto* d = std::get_if<double>(v)) return *d;
    if (const auto* i = std::get_if<std::int64_t>(v)) return static_cast<double>(*i);
    throw ConfigError("config key '" + key + "' must be a number");
  }

  std::int64_t integer(const std::string& key, std::int64_t fallback) {
    const Value* v = find(key);
    if (!v) return fallback;
    if (const auto* i = std::get_if<std::int64_t>(v)) return *i;
    throw ConfigError("config key '" + key + "' must be an integer");
  }

  bool boolean(const std::string& key, bool fallback) {
    const Value* v = find(key);
    if (!v) return fallback;
    if (const auto* b = std::get_if<bool>(v)) return *b;
    throw ConfigError("config key '" + key + "' must be true or false");
  }

  std::string str(const std::string& key, const std::string& fallback) {
    const Value* v = find(key);
    if (!v) return fallback;
    if (const auto* s = std::get_if<std::string>(v)) return *s;
    throw ConfigError("config key '" + key + "' must be a string");
  }

  std::optional<double> opt_number(const std::string& key) {
    const Value* v = find(key);
    if (!v) return std::nullopt;
    if (const auto* d = std::get_if<double>(v)) return *d;
    if (const auto* i = std::get_if<std::int64_t>(v)) return static_cast<double>(*i);
    throw ConfigError("config key '" + key + "' must be a number");
  }

  void reject_unknown() const {
    for (const auto& [key, value] : table_.entries)
      if (!used_.count(key)) throw ConfigError("unknown config key '" + key + "'");
  }

 private:
  const Value* find(const std::string& key) {
    used_.insert(key);
    auto it = table_.entries.find(key);
    return it == table_.entries.end() ? nullptr : &it->second;
  }

  const Table& table_;
  std::set<std::string> used_;
};

std::uint64_t to_u64(std::int64_t v, const std::string& key) {
  if (v < 0) throw ConfigError("config key '" + key + "' must be >= 0");
  return static_cast<std::uint64_t>(v);
}

}  // namespace

experiment::ExperimentConfig to_experiment(const Table& table) {
  Reader r(table);
  experiment::ExperimentConfig cfg;

  cfg.source.mean_pairs_per_pulse =
      r.number("source.mean_pairs_per_pulse", cfg.source.mean_pairs_per_pulse);
  cfg.source.pulse_rate_hz = r.number("source.pulse_rate_hz", cfg.source.pulse_rate_hz);
  const std::string mode = r.str("source.pair_number", "poisson");
  if (mode == "poisson")
    cfg.source.pair_number = source::PairNumberMode::Poisson;
  else if (mode == "fixed")
    cfg.source.pair_number = source::PairNumberMode::Fixed;
  else
    throw ConfigError("source.pair_number must be \"poisson\" or \"fixed\"");
  cfg.source.fixed_pairs = static_cast<std::uint32_t>(
      to_u64(r.integer("source.fixed_pairs", cfg.source.fixed_pairs), "source.fixed_pairs"));

  auto read_detector = [&](const std::string& section, source::DetectorSpec& det) {
    det.efficiency = r.number(section + ".efficiency", det.efficiency);
    det.dark_count_prob = r.number(section + ".dark_count_prob", det.dark_count_prob);
    det.jitter_s = r.number(section + ".jitter_s", det.jitter_s);
  };
  read_detector("detectors.H", cfg.detector_h);
  read_detector("detectors.A", cfg.detector_a);
  read_detector("detectors.B", cfg.detector_b);

  const double speed = r.number("fibers.signal_speed_mps", cfg.fiber_bs_to_a.signal_speed_mps);
  for (auto* fiber : {&cfg.fiber_source_to_bs, &cfg.fiber_source_to_h, &cfg.fiber_bs_to_a,
                      &cfg.fiber_bs_to_b})
    fiber->signal_speed_mps = speed;
  cfg.fiber_source_to_bs.length_m =
      r.number("fibers.source_to_bs_m", cfg.fiber_source_to_bs.length_m);
  cfg.fiber_source_to_h.length_m =
      r.number("fibers.source_to_h_m", cfg.fiber_source_to_h.length_m);
  cfg.fiber_bs_to_a.length_m = r.number("fibers.bs_to_a_m", cfg.fiber_bs_to_a.length_m);
  cfg.fiber_bs_to_b.length_m = r.number("fibers.bs_to_b_m", cfg.fiber_bs_to_b.length_m);

  cfg.detector_distance_ab_m =
      r.number("geometry.detector_distance_ab_m", cfg.detector_distance_ab_m);
  cfg.light_speed_mps = r.number("geometry.light_speed_mps", cfg.light_speed_mps);

  cfg.model = models::model_from_string(r.str("run.model", models::to_string(cfg.model)));
  cfg.n_pulses = to_u64(r.integer("run.pulses", static_cast<std::int64_t>(cfg.n_pulses)),
                        "run.pulses");
  cfg.master_seed = to_u64(r.integer("run.seed", static_cast<std::int64_t>(cfg.master_seed)),
                           "run.seed");
  cfg.coincidence_window_s = r.number("run.coincidence_window_s", cfg.coincidence_window_s);
  cfg.model_params.transmittance =
      r.number("run.transmittance", cfg.model_params.transmittance);
  cfg.model_params.branch_cap = static_cast<std::uint32_t>(to_u64(
      r.integer("run.branch_cap", cfg.model_params.branch_cap), "run.branch_cap"));
  cfg.threads = static_cast<unsigned>(
      to_u64(r.integer("run.threads", cfg.threads), "run.threads"));
  cfg.two_jitter_window = r.boolean("run.two_jitter_window", cfg.two_jitter_window);
  cfg.window_offset_a_s = r.opt_number("run.window_offset_a_s");
  cfg.window_offset_b_s = r.opt_number("run.window_offset_b_s");

  r.reject_unknown();
  cfg.validate();
  return cfg;
}

Table from_experiment(const experiment::ExperimentConfig& cfg) {
  Table t;
  auto put = [&t](const std::string& key, Value value) { t.entries[key] = std::move(value); };

  put("source.mean_pairs_per_pulse", cfg.source.mean_pairs_per_pulse);
  put("source.pulse_rate_hz", cfg.source.pulse_rate_hz);
  put("source.pair_number",
      std::string(cfg.source.pair_number == source::PairNumberMode::Fixed ? "fixed" : "poisson"));
  put("source.fixed_pairs", static_cast<std::int64_t>(cfg.source.fixed_pairs));

  auto put_detector = [&](const std::string& section, const source::DetectorSpec& det) {
    put(section + ".efficiency", det.efficiency);
    put(section + ".dark_count_prob", det.dark_count_prob);
    put(section + ".jitter_s", det.jitter_s);
  };
  put_detector("detectors.H", cfg.detector_h);
  put_detector("detectors.A", cfg.detector_a);
  put_detector("detectors.B", cfg.detector_b);

  put("fibers.signal_speed_mps", cfg.fiber_bs_to_a.signal_speed_mps);
  put("fibers.source_to_bs_m", cfg.fiber_source_to_bs.length_m);
  put("fibers.source_to_h_m", cfg.fiber_source_to_h.length_m);
  put("fibers.bs_to_a_m", cfg.fiber_bs_to_a.length_m);
  put("fibers.bs_to_b_m", cfg.fiber_bs_to_b.length_m);

  put("geometry.detector_distance_ab_m", cfg.detector_distance_ab_m);
  put("geometry.light_speed_mps", cfg.light_speed_mps);

  put("run.model", std::string(models::to_string(cfg.model)));
  put("run.pulses", static_cast<std::int64_t>(cfg.n_pulses));
  put("run.seed", static_cast<std::int64_t>(cfg.master_seed));
  put("run.coincidence_window_s", cfg.coincidence_window_s);
  put("run.transmittance", cfg.model_params.transmittance);
  put("run.branch_cap", static_cast<std::int64_t>(cfg.model_params.branch_cap));
  put("run.threads", static_cast<std::int64_t>(cfg.threads));
  put("run.two_jitter_window", cfg.two_jitter_window);
  if (cfg.window_offset_a_s) put("run.window_offset_a_s", *cfg.window_offset_a_s);
  if (cfg.window_offset_b_s) put("run.window_offset_b_s", *cfg.window_offset_b_s);
  return t;
}

experiment::ExperimentConfig preset_spacelike() {
  experiment::ExperimentConfig cfg;
  cfg.source.mean_pairs_per_pulse = 0.01;
  return cfg;
}

experiment::ExperimentConfig preset_timelike() {
  return experiment::swap_delay_line(preset_spacelike());
}

}  // namespace heraldmc::config
