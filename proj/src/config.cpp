#include "risloc/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>

#include "risloc/error.hpp"
#include "risloc/random.hpp"

namespace risloc {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

[[noreturn]] void fail(const std::string& where, int line, const std::string& msg) {
  throw Error(ErrorKind::Config, where + ":" + std::to_string(line) + ": " + msg);
}

struct Ctx {
  const std::string& source;
  int line;
  const std::string& key;
  [[noreturn]] void error(const std::string& msg) const { fail(source, line, key + ": " + msg); }
};

double parse_double(const std::string& text, const Ctx& ctx) {
  double v = 0.0;
  const char* first = text.data();
  const char* last = first + text.size();
  if (!text.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || !std::isfinite(v)) ctx.error("expected a number, got '" + text + "'");
  return v;
}

long long parse_integer(const std::string& text, const Ctx& ctx) {
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) ctx.error("expected an integer, got '" + text + "'");
  return v;
}

bool parse_bool(const std::string& text, const Ctx& ctx) {
  if (text == "true" || text == "yes" || text == "on" || text == "1") return true;
  if (text == "false" || text == "no" || text == "off" || text == "0") return false;
  ctx.error("expected true/false, got '" + text + "'");
}

std::vector<std::string> components(const std::string& text) {
  std::string t = text;
  std::replace(t.begin(), t.end(), ',', ' ');
  std::istringstream is(t);
  std::vector<std::string> out;
  for (std::string tok; is >> tok;) out.push_back(tok);
  return out;
}

Vec3 parse_vec3(const std::string& text, const Ctx& ctx) {
  const auto parts = components(text);
  if (parts.size() != 3) ctx.error("expected 3 components, got '" + text + "'");
  return {parse_double(parts[0], ctx), parse_double(parts[1], ctx), parse_double(parts[2], ctx)};
}

std::vector<Vec3> parse_vec3_list(const std::string& text, const Ctx& ctx) {
  std::vector<Vec3> out;
  if (trim(text).empty()) return out;
  for (const std::string& item : split(text, ';')) {
    if (!item.empty()) out.push_back(parse_vec3(item, ctx));
  }
  return out;
}

std::vector<double> parse_double_list(const std::string& text, const Ctx& ctx) {
  std::vector<double> out;
  for (const std::string& p : components(text)) out.push_back(parse_double(p, ctx));
  return out;
}

std::vector<int> parse_int_list(const std::string& text, const Ctx& ctx) {
  std::vector<int> out;
  for (const std::string& p : components(text)) out.push_back(static_cast<int>(parse_integer(p, ctx)));
  return out;
}

std::string fmt(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string fmt(const Vec3& v) { return fmt(v.x()) + ", " + fmt(v.y()) + ", " + fmt(v.z()); }

std::string fmt(const std::vector<Vec3>& vs) {
  std::string out;
  for (std::size_t i = 0; i < vs.size(); ++i) out += (i ? "; " : "") + fmt(vs[i]);
  return out;
}

template <typename T>
std::string fmt_list(const std::vector<T>& vs) {
  std::string out;
  for (std::size_t i = 0; i < vs.size(); ++i) {
    if (i) out += ", ";
    if constexpr (std::is_integral_v<T>) {
      out += std::to_string(vs[i]);
    } else {
      out += fmt(vs[i]);
    }
  }
  return out;
}

struct Field {
  std::string section;
  std::string key;
  std::function<void(ScenarioSpec&, const std::string&, const Ctx&)> read;
  std::function<std::string(const ScenarioSpec&)> write;
};

template <typename T>
Field field(std::string section, std::string key, T ScenarioSpec::*member) {
  Field f{std::move(section), std::move(key), {}, {}};
  f.read = [member](ScenarioSpec& s, const std::string& v, const Ctx& ctx) {
    if constexpr (std::is_same_v<T, double>) {
      s.*member = parse_double(v, ctx);
    } else if constexpr (std::is_same_v<T, bool>) {
      s.*member = parse_bool(v, ctx);
    } else if constexpr (std::is_same_v<T, int>) {
      s.*member = static_cast<int>(parse_integer(v, ctx));
    } else if constexpr (std::is_same_v<T, std::uint64_t>) {
      const long long x = parse_integer(v, ctx);
      if (x < 0) ctx.error("seed must be non-negative");
      s.*member = static_cast<std::uint64_t>(x);
    } else if constexpr (std::is_same_v<T, std::string>) {
      s.*member = v;
    } else if constexpr (std::is_same_v<T, Vec3>) {
      s.*member = parse_vec3(v, ctx);
    } else if constexpr (std::is_same_v<T, std::vector<Vec3>>) {
      s.*member = parse_vec3_list(v, ctx);
    } else if constexpr (std::is_same_v<T, std::vector<double>>) {
      s.*member = parse_double_list(v, ctx);
    } else if constexpr (std::is_same_v<T, std::vector<int>>) {
      s.*member = parse_int_list(v, ctx);
    }
  };
  f.write = [member](const ScenarioSpec& s) -> std::string {
    const T& v = s.*member;
    if constexpr (std::is_same_v<T, double>) {
      return fmt(v);
    } else if constexpr (std::is_same_v<T, bool>) {
      return v ? "true" : "false";
    } else if constexpr (std::is_same_v<T, int> || std::is_same_v<T, std::uint64_t>) {
      return std::to_string(v);
    } else if constexpr (std::is_same_v<T, std::string>) {
      return v;
    } else if constexpr (std::is_same_v<T, Vec3> || std::is_same_v<T, std::vector<Vec3>>) {
      return fmt(v);
    } else {
      return fmt_list(v);
    }
  };
  return f;
}

const std::vector<Field>& fields() {
  using S = ScenarioSpec;
  static const std::vector<Field> table = {
      field("ofdm", "subcarriers", &S::subcarriers),
      field("ofdm", "spacing_hz", &S::spacing_hz),
      field("ofdm", "symbols", &S::symbols),
      field("ofdm", "power_dbm", &S::power_dbm),
      field("ofdm", "fft_size", &S::fft_size),
      field("ofdm", "wavelength", &S::wavelength),
      field("tx", "position", &S::tx),
      field("rx", "count", &S::rx_count),
      field("rx", "radius", &S::rx_radius),
      field("rx", "height", &S::rx_height),
      field("rx", "start_angle_deg", &S::rx_start_angle_deg),
      field("rx", "positions", &S::rx_positions),
      field("rx", "clock_bias", &S::clock_bias),
      field("rx", "clock_biases", &S::clock_biases),
      field("ue", "positions", &S::ue_positions),
      field("ue", "columns", &S::ue_columns),
      field("ue", "euler_zyx_deg", &S::ue_euler_zyx_deg),
      field("ue", "ris_rows", &S::ris_rows),
      field("ue", "ris_cols", &S::ris_cols),
      field("ue", "ris_spacing", &S::ris_spacing),
      field("scatterers", "count", &S::scatterer_count),
      field("scatterers", "rcs", &S::scatterer_rcs),
      field("scatterers", "center", &S::scatterer_center),
      field("scatterers", "radius", &S::scatterer_radius),
      field("scatterers", "positions", &S::scatterer_positions),
      field("noise", "psd_dbm_hz", &S::noise_psd_dbm_hz),
      field("noise", "noise_figure_db", &S::noise_figure_db),
      field("noise", "enabled", &S::noise_enabled),
      field("experiment", "seed", &S::seed),
      field("experiment", "ris_seeds", &S::ris_seeds),
      field("experiment", "noise_seeds", &S::noise_seeds),
      field("experiment", "grid_points", &S::grid_points),
      field("experiment", "grid_half_width", &S::grid_half_width),
      field("experiment", "grid_z", &S::grid_z),
      field("experiment", "radii", &S::radii),
      field("experiment", "rx_counts", &S::rx_counts),
      field("experiment", "scatterer_counts", &S::scatterer_counts),
      field("experiment", "ue_x", &S::ue_x),
      field("experiment", "peb_threshold", &S::peb_threshold),
      field("experiment", "region_lo", &S::region_lo),
      field("experiment", "region_hi", &S::region_hi),
  };
  return table;
}

const char* const kSections[] = {"config", "ofdm", "tx", "rx", "ue", "scatterers", "noise", "experiment"};

void check_spec(const ScenarioSpec& s, const std::string& source) {
  auto bad = [&](const std::string& msg) { throw Error(ErrorKind::Config, source + ": " + msg); };
  if (s.subcarriers < 2) bad("[ofdm] subcarriers must be >= 2");
  if (s.symbols < 1) bad("[ofdm] symbols must be >= 1");
  if (!(s.spacing_hz > 0)) bad("[ofdm] spacing_hz must be positive");
  if (s.fft_size < s.subcarriers) bad("[ofdm] fft_size must be >= subcarriers");
  if (!(s.wavelength > 0)) bad("[ofdm] wavelength must be positive");
  if (s.rx_positions.empty() && s.rx_count < 1) bad("[rx] count must be >= 1");
  if (s.clock_bias != "random" && s.clock_bias != "zero" && s.clock_bias != "explicit") {
    bad("[rx] clock_bias must be random, zero or explicit");
  }
  if (s.clock_bias == "explicit" && s.clock_biases.size() != s.receiver_positions().size()) {
    bad("[rx] clock_biases needs one value per receiver");
  }
  if (s.ue_positions.empty()) bad("[ue] positions must list at least one UE");
  if (!s.ue_columns.empty() && s.ue_columns.size() != s.ue_positions.size()) {
    bad("[ue] columns needs one DFT column per UE");
  }
  if (static_cast<int>(s.ue_positions.size()) >= s.symbols) {
    bad("[ue] " + std::to_string(s.ue_positions.size()) + " UEs need more than " + std::to_string(s.symbols) +
        " OFDM symbols (N < T)");
  }
  if (s.ris_rows < 1 || s.ris_cols < 1 || !(s.ris_spacing > 0)) bad("[ue] invalid RIS geometry");
  if (s.scatterer_count < 0 || !(s.scatterer_rcs > 0) || s.scatterer_radius < 0) bad("[scatterers] invalid values");
  if (s.ris_seeds < 1 || s.noise_seeds < 1) bad("[experiment] ris_seeds and noise_seeds must be >= 1");
  if (s.grid_points < 1) bad("[experiment] grid_points must be >= 1");
}

}  // namespace

double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

double ScenarioSpec::symbol_energy() const { return dbm_to_watts(power_dbm) / (subcarriers * spacing_hz); }

double ScenarioSpec::noise_psd() const { return dbm_to_watts(noise_psd_dbm_hz); }

std::vector<Vec3> ScenarioSpec::receiver_positions() const {
  if (!rx_positions.empty()) return rx_positions;
  std::vector<Vec3> out;
  const double start = rx_start_angle_deg * std::numbers::pi / 180.0;
  for (int m = 0; m < rx_count; ++m) {
    const double a = start + 2.0 * std::numbers::pi * m / rx_count;
    out.emplace_back(tx.x() + rx_radius * std::cos(a), tx.y() + rx_radius * std::sin(a), rx_height);
  }
  return out;
}

RawConfig parse_config_text(const std::string& text, const std::string& source) {
  RawConfig raw;
  raw.source = source;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    // ';' also separates list items, so it only starts a comment at the line start
    std::string body = trim(line.substr(0, line.find('#')));
    if (body.empty() || body.front() == ';') continue;
    if (body.front() == '[') {
      if (body.back() != ']') fail(source, lineno, "unterminated section header");
      raw.sections.push_back({trim(body.substr(1, body.size() - 2)), lineno, {}});
      continue;
    }
    const auto eq = body.find('=');
    if (eq == std::string::npos) fail(source, lineno, "expected 'key = value'");
    if (raw.sections.empty()) fail(source, lineno, "key outside of any [section]");
    const std::string key = trim(body.substr(0, eq));
    if (key.empty()) fail(source, lineno, "empty key");
    raw.sections.back().entries.push_back({key, trim(body.substr(eq + 1)), lineno});
  }
  return raw;
}

ScenarioSpec spec_from_raw(const RawConfig& raw) {
  ScenarioSpec spec;
  std::map<std::string, int> seen;
  for (const RawConfig::Section& sec : raw.sections) {
    if (std::find(std::begin(kSections), std::end(kSections), sec.name) == std::end(kSections)) {
      fail(raw.source, sec.line, "unknown section [" + sec.name + "]");
    }
    for (const RawConfig::Entry& e : sec.entries) {
      const std::string full = sec.name + "." + e.key;
      if (auto [it, fresh] = seen.emplace(full, e.line); !fresh) {
        fail(raw.source, e.line, "duplicate key '" + full + "' (first set on line " + std::to_string(it->second) + ")");
      }
      const Ctx ctx{raw.source, e.line, full};
      if (sec.name == "config") {
        if (e.key != "version") ctx.error("unknown key");
        if (parse_integer(e.value, ctx) != kConfigSchemaVersion) {
          ctx.error("unsupported schema version (expected " + std::to_string(kConfigSchemaVersion) + ")");
        }
        continue;
      }
      const auto& table = fields();
      const auto f = std::find_if(table.begin(), table.end(),
                                  [&](const Field& fd) { return fd.section == sec.name && fd.key == e.key; });
      if (f == table.end()) ctx.error("unknown key");
      f->read(spec, e.value, ctx);
    }
  }
  check_spec(spec, raw.source);
  return spec;
}

ScenarioSpec parse_spec(const std::string& text, const std::string& source) {
  return spec_from_raw(parse_config_text(text, source));
}

ScenarioSpec load_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Config, "cannot open config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_spec(ss.str(), path.string());
}

std::string serialize_spec(const ScenarioSpec& spec) {
  std::ostringstream os;
  os << "[config]\nversion = " << kConfigSchemaVersion << "\n";
  std::string current;
  for (const Field& f : fields()) {
    if (f.section != current) {
      current = f.section;
      os << "\n[" << current << "]\n";
    }
    os << f.key << " = " << f.write(spec) << "\n";
  }
  return os.str();
}

std::string config_hash(const ScenarioSpec& spec) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char c : serialize_spec(spec)) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

Scenario materialize(const ScenarioSpec& spec, std::uint64_t ris_seed, std::uint64_t noise_seed) {
  check_spec(spec, "<spec>");
  Scenario s;
  s.tx = spec.tx;
  s.wavelength = spec.wavelength;
  s.seed = noise_seed;
  s.ofdm = {spec.subcarriers, spec.spacing_hz, spec.symbols, spec.symbol_energy(), spec.fft_size};
  s.noise = {spec.noise_psd(), spec.noise_figure_db, spec.noise_enabled};

  const std::vector<Vec3> rx_pos = spec.receiver_positions();
  Rng bias_rng(derive_seed(noise_seed, streams::kClockBias));
  for (std::size_t m = 0; m < rx_pos.size(); ++m) {
    RxNode node{rx_pos[m], 0.0};
    if (spec.clock_bias == "random") {
      node.clock_bias = bias_rng.uniform() / spec.spacing_hz;
    } else if (spec.clock_bias == "explicit") {
      node.clock_bias = spec.clock_biases[m];
    }
    s.rxs.push_back(node);
  }

  const double deg = std::numbers::pi / 180.0;
  const Rotation orientation = Rotation::from_euler_zyx(
      spec.ue_euler_zyx_deg.x() * deg, spec.ue_euler_zyx_deg.y() * deg, spec.ue_euler_zyx_deg.z() * deg);
  const RisGeometry ris{spec.ris_rows, spec.ris_cols, spec.ris_spacing, spec.wavelength};
  for (std::size_t n = 0; n < spec.ue_positions.size(); ++n) {
    UserEquipment u;
    u.position = spec.ue_positions[n];
    u.orientation = orientation;
    u.ris = ris;
    u.code_column = spec.ue_columns.empty() ? static_cast<int>(n) + 1 : spec.ue_columns[n];
    const std::uint64_t profile_seed = derive_seed(ris_seed, streams::kRisProfile + n);
    u.profile = make_profile(static_cast<int>(n) + 1, u.code_column, spec.symbols, ris.size(), profile_seed);
    s.ues.push_back(std::move(u));
  }

  if (!spec.scatterer_positions.empty()) {
    for (const Vec3& p : spec.scatterer_positions) s.scatterers.push_back({p, spec.scatterer_rcs});
  } else if (spec.scatterer_count > 0) {
    // uniform over a horizontal disc around the center
    Rng rng(derive_seed(ris_seed, streams::kScatterers));
    for (int i = 0; i < spec.scatterer_count; ++i) {
      const double r = spec.scatterer_radius * std::sqrt(rng.uniform());
      const double a = 2.0 * std::numbers::pi * rng.uniform();
      s.scatterers.push_back(
          {spec.scatterer_center + Vec3(r * std::cos(a), r * std::sin(a), 0.0), spec.scatterer_rcs});
    }
  }
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  const ScenarioSpec spec = load_spec(path);
  return materialize(spec, spec.seed, spec.seed);
}

std::vector<std::string> validate(const Scenario& s) {
  std::vector<std::string> errors;
  auto check = [&](auto&& fn) {
    try {
      fn();
    } catch (const Error& e) {
      errors.emplace_back(e.what());
    }
  };
  check([&] { s.ofdm.validate(); });
  if (s.rxs.empty()) errors.emplace_back("no receivers (M >= 1 required)");
  if (s.num_ue() >= s.ofdm.symbols) {
    errors.emplace_back("N = " + std::to_string(s.num_ue()) + " UEs requires T > N, T = " +
                        std::to_string(s.ofdm.symbols));
  }
  if (!(s.wavelength > 0.0)) errors.emplace_back("wavelength must be positive");
  if (!(s.noise.psd >= 0.0)) errors.emplace_back("noise PSD must be non-negative");
  for (std::size_t m = 0; m < s.rxs.size(); ++m) {
    const RxNode& r = s.rxs[m];
    if ((r.position - s.tx).norm() == 0.0) errors.push_back("geometry: Rx " + std::to_string(m + 1) + " coincides with the Tx");
    if (!(r.clock_bias >= 0.0) || r.clock_bias >= s.ofdm.ambiguity_window()) {
      errors.push_back("Rx " + std::to_string(m + 1) + " clock bias outside [0, 1/delta_f)");
    }
  }
  std::vector<int> cols;
  for (int n = 1; n <= s.num_ue(); ++n) {
    const UserEquipment& u = s.ue(n);
    const std::string who = "UE " + std::to_string(n);
    if ((u.position - s.tx).norm() == 0.0) errors.push_back("geometry: " + who + " coincides with the Tx");
    for (const RxNode& r : s.rxs) {
      if ((u.position - r.position).norm() == 0.0) errors.push_back("geometry: " + who + " coincides with an Rx");
    }
    check([&] { u.ris.validate(); });
    if (u.profile.constant.size() != static_cast<std::size_t>(u.ris.size())) {
      errors.push_back(who + " profile length does not match its RIS");
    }
    if (u.profile.temporal.size() != static_cast<std::size_t>(s.ofdm.symbols)) {
      errors.push_back(who + " temporal code length does not match T");
    }
    if (u.code_column < 1 || u.code_column >= s.ofdm.symbols) {
      errors.push_back(who + " DFT column " + std::to_string(u.code_column) + " outside [1, T)");
    }
    if (std::find(cols.begin(), cols.end(), u.code_column) != cols.end()) {
      errors.push_back("profile collision: " + who + " reuses DFT column " + std::to_string(u.code_column));
    }
    cols.push_back(u.code_column);
  }
  for (const Scatterer& sc : s.scatterers) {
    if (!(sc.rcs > 0.0)) errors.emplace_back("scatterer RCS must be positive");
  }
  return errors;
}

}  // namespace risloc
