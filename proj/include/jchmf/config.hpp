#pragma once

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "jchmf/errors.hpp"
#include "jchmf/meanfield.hpp"
#include "jchmf/model.hpp"
#include "jchmf/sweep.hpp"

namespace jchmf {

namespace config_detail {

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  for (;;) {
    const auto pos = s.find(sep, start);
    parts.push_back(trim(s.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) return parts;
    start = pos + 1;
  }
}

inline bool is_key(std::string_view k) {
  if (k.empty() || !(k[0] >= 'a' && k[0] <= 'z')) return false;
  for (char c : k)
    if (!((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_')) return false;
  return true;
}

/// Where an assignment came from, for error messages.
struct Origin {
  std::string source;
  std::size_t line = 0;

  std::string prefix(std::string_view key) const {
    return source + ": line " + std::to_string(line) + ": key '" + std::string(key) + "': ";
  }
};

inline double parse_real(std::string_view text, std::string_view key, const Origin& at) {
  std::string_view t = text;
  if (!t.empty() && t.front() == '+') t.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc{} || ptr != t.data() + t.size() || !std::isfinite(v))
    throw ConfigError(at.prefix(key) + "expected a finite number, got '" + std::string(text) + "'");
  return v;
}

inline std::size_t parse_count(std::string_view text, std::string_view key, const Origin& at) {
  std::size_t v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size())
    throw ConfigError(at.prefix(key) + "expected a nonnegative integer, got '" + std::string(text) + "'");
  return v;
}

inline bool parse_bool(std::string_view text, std::string_view key, const Origin& at) {
  if (text == "true" || text == "1") return true;
  if (text == "false" || text == "0") return false;
  throw ConfigError(at.prefix(key) + "expected true or false, got '" + std::string(text) + "'");
}

inline std::vector<double> parse_real_list(std::string_view text, std::string_view key,
                                           const Origin& at) {
  std::vector<double> out;
  for (auto part : split(text, ',')) out.push_back(parse_real(part, key, at));
  return out;
}

/// Shortest round-trip text for a double.
inline std::string shortest(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

struct Assignment {
  std::string key;
  std::string value;
  Origin origin;
};

/// Splits a config text into assignments. Rejects malformed lines, bad key
/// spellings, empty values and duplicates; does not interpret keys.
inline std::vector<Assignment> read_assignments(std::string_view text, const std::string& source) {
  std::vector<Assignment> out;
  std::map<std::string, std::size_t, std::less<>> seen;
  std::size_t line_no = 0;
  for (auto raw : split(text, '\n')) {
    ++line_no;
    const Origin at{source, line_no};
    std::string_view line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError(source + ": line " + std::to_string(line_no) + ": expected 'key = value', got '" +
                        std::string(line) + "'");
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    if (!is_key(key))
      throw ConfigError(source + ": line " + std::to_string(line_no) + ": invalid key '" +
                        std::string(key) + "' (expected lower_snake_case)");
    if (value.empty()) throw ConfigError(at.prefix(key) + "empty value");
    if (auto it = seen.find(key); it != seen.end())
      throw ConfigError(at.prefix(key) + "duplicate key (first set on line " + std::to_string(it->second) + ")");
    seen.emplace(std::string(key), line_no);
    out.push_back({std::string(key), std::string(value), at});
  }
  return out;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path + ": cannot open config file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// One settable scalar key: parse into the target, and print its current value.
template <class Target>
struct Field {
  const char* name;
  std::function<void(Target&, std::string_view, const Origin&)> set;
  std::function<std::string(const Target&)> show;
};

template <class Target>
Field<Target> real_field(const char* name, double Target::*member) {
  return {name,
          [name, member](Target& t, std::string_view v, const Origin& at) { t.*member = parse_real(v, name, at); },
          [member](const Target& t) { return shortest(t.*member); }};
}

}  // namespace config_detail

/// A named set of scalar key overrides applied on top of a base config.
struct Variant {
  std::string id;
  std::vector<std::pair<std::string, std::string>> overrides;
};

/// Parsed run configuration: model parameters, minimiser settings, sweep
/// window and the list-valued command keys (delta_list, variants).
struct RunConfig {
  SystemParams params;
  MinimizeSettings settings;
  double mu_min = 0.0;
  double mu_max = 0.0;
  std::size_t mu_points = 40;
  double k_min = 0.0;
  double k_max = 0.0;
  std::size_t k_points = 40;
  std::vector<double> delta_list;
  std::vector<Variant> variants;

  std::string source = "<config>";
  std::map<std::string, std::size_t> assigned;  // key -> line
  std::size_t line_count = 0;

  /// Sweep window and parameters; mu_min, mu_max and k_max must have been set.
  SweepSpec sweep_spec() const;

  /// Copy with a variant's overrides applied.
  RunConfig with_variant(const Variant& v) const;

  /// "key = value" for every known key, marking the ones left at their default.
  std::string header() const;
};

namespace config_detail {

inline const std::vector<Field<RunConfig>>& run_fields() {
  using R = RunConfig;
  auto param = [](const char* name, double SystemParams::*m) {
    return Field<R>{name,
                    [name, m](R& c, std::string_view v, const Origin& at) { c.params.*m = parse_real(v, name, at); },
                    [m](const R& c) { return shortest(c.params.*m); }};
  };
  auto setting = [](const char* name, double MinimizeSettings::*m) {
    return Field<R>{name,
                    [name, m](R& c, std::string_view v, const Origin& at) { c.settings.*m = parse_real(v, name, at); },
                    [m](const R& c) { return shortest(c.settings.*m); }};
  };
  auto count = [](const char* name, auto setter, auto getter) {
    return Field<R>{name,
                    [name, setter](R& c, std::string_view v, const Origin& at) { setter(c, parse_count(v, name, at)); },
                    [getter](const R& c) { return std::to_string(getter(c)); }};
  };
  static const std::vector<Field<R>> fields = {
      param("omega_r", &SystemParams::omega_r),
      param("delta", &SystemParams::delta),
      param("g", &SystemParams::g),
      param("eta", &SystemParams::eta),
      param("d_zfs", &SystemParams::d_zfs),
      param("gamma_e", &SystemParams::gamma_e),
      param("b_z", &SystemParams::b_z),
      param("mu", &SystemParams::mu),
      param("k", &SystemParams::k),
      param("z", &SystemParams::z),
      param("alpha", &SystemParams::alpha),
      param("gamma_qubit", &SystemParams::gamma_qubit),
      param("kappa", &SystemParams::kappa),
      count("n_max", [](R& c, std::size_t v) { c.params.n_max = v; }, [](const R& c) { return c.params.n_max; }),
      Field<R>{"psi_max",
               [](R& c, std::string_view v, const Origin& at) { c.settings.psi_max = parse_real(v, "psi_max", at); },
               [](const R& c) {
                 return c.settings.psi_max ? shortest(*c.settings.psi_max)
                                           : shortest(c.settings.resolved_psi_max(c.params)) + "  (sqrt(n_max)/3)";
               }},
      count("coarse_points", [](R& c, std::size_t v) { c.settings.coarse_points = v; },
            [](const R& c) { return c.settings.coarse_points; }),
      setting("refine_tol", &MinimizeSettings::refine_tol),
      setting("truncation_guard", &MinimizeSettings::truncation_guard),
      setting("sf_threshold", &MinimizeSettings::sf_threshold),
      Field<R>{"force_general_solver",
               [](R& c, std::string_view v, const Origin& at) {
                 c.settings.force_general_solver = parse_bool(v, "force_general_solver", at);
               },
               [](const R& c) { return std::string(c.settings.force_general_solver ? "true" : "false"); }},
      real_field<R>("mu_min", &R::mu_min),
      real_field<R>("mu_max", &R::mu_max),
      count("mu_points", [](R& c, std::size_t v) { c.mu_points = v; }, [](const R& c) { return c.mu_points; }),
      real_field<R>("k_min", &R::k_min),
      real_field<R>("k_max", &R::k_max),
      count("k_points", [](R& c, std::size_t v) { c.k_points = v; }, [](const R& c) { return c.k_points; }),
  };
  return fields;
}

inline const Field<RunConfig>* find_run_field(std::string_view key) {
  for (const auto& f : run_fields())
    if (key == f.name) return &f;
  return nullptr;
}

/// "delta=0, eta=0.5" -> overrides. Only scalar keys are allowed.
inline Variant parse_variant(std::string_view text, const Origin& at) {
  Variant v;
  for (auto part : split(text, ',')) {
    const auto eq = part.find('=');
    const auto key = eq == std::string_view::npos ? part : trim(part.substr(0, eq));
    if (eq == std::string_view::npos || trim(part.substr(eq + 1)).empty())
      throw ConfigError(at.prefix("variants") + "expected 'key=value' in variant, got '" + std::string(part) + "'");
    if (!find_run_field(key))
      throw ConfigError(at.prefix("variants") + "unknown key '" + std::string(key) + "' in variant");
    v.overrides.emplace_back(std::string(key), std::string(trim(part.substr(eq + 1))));
  }
  for (const auto& [k, val] : v.overrides) v.id += (v.id.empty() ? "" : " ") + k + "=" + val;
  return v;
}

inline void apply_run_assignment(RunConfig& c, const Assignment& a) {
  if (a.key == "delta_list") {
    c.delta_list = parse_real_list(a.value, a.key, a.origin);
  } else if (a.key == "variants") {
    c.variants.clear();
    for (auto part : split(a.value, ';')) {
      if (part.empty()) throw ConfigError(a.origin.prefix(a.key) + "empty variant");
      c.variants.push_back(parse_variant(part, a.origin));
    }
  } else if (const auto* f = find_run_field(a.key)) {
    f->set(c, a.value, a.origin);
  } else {
    throw ConfigError(a.origin.prefix(a.key) + "unknown key");
  }
}

inline ConfigError missing_key(const RunConfig& c, std::string_view key) {
  return ConfigError(c.source + ": line " + std::to_string(c.line_count + 1) + ": key '" + std::string(key) +
                     "': missing required key (not set anywhere in the file)");
}

}  // namespace config_detail

inline constexpr std::array<const char*, 2> kRequiredRunKeys{"omega_r", "g"};

/// Parse a run config. omega_r and g are mandatory; every other key has a default.
inline RunConfig parse_run_config(std::string_view text, std::string source = "<config>") {
  RunConfig c;
  c.source = std::move(source);
  c.line_count = static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n')) +
                 (text.empty() || text.back() == '\n' ? 0 : 1);
  for (const auto& a : config_detail::read_assignments(text, c.source)) {
    config_detail::apply_run_assignment(c, a);
    c.assigned[a.key] = a.origin.line;
  }
  for (const char* key : kRequiredRunKeys)
    if (!c.assigned.count(key)) throw config_detail::missing_key(c, key);
  try {
    validate(c.params);
    validate(c.settings, c.params);
  } catch (const ContractViolation& e) {
    throw ConfigError(c.source + ": " + e.what());
  }
  return c;
}

inline RunConfig load_run_config(const std::string& path) {
  return parse_run_config(config_detail::read_file(path), path);
}

inline SweepSpec RunConfig::sweep_spec() const {
  for (const char* key : {"mu_min", "mu_max", "k_max"})
    if (!assigned.count(key)) throw config_detail::missing_key(*this, key);
  SweepSpec s;
  s.mu_min = mu_min;
  s.mu_max = mu_max;
  s.mu_points = mu_points;
  s.k_min = k_min;
  s.k_max = k_max;
  s.k_points = k_points;
  s.base_params = params;
  s.settings = settings;
  try {
    validate(s);
  } catch (const ContractViolation& e) {
    throw ConfigError(source + ": " + e.what());
  }
  return s;
}

inline RunConfig RunConfig::with_variant(const Variant& v) const {
  RunConfig c = *this;
  const auto line = assigned.count("variants") ? assigned.at("variants") : 0;
  for (const auto& [key, value] : v.overrides) {
    config_detail::apply_run_assignment(c, {key, value, {source, line}});
    c.assigned[key] = line;
  }
  try {
    validate(c.params);
    validate(c.settings, c.params);
  } catch (const ContractViolation& e) {
    throw ConfigError(source + ": variant '" + v.id + "': " + e.what());
  }
  return c;
}

inline std::string RunConfig::header() const {
  std::string out = "# config: " + source + "\n";
  for (const auto& f : config_detail::run_fields()) {
    out += "# " + std::string(f.name) + " = " + f.show(*this);
    if (!assigned.count(f.name)) out += "  [default]";
    out += "\n";
  }
  if (!delta_list.empty()) {
    out += "# delta_list =";
    for (std::size_t i = 0; i < delta_list.size(); ++i)
      out += (i ? ", " : " ") + config_detail::shortest(delta_list[i]);
    out += "\n";
  }
  for (const auto& v : variants) out += "# variant: " + v.id + "\n";
  return out;
}

/// Device geometry for the SI coupling report.
struct GeometryConfig {
  GeometryParams geom;
  double gamma_e_si = kGammaElectron;
  std::vector<double> d_list;        // loop distances for the g table, m
  std::vector<double> k_targets_hz;  // k / 2pi values to invert for the hopping capacitance
  std::string source = "<geometry>";
};

inline GeometryConfig parse_geometry_config(std::string_view text, std::string source = "<geometry>") {
  using namespace config_detail;
  using G = GeometryParams;
  GeometryConfig c;
  c.source = std::move(source);
  const std::vector<Field<G>> fields = {
      real_field<G>("l_r", &G::l_r),     real_field<G>("omega_r_si", &G::omega_r_si),
      real_field<G>("i_p", &G::i_p),     real_field<G>("r", &G::r),
      real_field<G>("d", &G::d),         real_field<G>("z_0", &G::z_0),
      real_field<G>("c_hop", &G::c_hop), real_field<G>("c_out", &G::c_out),
  };
  for (const auto& a : read_assignments(text, c.source)) {
    if (a.key == "gamma_e_si") {
      c.gamma_e_si = parse_real(a.value, a.key, a.origin);
    } else if (a.key == "d_list") {
      c.d_list = parse_real_list(a.value, a.key, a.origin);
    } else if (a.key == "k_targets_hz") {
      c.k_targets_hz = parse_real_list(a.value, a.key, a.origin);
    } else {
      const Field<G>* hit = nullptr;
      for (const auto& f : fields)
        if (a.key == f.name) hit = &f;
      if (!hit) throw ConfigError(a.origin.prefix(a.key) + "unknown key");
      hit->set(c.geom, a.value, a.origin);
    }
  }
  try {
    validate(c.geom);
    for (double d : c.d_list)
      if (!(d > 0.0)) throw ContractViolation("d_list entries must be > 0");
  } catch (const ContractViolation& e) {
    throw ConfigError(c.source + ": " + e.what());
  }
  return c;
}

inline GeometryConfig load_geometry_config(const std::string& path) {
  return parse_geometry_config(config_detail::read_file(path), path);
}

}  // namespace jchmf
