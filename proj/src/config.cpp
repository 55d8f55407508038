#include "jtenso/config.hpp"

#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "jtenso/error.hpp"

namespace jtenso {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string where(std::string_view key) { return key.empty() ? std::string() : " for key '" + std::string(key) + "'"; }

}  // namespace

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_number(std::string_view text, std::string_view key) {
  const auto s = trim(text);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size())
    throw Error(ErrorCode::Config, "not a number" + where(key) + ": '" + std::string(text) + "'");
  return v;
}

std::int64_t parse_integer(std::string_view text, std::string_view key) {
  const auto s = trim(text);
  std::int64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
    // Accept integral values written as decimals, e.g. 1e6.
    const double d = parse_number(s, key);
    if (d != std::floor(d) || std::abs(d) > 9.0e15)
      throw Error(ErrorCode::Config, "not an integer" + where(key) + ": '" + std::string(text) + "'");
    return static_cast<std::int64_t>(d);
  }
  return v;
}

KeyValues parse_config(std::string_view text) {
  KeyValues out;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    auto line = trim(text.substr(0, nl));
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw Error(ErrorCode::Config, "line " + std::to_string(line_no) + ": expected key = value");
    const std::string key(trim(line.substr(0, eq)));
    const std::string value(trim(line.substr(eq + 1)));
    if (key.empty()) throw Error(ErrorCode::Config, "line " + std::to_string(line_no) + ": empty key");
    if (!out.emplace(key, value).second)
      throw Error(ErrorCode::Config, "line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
  }
  return out;
}

KeyValues load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Config, "cannot read config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string dump_config(const KeyValues& kv) {
  std::string out;
  for (const auto& [k, v] : kv) out += k + " = " + v + "\n";
  return out;
}

const std::string* ConfigReader::find(const std::string& key) {
  used_.insert(key);
  const auto it = values_.find(key);
  return it == values_.end() ? nullptr : &it->second;
}

double ConfigReader::number(const std::string& key, double fallback) {
  const auto* s = find(key);
  const double v = s ? parse_number(*s, key) : fallback;
  resolved_[key] = format_number(v);
  return v;
}

std::optional<double> ConfigReader::optional_number(const std::string& key) {
  const auto* s = find(key);
  if (!s) return std::nullopt;
  const double v = parse_number(*s, key);
  resolved_[key] = format_number(v);
  return v;
}

std::int64_t ConfigReader::integer(const std::string& key, std::int64_t fallback) {
  const auto* s = find(key);
  const auto v = s ? parse_integer(*s, key) : fallback;
  resolved_[key] = std::to_string(v);
  return v;
}

std::string ConfigReader::text(const std::string& key, const std::string& fallback) {
  const auto* s = find(key);
  auto v = s ? *s : fallback;
  resolved_[key] = v;
  return v;
}

bool ConfigReader::flag(const std::string& key, bool fallback) {
  const auto* s = find(key);
  bool v = fallback;
  if (s) {
    if (*s == "true" || *s == "1" || *s == "yes") v = true;
    else if (*s == "false" || *s == "0" || *s == "no") v = false;
    else throw Error(ErrorCode::Config, "not a boolean for key '" + key + "': '" + *s + "'");
  }
  resolved_[key] = v ? "true" : "false";
  return v;
}

std::vector<double> ConfigReader::numbers(const std::string& key, const std::vector<double>& fallback) {
  const auto* s = find(key);
  std::vector<double> v;
  if (s) {
    std::string_view rest = *s;
    while (true) {
      const auto comma = rest.find(',');
      v.push_back(parse_number(rest.substr(0, comma), key));
      if (comma == std::string_view::npos) break;
      rest = rest.substr(comma + 1);
    }
  } else {
    v = fallback;
  }
  std::string joined;
  for (std::size_t i = 0; i < v.size(); ++i) joined += (i ? "," : "") + format_number(v[i]);
  resolved_[key] = joined;
  return v;
}

void ConfigReader::finish() const {
  std::string unknown;
  for (const auto& [k, v] : values_)
    if (!used_.count(k)) unknown += (unknown.empty() ? "" : ", ") + k;
  if (!unknown.empty()) throw Error(ErrorCode::Config, "unknown config keys: " + unknown);
}

ModelParams read_model(ConfigReader& r, const ModelParams& d) {
  ModelParams p;
  p.delta = r.number("delta", d.delta);
  p.rho = r.number("rho", d.rho);
  p.c = r.number("c", d.c);
  p.k = r.number("k", d.k);
  p.a = r.number("a", d.a);
  try {
    p.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::Config, e.what());
  }
  return p;
}

Forcing read_forcing(ConfigReader& r, double a0, double default_amplitude) {
  Forcing f;
  f.a0 = a0;
  f.amplitude = r.number("amplitude", default_amplitude);
  f.omega = r.number("omega", f.omega);
  f.noise_sigma = r.number("noise_sigma", 0.0);
  f.seed = static_cast<std::uint64_t>(r.integer("seed", 0));
  try {
    f.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::Config, e.what());
  }
  return f;
}

IntegratorConfig read_integrator(ConfigReader& r, const IntegratorConfig& d) {
  IntegratorConfig c = d;
  c.rtol = r.number("rtol", d.rtol);
  c.atol = r.number("atol", d.atol);
  c.max_step = r.number("max_step", d.max_step);
  try {
    c.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::Config, e.what());
  }
  return c;
}

KeyValues to_config(const ModelParams& p) {
  return {{"delta", format_number(p.delta)},
          {"rho", format_number(p.rho)},
          {"c", format_number(p.c)},
          {"k", format_number(p.k)},
          {"a", format_number(p.a)}};
}

KeyValues to_config(const Forcing& f) {
  return {{"a", format_number(f.a0)},
          {"amplitude", format_number(f.amplitude)},
          {"omega", format_number(f.omega)},
          {"noise_sigma", format_number(f.noise_sigma)},
          {"seed", std::to_string(f.seed)}};
}

}  // namespace jtenso
