#pragma once

// Flat `key = value` run configuration. Lines starting with '#' are
// comments. Numbers are written with 17 significant digits so a dump
// parses back to identical doubles.

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "jtenso/integrator.hpp"
#include "jtenso/model.hpp"

namespace jtenso {

/// 17 significant digits, enough for any double to read back unchanged.
std::string format_number(double v);

/// Strict decimal parse of the whole string. Throws Error(Config).
double parse_number(std::string_view text, std::string_view key = "");
std::int64_t parse_integer(std::string_view text, std::string_view key = "");

using KeyValues = std::map<std::string, std::string>;

/// Throws Error(Config) on malformed lines or duplicate keys.
KeyValues parse_config(std::string_view text);
KeyValues load_config(const std::string& path);
std::string dump_config(const KeyValues& kv);

/// Typed access to a KeyValues map. Every lookup records the resolved value
/// (given or default), and finish() rejects keys nobody asked for.
class ConfigReader {
 public:
  explicit ConfigReader(KeyValues values) : values_(std::move(values)) {}

  double number(const std::string& key, double fallback);
  std::optional<double> optional_number(const std::string& key);
  std::int64_t integer(const std::string& key, std::int64_t fallback);
  std::string text(const std::string& key, const std::string& fallback);
  bool flag(const std::string& key, bool fallback);
  /// Comma-separated numbers.
  std::vector<double> numbers(const std::string& key, const std::vector<double>& fallback);

  /// Throws Error(Config) naming every key that was never read.
  void finish() const;
  const KeyValues& resolved() const { return resolved_; }

 private:
  const std::string* find(const std::string& key);

  KeyValues values_;
  KeyValues resolved_;
  std::set<std::string> used_;
};

// Shared blocks. Keys: delta rho c k a; amplitude omega noise_sigma seed;
// rtol atol max_step.
ModelParams read_model(ConfigReader& r, const ModelParams& defaults = ModelParams::reference());
Forcing read_forcing(ConfigReader& r, double a0, double default_amplitude = 0.0);
IntegratorConfig read_integrator(ConfigReader& r, const IntegratorConfig& defaults = {});

KeyValues to_config(const ModelParams& p);
KeyValues to_config(const Forcing& f);

}  // namespace jtenso
