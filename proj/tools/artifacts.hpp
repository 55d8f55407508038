#pragma once

// Output plumbing for the CLI: CSV files, JSON documents and the per-run
// manifest.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <type_traits>
#include <vector>

#include <json.hpp>

#include "jtenso/config.hpp"
#include "jtenso/error.hpp"

namespace jtenso::cli {

inline constexpr const char* kVersion = "0.1.0";

using nlohmann::json;

class Csv {
 public:
  Csv(const std::filesystem::path& path, const std::string& header) : out_(path) {
    if (!out_) throw Error(ErrorCode::Config, "cannot write " + path.string());
    out_ << header << '\n';
  }

  template <class... Cells>
  void row(const Cells&... cells) {
    bool first = true;
    ((out_ << (first ? "" : ",") << cell(cells), first = false), ...);
    out_ << '\n';
  }

  /// One line of a matrix file.
  template <class T, class Fmt>
  void line(const std::vector<T>& v, std::size_t begin, std::size_t n, Fmt fmt) {
    for (std::size_t i = 0; i < n; ++i) out_ << (i ? "," : "") << fmt(v[begin + i]);
    out_ << '\n';
  }

 private:
  static std::string cell(double v) { return format_number(v); }
  static std::string cell(const std::string& s) { return s; }
  static std::string cell(const char* s) { return s; }
  template <class I, class = std::enable_if_t<std::is_integral_v<I>>>
  static std::string cell(I v) { return std::to_string(v); }

  std::ofstream out_;
};

inline void write_json(const std::filesystem::path& path, const json& doc) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Config, "cannot write " + path.string());
  out << doc.dump(2) << '\n';
}

/// FNV-1a over the canonical config text.
inline std::string config_hash(const KeyValues& kv) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : dump_config(kv)) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

/// NaN and inf are not valid JSON.
inline json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

struct RunContext {
  std::string command;
  std::filesystem::path out_dir;
  int jobs = 1;
  std::chrono::system_clock::time_point started = std::chrono::system_clock::now();
  std::chrono::steady_clock::time_point clock = std::chrono::steady_clock::now();
  std::vector<std::string> outputs;

  std::filesystem::path file(const std::string& name) {
    outputs.push_back(name);
    return out_dir / name;
  }

  void write_manifest(const KeyValues& resolved) const {
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - clock).count();
    const auto t = std::chrono::system_clock::to_time_t(started);
    char stamp[32];
    std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    json m;
    m["tool"] = "jtenso";
    m["version"] = kVersion;
    m["command"] = command;
    m["config"] = resolved;
    m["config_hash"] = config_hash(resolved);
    m["jobs"] = jobs;
    m["started_utc"] = stamp;
    m["wall_clock_seconds"] = wall;
    m["outputs"] = outputs;
    write_json(out_dir / "manifest.json", m);
    std::ofstream cfg(out_dir / "config.cfg");
    cfg << dump_config(resolved);
  }
};

}  // namespace jtenso::cli
