#pragma once

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "suites.hpp"

namespace hix {

/* -------- run configuration: line-based `key = value` text -------- */

struct RunConfig {
  std::string scheduleId = "desk-main";
  std::string descriptor = "WmT";
  long supportBound = 3;
  long stage = 2;
  long depth = 5;
  long maxWeightIndex = -1;
  long budget = 300000;
  long slot = 1;
  bool convex = true;
  std::string snapshot = "wex";  // which stage closure `gen` materializes
  std::string cachePath;         // persistent norm values; empty = no cache
  std::string logPath;           // persistent allocation log; empty = fresh
  std::string fixturesDir;       // golden reports

  ParamSchedule schedule() const { return schedule_by_id(scheduleId); }
  SetDescriptor desc() const { return parse_descriptor(descriptor); }
};

inline std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

inline void apply_config_line(RunConfig& cfg, const std::string& rawLine) {
  std::string line = rawLine.substr(0, rawLine.find('#'));
  if (trim(line).empty()) return;
  size_t eq = line.find('=');
  if (eq == std::string::npos) throw InputError("config line without '=': " + rawLine);
  std::string key = trim(line.substr(0, eq));
  std::string val = trim(line.substr(eq + 1));
  auto num = [&]() {
    try {
      return std::stol(val);
    } catch (const std::exception&) {
      throw InputError("config key " + key + " needs an integer, got: " + val);
    }
  };
  if (key == "schedule") cfg.scheduleId = val;
  else if (key == "descriptor") cfg.descriptor = val;
  else if (key == "supportBound") cfg.supportBound = num();
  else if (key == "stage") cfg.stage = num();
  else if (key == "depth") cfg.depth = num();
  else if (key == "maxWeightIndex") cfg.maxWeightIndex = num();
  else if (key == "budget") cfg.budget = num();
  else if (key == "slot") cfg.slot = num();
  else if (key == "convex") cfg.convex = val == "true" || val == "1";
  else if (key == "snapshot") cfg.snapshot = val;
  else if (key == "cache") cfg.cachePath = val;
  else if (key == "log") cfg.logPath = val;
  else if (key == "fixtures") cfg.fixturesDir = val;
  else throw InputError("unknown config key: " + key);
}

/* environment overrides are allowed for paths only */
inline void apply_env_overrides(RunConfig& cfg) {
  if (const char* p = std::getenv("HIX_CACHE")) cfg.cachePath = p;
  if (const char* p = std::getenv("HIX_LOG")) cfg.logPath = p;
  if (const char* p = std::getenv("HIX_FIXTURES")) cfg.fixturesDir = p;
}

inline RunConfig load_config(const std::string& path) {
  RunConfig cfg;
  if (!path.empty()) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot read config file: " + path);
    std::string line;
    while (std::getline(in, line)) apply_config_line(cfg, line);
  }
  apply_env_overrides(cfg);
  if (cfg.supportBound < 1 || cfg.stage < 0 || cfg.depth < 0 || cfg.budget < 1)
    throw InputError("config bounds must be positive");
  cfg.schedule();  // referenced schedule must exist
  cfg.desc();
  return cfg;
}

/* -------- persistent value cache: one `value<TAB>key` line per entry --------
 * Keys contain spaces and '|', so the value leads and a tab separates. */

inline ValueCache load_cache(const std::string& path) {
  ValueCache cache;
  if (path.empty()) return cache;
  std::ifstream in(path);
  if (!in) return cache;  // a missing cache is just cold
  std::string line;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    size_t tab = line.find('\t');
    if (tab == std::string::npos) throw InputError("corrupt cache line: " + line);
    cache.values[line.substr(tab + 1)] = parse_rat(line.substr(0, tab));
  }
  return cache;
}

inline void save_cache(const ValueCache& cache, const std::string& path) {
  if (path.empty() || !cache.dirty) return;
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw InputError("cannot write cache file: " + path);
  for (auto& [k, v] : cache.values) out << to_string(v) << '\t' << k << '\n';
}

/* -------- persistent allocation log -------- */

inline CodingState load_allocation_log(const std::string& path) {
  if (path.empty()) return {};
  std::ifstream in(path);
  if (!in) return {};
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line))
    if (!trim(line).empty()) lines.push_back(line);
  return replay_log(lines);
}

inline void save_allocation_log(const CodingState& coding, const std::string& path) {
  if (path.empty()) return;
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw InputError("cannot write allocation log: " + path);
  for (auto& line : coding.log) out << line << '\n';
}

/* -------- display helpers -------- */

/* decimal parenthetical by integer long division; display only, never
 * compared */
inline std::string decimal_string(const Rat& r, int digits = 6) {
  Int num = numerator(r), den = denominator(r);
  bool neg = num < 0;
  if (neg) num = -num;
  Int ip = num / den, rem = num % den;
  std::string s = (neg ? "-" : "") + ip.str();
  if (rem == 0) return s;
  s += '.';
  for (int i = 0; i < digits && rem != 0; ++i) {
    rem *= 10;
    s += char('0' + (rem / den).convert_to<int>());
    rem %= den;
  }
  if (rem != 0) s += "..";
  return s;
}

inline std::string show_rat(const Rat& r) {
  return to_string(r) + " (" + decimal_string(r) + ")";
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read file: " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace hix
