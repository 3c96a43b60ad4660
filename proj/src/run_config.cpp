#include "cgbench/run_config.hpp"

#include <cstdlib>
#include <fstream>

#include "cgbench/strutil.hpp"

extern char** environ;

namespace cgbench {

namespace {

const char* rank_name(int rank) {
  switch (rank) {
    case 3: return "flag";
    case 2: return "env";
    case 1: return "file";
    default: return "default";
  }
}

bool looks_secret(const std::string& key) {
  std::string k = to_lower(key);
  return contains(k, "secret") || contains(k, "token") ||
         (contains(k, "key") && !contains(k, "key_env") && !contains(k, "keywords"));
}

}  // namespace

void RunConfig::declare(const std::string& key, std::string default_value) {
  auto& e = entries_[key];
  if (!default_value.empty() && e.rank < 0) {
    e.value = std::move(default_value);
    e.rank = 0;
  }
}

void RunConfig::set_with_rank(const std::string& key, std::string value, int rank) {
  auto it = entries_.find(key);
  if (it == entries_.end())
    throw ConfigError("unknown config key '" + key + "'");
  if (rank >= it->second.rank) {
    it->second.value = std::move(value);
    it->second.rank = rank;
  }
}

void RunConfig::set_flag(const std::string& key, std::string value) {
  set_with_rank(key, std::move(value), 3);
}

void RunConfig::load_env(const std::string& prefix) {
  for (char** p = environ; p && *p; ++p) {
    std::string_view entry(*p);
    auto eq = entry.find('=');
    if (eq == std::string_view::npos) continue;
    std::string_view name = entry.substr(0, eq);
    if (!starts_with(name, prefix)) continue;
    std::string key = to_lower(std::string(name.substr(prefix.size())));
    if (entries_.find(key) == entries_.end()) continue;  // foreign variable
    set_with_rank(key, std::string(entry.substr(eq + 1)), 2);
  }
}

void RunConfig::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string s = trim(line);
    if (s.empty() || s[0] == '#') continue;
    auto eq = s.find('=');
    if (eq == std::string::npos)
      throw ConfigError(path + ":" + std::to_string(lineno) +
                        ": expected 'key = value'");
    std::string key = trim(s.substr(0, eq));
    std::string value = trim(s.substr(eq + 1));
    if (key.empty())
      throw ConfigError(path + ":" + std::to_string(lineno) + ": empty key");
    if (entries_.find(key) == entries_.end())
      throw ConfigError(path + ":" + std::to_string(lineno) +
                        ": unknown config key '" + key + "'");
    set_with_rank(key, value, 1);
  }
}

bool RunConfig::has(const std::string& key) const {
  auto it = entries_.find(key);
  return it != entries_.end() && it->second.rank >= 0;
}

std::optional<std::string> RunConfig::get(const std::string& key) const {
  auto it = entries_.find(key);
  if (it == entries_.end() || it->second.rank < 0) return std::nullopt;
  return it->second.value;
}

std::string RunConfig::get_or(const std::string& key,
                              const std::string& fallback) const {
  auto v = get(key);
  return v ? *v : fallback;
}

long long RunConfig::get_int(const std::string& key, long long fallback) const {
  auto v = get(key);
  if (!v) return fallback;
  try {
    size_t pos = 0;
    long long n = std::stoll(*v, &pos);
    if (pos != v->size()) throw std::invalid_argument("trailing");
    return n;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "' is not an integer: " + *v);
  }
}

double RunConfig::get_double(const std::string& key, double fallback) const {
  auto v = get(key);
  if (!v) return fallback;
  try {
    size_t pos = 0;
    double d = std::stod(*v, &pos);
    if (pos != v->size()) throw std::invalid_argument("trailing");
    return d;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "' is not a number: " + *v);
  }
}

bool RunConfig::get_bool(const std::string& key, bool fallback) const {
  auto v = get(key);
  if (!v) return fallback;
  std::string s = to_lower(*v);
  if (s == "1" || s == "true" || s == "yes" || s == "on") return true;
  if (s == "0" || s == "false" || s == "no" || s == "off") return false;
  throw ConfigError("config key '" + key + "' is not a boolean: " + *v);
}

nlohmann::json RunConfig::echo() const {
  nlohmann::json out = nlohmann::json::object();
  for (const auto& [key, e] : entries_) {
    if (e.rank < 0) continue;
    if (looks_secret(key)) continue;
    out[key] = {{"value", e.value}, {"source", rank_name(e.rank)}};
  }
  return out;
}

}  // namespace cgbench
