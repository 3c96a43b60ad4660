#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace cgbench {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Layered settings with provenance. Precedence, strongest first:
// command-line flag, environment variable, config file, built-in default.
class RunConfig {
 public:
  // Keys must be declared before any layer can set them; load_file rejects
  // unknown keys so typos surface early.
  void declare(const std::string& key, std::string default_value = {});

  void set_flag(const std::string& key, std::string value);
  void load_env(const std::string& prefix = "CGBENCH_");
  void load_file(const std::string& path);

  bool has(const std::string& key) const;
  std::optional<std::string> get(const std::string& key) const;
  std::string get_or(const std::string& key, const std::string& fallback) const;
  long long get_int(const std::string& key, long long fallback) const;
  double get_double(const std::string& key, double fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;

  // {key: {"value": ..., "source": "flag"|"env"|"file"|"default"}} for keys
  // that have a value. Values whose key mentions a credential are omitted.
  nlohmann::json echo() const;

 private:
  struct Entry {
    std::string value;
    int rank = -1;  // 3 flag, 2 env, 1 file, 0 default, -1 unset
  };
  std::map<std::string, Entry> entries_;

  void set_with_rank(const std::string& key, std::string value, int rank);
};

}  // namespace cgbench
