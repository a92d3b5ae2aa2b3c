#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace platoon {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Flat key-value configuration with [section] headers, `#` comments, and
/// repeatable keys. Numbers and comma-separated lists are parsed on demand;
/// every parse error carries file and line.
class ConfigFile {
 public:
  struct Entry {
    std::string section;
    std::string key;
    std::string value;
    int line = 0;
  };

  static ConfigFile parse_file(const std::string& path);
  static ConfigFile parse_text(const std::string& text, const std::string& name = "<config>");

  bool has(const std::string& section, const std::string& key) const;
  std::optional<std::string> get(const std::string& section, const std::string& key) const;
  std::vector<const Entry*> get_all(const std::string& section, const std::string& key) const;

  double get_double(const std::string& section, const std::string& key, double fallback) const;
  double require_double(const std::string& section, const std::string& key) const;
  long long get_int(const std::string& section, const std::string& key, long long fallback) const;
  std::string get_string(const std::string& section, const std::string& key,
                         const std::string& fallback) const;
  std::vector<double> get_list(const std::string& section, const std::string& key) const;

  /// Parses "a, b, c" into numbers; context names the entry in errors.
  static std::vector<double> parse_number_list(const std::string& text,
                                               const std::string& context);

  const std::vector<Entry>& entries() const { return entries_; }
  const std::string& name() const { return name_; }

  /// Applies a `section.key=value` override (CLI flags funnel through this).
  void set(const std::string& section, const std::string& key, const std::string& value);

 private:
  std::string name_;
  std::vector<Entry> entries_;
};

}  // namespace platoon
