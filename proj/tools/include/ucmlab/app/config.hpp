#pragma once

#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace ucmlab::app {

// Bad or unknown configuration. Maps to exit status 3.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// INI-style key = value file with [sections]. Every key a command reads is
// recorded with its resolved value; keys never read are reported by finish().
class Config {
 public:
  static Config from_file(const std::string& path);
  static Config from_string(const std::string& text);

  bool has(const std::string& section, const std::string& key) const;

  std::string get_string(const std::string& section, const std::string& key, const std::string& def);
  std::string require_string(const std::string& section, const std::string& key);
  double get_double(const std::string& section, const std::string& key, double def);
  long long get_int(const std::string& section, const std::string& key, long long def);
  bool get_bool(const std::string& section, const std::string& key, bool def);
  // Comma- or space-separated numbers.
  std::vector<double> get_list(const std::string& section, const std::string& key,
                               const std::vector<double>& def);
  // Value must be one of `choices`.
  std::string get_choice(const std::string& section, const std::string& key, const std::string& def,
                         const std::vector<std::string>& choices);

  // Records a value set outside the file (command-line overrides).
  void set(const std::string& section, const std::string& key, const std::string& value);

  // Throws ConfigError naming every key present in the file but never read.
  void finish() const;

  // Resolved configuration, defaults included, in INI form.
  std::string effective() const;

 private:
  std::string raw(const std::string& section, const std::string& key) const;
  void record(const std::string& section, const std::string& key, const std::string& value);

  std::map<std::string, std::map<std::string, std::string>> file_;
  std::set<std::pair<std::string, std::string>> used_;
  std::map<std::string, std::vector<std::pair<std::string, std::string>>> resolved_;
};

}  // namespace ucmlab::app
