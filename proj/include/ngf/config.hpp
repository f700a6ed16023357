#pragma once

#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "ngf/io.hpp"
#include "ngf/types.hpp"

namespace ngf {

/// Flat key=value configuration with a registered schema: every key has a
/// default and a one-line description, unknown keys are rejected, and the
/// registry drives --help. File syntax: "key = value" lines, '#' comments.
class Config {
 public:
  Config& define(const std::string& key, const std::string& default_value,
                 const std::string& description) {
    if (entries_.count(key)) throw std::logic_error("config key redefined: " + key);
    entries_[key] = Entry{default_value, default_value, description};
    order_.push_back(key);
    return *this;
  }

  void set(const std::string& key, const std::string& value) {
    auto it = entries_.find(key);
    if (it == entries_.end()) throw ConfigError("unknown config key: " + key);
    it->second.value = value;
  }

  void load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::string line;
    Index line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      const std::size_t hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      const std::string trimmed = trim(line);
      if (trimmed.empty()) continue;
      const std::size_t eq = trimmed.find('=');
      if (eq == std::string::npos) {
        throw ConfigError(path + ":" + std::to_string(line_no) + ": expected 'key = value'");
      }
      try {
        set(trim(trimmed.substr(0, eq)), trim(trimmed.substr(eq + 1)));
      } catch (const ConfigError& e) {
        throw ConfigError(path + ":" + std::to_string(line_no) + ": " + e.what());
      }
    }
  }

  /// "key=value" command-line override.
  void apply_override(const std::string& assignment) {
    const std::size_t eq = assignment.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("override must look like key=value: " + assignment);
    }
    set(trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
  }

  std::string get_string(const std::string& key) const { return entry(key).value; }

  long long get_int(const std::string& key) const {
    const std::string v = entry(key).value;
    try {
      std::size_t pos = 0;
      const long long x = std::stoll(v, &pos);
      if (pos != v.size()) throw std::invalid_argument(v);
      return x;
    } catch (const std::exception&) {
      throw ConfigError("config key " + key + ": not an integer: '" + v + "'");
    }
  }

  double get_double(const std::string& key) const {
    try {
      return parse_double(entry(key).value);
    } catch (const ParseError&) {
      throw ConfigError("config key " + key + ": not a number: '" + entry(key).value + "'");
    }
  }

  bool get_bool(const std::string& key) const {
    const std::string v = entry(key).value;
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ConfigError("config key " + key + ": not a boolean: '" + v + "'");
  }

  std::vector<long long> get_int_list(const std::string& key) const {
    std::vector<long long> out;
    for (const std::string& f : split_list(entry(key).value)) {
      try {
        out.push_back(std::stoll(f));
      } catch (const std::exception&) {
        throw ConfigError("config key " + key + ": not an integer list element: '" + f + "'");
      }
    }
    if (out.empty()) throw ConfigError("config key " + key + ": empty list");
    return out;
  }

  std::vector<double> get_double_list(const std::string& key) const {
    std::vector<double> out;
    for (const std::string& f : split_list(entry(key).value)) {
      try {
        out.push_back(parse_double(f));
      } catch (const ParseError&) {
        throw ConfigError("config key " + key + ": not a number list element: '" + f + "'");
      }
    }
    if (out.empty()) throw ConfigError("config key " + key + ": empty list");
    return out;
  }

  std::vector<std::string> get_string_list(const std::string& key) const {
    auto out = split_list(entry(key).value);
    if (out.empty()) throw ConfigError("config key " + key + ": empty list");
    return out;
  }

  /// One "key = default  # description" line per key, for --help.
  std::string describe() const {
    std::ostringstream out;
    for (const std::string& key : order_) {
      const Entry& e = entries_.at(key);
      out << "  " << key << " = " << e.default_value << "\n      " << e.description << "\n";
    }
    return out.str();
  }

  const std::vector<std::string>& keys() const { return order_; }

 private:
  struct Entry {
    std::string default_value;
    std::string value;
    std::string description;
  };

  const Entry& entry(const std::string& key) const {
    auto it = entries_.find(key);
    if (it == entries_.end()) throw ConfigError("unknown config key: " + key);
    return it->second;
  }

  static std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
  }

  static std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string field;
    while (std::getline(ss, field, ',')) {
      const std::string t = trim(field);
      if (!t.empty()) out.push_back(t);
    }
    return out;
  }

  std::map<std::string, Entry> entries_;
  std::vector<std::string> order_;
};

}  // namespace ngf
