#pragma once

// Flat `key = value` configuration files.
//
//   # comment
//   labelmap.kind = nested-squares
//   class.0.mean.HH = 1.0
//
// Keys are unique; every lookup is recorded so callers can reject keys that
// nothing consumed (typos) with their line numbers.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace saredge {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class Config {
 public:
  struct Entry {
    std::string value;
    int line = 0;  // 0 for programmatic overrides
  };

  static Config parse(std::istream& in, std::string source = "<config>") {
    Config cfg;
    cfg.source_ = std::move(source);
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
      ++line_no;
      std::string line = raw.substr(0, raw.find('#'));
      line = trim(line);
      if (line.empty()) continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos) {
        throw ConfigError(cfg.where(line_no) + ": expected 'key = value'");
      }
      std::string key = trim(line.substr(0, eq));
      std::string value = trim(line.substr(eq + 1));
      if (key.empty()) throw ConfigError(cfg.where(line_no) + ": empty key");
      auto [it, inserted] = cfg.entries_.emplace(key, Entry{value, line_no});
      if (!inserted) {
        throw ConfigError(cfg.where(line_no) + ": duplicate key '" + key + "' (first set on line " +
                          std::to_string(it->second.line) + ")");
      }
    }
    return cfg;
  }

  static Config parse_string(const std::string& text, std::string source = "<config>") {
    std::istringstream in(text);
    return parse(in, std::move(source));
  }

  static Config load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path.string());
    return parse(in, path.string());
  }

  void set(const std::string& key, std::string value) {
    entries_.insert_or_assign(key, Entry{std::move(value), 0});
  }

  bool has(const std::string& key) const { return entries_.count(key) != 0; }

  std::string get_string(const std::string& key) const { return lookup(key).value; }

  std::string get_string(const std::string& key, const std::string& fallback) const {
    return has(key) ? get_string(key) : fallback;
  }

  double get_double(const std::string& key) const {
    const Entry& e = lookup(key);
    try {
      std::size_t used = 0;
      const double v = std::stod(e.value, &used);
      if (used != e.value.size()) throw std::invalid_argument("trailing characters");
      return v;
    } catch (const std::exception&) {
      throw ConfigError(describe(key, e) + ": expected a number, got '" + e.value + "'");
    }
  }

  double get_double(const std::string& key, double fallback) const {
    return has(key) ? get_double(key) : fallback;
  }

  long long get_int(const std::string& key) const {
    const Entry& e = lookup(key);
    try {
      std::size_t used = 0;
      const long long v = std::stoll(e.value, &used);
      if (used != e.value.size()) throw std::invalid_argument("trailing characters");
      return v;
    } catch (const std::exception&) {
      throw ConfigError(describe(key, e) + ": expected an integer, got '" + e.value + "'");
    }
  }

  long long get_int(const std::string& key, long long fallback) const {
    return has(key) ? get_int(key) : fallback;
  }

  std::uint64_t get_u64(const std::string& key) const {
    const Entry& e = lookup(key);
    try {
      if (!e.value.empty() && e.value[0] == '-') throw std::invalid_argument("negative");
      std::size_t used = 0;
      const unsigned long long v = std::stoull(e.value, &used, 0);
      if (used != e.value.size()) throw std::invalid_argument("trailing characters");
      return v;
    } catch (const std::exception&) {
      throw ConfigError(describe(key, e) + ": expected an unsigned 64-bit integer, got '" + e.value + "'");
    }
  }

  /// Comma-separated list; surrounding whitespace trimmed, empty items dropped.
  std::vector<std::string> get_list(const std::string& key) const {
    std::vector<std::string> out;
    std::stringstream ss(lookup(key).value);
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = trim(item);
      if (!item.empty()) out.push_back(item);
    }
    return out;
  }

  /// Distinct next path components under `prefix.`, e.g. the class ids of "class".
  std::vector<std::string> children(const std::string& prefix) const {
    std::set<std::string> names;
    const std::string p = prefix + ".";
    for (const auto& [key, e] : entries_) {
      if (key.compare(0, p.size(), p) == 0) {
        const std::string rest = key.substr(p.size());
        names.insert(rest.substr(0, rest.find('.')));
      }
    }
    return {names.begin(), names.end()};
  }

  /// Keys never read through any accessor.
  std::vector<std::string> unused_keys() const {
    std::vector<std::string> out;
    for (const auto& [key, e] : entries_) {
      if (!used_.count(key)) out.push_back(key);
    }
    return out;
  }

  void reject_unused() const {
    const auto unused = unused_keys();
    if (unused.empty()) return;
    std::string msg;
    for (const auto& key : unused) {
      if (!msg.empty()) msg += "; ";
      msg += describe(key, entries_.at(key)) + ": unknown key";
    }
    throw ConfigError(msg);
  }

  /// "file:line: key 'k'" for error messages.
  std::string describe(const std::string& key) const {
    auto it = entries_.find(key);
    return it == entries_.end() ? source_ + ": key '" + key + "'" : describe(key, it->second);
  }

  const std::string& source() const { return source_; }

 private:
  const Entry& lookup(const std::string& key) const {
    auto it = entries_.find(key);
    if (it == entries_.end()) throw ConfigError(source_ + ": missing required key '" + key + "'");
    used_.insert(key);
    return it->second;
  }

  std::string where(int line) const { return source_ + ":" + std::to_string(line); }

  std::string describe(const std::string& key, const Entry& e) const {
    return (e.line > 0 ? where(e.line) : source_ + " (override)") + ": key '" + key + "'";
  }

  static std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(first, last - first + 1));
  }

  std::string source_ = "<config>";
  std::map<std::string, Entry> entries_;
  mutable std::set<std::string> used_;
};

}  // namespace saredge
