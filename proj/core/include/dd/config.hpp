#pragma once

#include <cstdint>
#include <map>
#include <string>

namespace dd {

/// Flat key = value configuration file. Lines starting with '#' and blank
/// lines are ignored; keys are trimmed, values keep interior spaces.
class Config {
 public:
  Config() = default;
  static Config from_file(const std::string& path);
  static Config from_string(const std::string& text);

  bool has(const std::string& key) const { return entries_.count(key) != 0; }
  void set(const std::string& key, const std::string& value) { entries_[key] = value; }

  std::string get(const std::string& key, const std::string& fallback) const;
  std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
  double get_real(const std::string& key, double fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;

  /// Throws ConfigError naming the key when absent.
  std::string require(const std::string& key) const;
  std::int64_t require_int(const std::string& key) const;
  double require_real(const std::string& key) const;

  const std::map<std::string, std::string>& entries() const { return entries_; }

  /// Sorted "key = value" dump; used for report headers and hashing.
  std::string canonical() const;
  /// FNV-1a 64 of canonical(), hex encoded.
  std::string hash_hex() const;

 private:
  std::map<std::string, std::string> entries_;
};

}  // namespace dd
