#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "dd/tensor.hpp"

namespace dd {

/// Binary bundle of named tensors plus string metadata. The format carries a
/// magic tag, a format version, and a `kind` string; readers refuse files
/// whose version or kind does not match and say which versions were involved.
inline constexpr std::uint32_t kCheckpointFormatVersion = 1;

class CheckpointWriter {
 public:
  explicit CheckpointWriter(std::string kind) : kind_(std::move(kind)) {}

  void set_meta(const std::string& key, const std::string& value) { meta_[key] = value; }
  void set_meta_int(const std::string& key, std::int64_t value);
  void add(const std::string& name, const Tensor& t) { tensors_.emplace_back(name, t); }

  /// Writes deterministically: metadata sorted by key, tensors in insertion
  /// order, no timestamps.
  void write_file(const std::string& path) const;

 private:
  std::string kind_;
  std::map<std::string, std::string> meta_;
  std::vector<std::pair<std::string, Tensor>> tensors_;
};

class Checkpoint {
 public:
  static Checkpoint read_file(const std::string& path, const std::string& expected_kind);

  const std::string& kind() const { return kind_; }
  const std::map<std::string, std::string>& meta() const { return meta_; }
  std::string meta_at(const std::string& key) const;
  std::int64_t meta_int(const std::string& key) const;
  bool has_tensor(const std::string& name) const { return tensors_.count(name) != 0; }
  const Tensor& tensor(const std::string& name) const;

 private:
  std::string kind_;
  std::map<std::string, std::string> meta_;
  std::map<std::string, Tensor> tensors_;
};

}  // namespace dd
