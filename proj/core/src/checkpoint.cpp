#include "dd/checkpoint.hpp"

#include <cstring>
#include <fstream>

#include "dd/error.hpp"

namespace dd {
namespace {

constexpr char kMagic[8] = {'D', 'D', 'C', 'K', 'P', 'T', '0', '\n'};

void put_u32(std::ostream& os, std::uint32_t v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(v));
}
void put_i64(std::ostream& os, std::int64_t v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(v));
}
void put_string(std::ostream& os, const std::string& s) {
  put_u32(os, static_cast<std::uint32_t>(s.size()));
  os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::uint32_t get_u32(std::istream& is) {
  std::uint32_t v = 0;
  is.read(reinterpret_cast<char*>(&v), sizeof(v));
  return v;
}
std::int64_t get_i64(std::istream& is) {
  std::int64_t v = 0;
  is.read(reinterpret_cast<char*>(&v), sizeof(v));
  return v;
}
std::string get_string(std::istream& is) {
  std::uint32_t n = get_u32(is);
  std::string s(n, '\0');
  is.read(s.data(), n);
  return s;
}

}  // namespace

void CheckpointWriter::set_meta_int(const std::string& key, std::int64_t value) {
  meta_[key] = std::to_string(value);
}

void CheckpointWriter::write_file(const std::string& path) const {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw RuntimeFailure("cannot open checkpoint for writing: " + path);
  os.write(kMagic, sizeof(kMagic));
  put_u32(os, kCheckpointFormatVersion);
  put_string(os, kind_);
  put_u32(os, static_cast<std::uint32_t>(meta_.size()));
  for (const auto& [k, v] : meta_) {
    put_string(os, k);
    put_string(os, v);
  }
  put_u32(os, static_cast<std::uint32_t>(tensors_.size()));
  for (const auto& [name, t] : tensors_) {
    put_string(os, name);
    put_u32(os, static_cast<std::uint32_t>(t.rank()));
    for (int d = 0; d < t.rank(); ++d) put_i64(os, t.dim(d));
    os.write(reinterpret_cast<const char*>(t.data()),
             static_cast<std::streamsize>(t.numel() * sizeof(real_t)));
  }
  if (!os) throw RuntimeFailure("short write while saving checkpoint: " + path);
}

Checkpoint Checkpoint::read_file(const std::string& path, const std::string& expected_kind) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw RuntimeFailure("cannot open checkpoint: " + path);
  char magic[8];
  is.read(magic, sizeof(magic));
  if (!is || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw RuntimeFailure("not a checkpoint file: " + path);
  const std::uint32_t version = get_u32(is);
  if (version != kCheckpointFormatVersion)
    throw RuntimeFailure("checkpoint format version mismatch for " + path + ": file has v" +
                         std::to_string(version) + ", this build reads v" +
                         std::to_string(kCheckpointFormatVersion));
  Checkpoint c;
  c.kind_ = get_string(is);
  if (!expected_kind.empty() && c.kind_ != expected_kind)
    throw RuntimeFailure("checkpoint kind mismatch for " + path + ": file holds '" + c.kind_ +
                         "', expected '" + expected_kind + "'");
  const std::uint32_t nmeta = get_u32(is);
  for (std::uint32_t i = 0; i < nmeta; ++i) {
    std::string k = get_string(is);
    c.meta_[k] = get_string(is);
  }
  const std::uint32_t ntensors = get_u32(is);
  for (std::uint32_t i = 0; i < ntensors; ++i) {
    std::string name = get_string(is);
    const std::uint32_t rank = get_u32(is);
    std::vector<int> shape(rank);
    for (auto& d : shape) d = static_cast<int>(get_i64(is));
    Tensor t = rank == 0 ? Tensor::scalar(0.0) : Tensor(shape);
    is.read(reinterpret_cast<char*>(t.data()),
            static_cast<std::streamsize>(t.numel() * sizeof(real_t)));
    c.tensors_.emplace(std::move(name), std::move(t));
  }
  if (!is) throw RuntimeFailure("truncated checkpoint: " + path);
  return c;
}

std::string Checkpoint::meta_at(const std::string& key) const {
  auto it = meta_.find(key);
  if (it == meta_.end()) throw RuntimeFailure("checkpoint missing metadata key: " + key);
  return it->second;
}

std::int64_t Checkpoint::meta_int(const std::string& key) const {
  return std::stoll(meta_at(key));
}

const Tensor& Checkpoint::tensor(const std::string& name) const {
  auto it = tensors_.find(name);
  if (it == tensors_.end()) throw RuntimeFailure("checkpoint missing tensor: " + name);
  return it->second;
}

}  // namespace dd
