#include "dd/dataset.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "dd/error.hpp"
#include "dd/image.hpp"
#include "dd/rng.hpp"

namespace fs = std::filesystem;

namespace dd {

std::string WatermarkMessage::to_hex() const {
  // Bit 0 is the most significant bit; pad on the left to whole nibbles.
  const int nibbles = (length() + 3) / 4;
  std::vector<int> vals(static_cast<std::size_t>(nibbles), 0);
  int pos = nibbles * 4 - length();
  for (int i = 0; i < length(); ++i, ++pos)
    if (bits[static_cast<std::size_t>(i)])
      vals[static_cast<std::size_t>(pos / 4)] |= 1 << (3 - pos % 4);
  static const char* digits = "0123456789abcdef";
  std::string out(static_cast<std::size_t>(nibbles), '0');
  for (int i = 0; i < nibbles; ++i)
    out[static_cast<std::size_t>(i)] = digits[vals[static_cast<std::size_t>(i)]];
  return out;
}

WatermarkMessage WatermarkMessage::from_hex(const std::string& hex, int length) {
  if (length <= 0) throw ConfigError("watermark length must be positive");
  const int nibbles = (length + 3) / 4;
  if (static_cast<int>(hex.size()) != nibbles)
    throw ConfigError("watermark hex string must have " + std::to_string(nibbles) +
                      " digits for length " + std::to_string(length) + ", got " +
                      std::to_string(hex.size()));
  auto nibble = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    throw ConfigError(std::string("invalid hex digit: ") + c);
  };
  WatermarkMessage m;
  m.bits.resize(static_cast<std::size_t>(length));
  int pos = nibbles * 4 - length;
  for (int i = 0; i < pos; ++i)
    if ((nibble(hex[static_cast<std::size_t>(i / 4)]) >> (3 - i % 4)) & 1)
      throw ConfigError("watermark hex has set bits beyond length " + std::to_string(length));
  for (int i = 0; i < length; ++i, ++pos)
    m.bits[static_cast<std::size_t>(i)] =
        static_cast<std::uint8_t>((nibble(hex[static_cast<std::size_t>(pos / 4)]) >> (3 - pos % 4)) & 1);
  return m;
}

std::string WatermarkMessage::to_bitstring() const {
  std::string s;
  s.reserve(bits.size());
  for (auto b : bits) s.push_back(b ? '1' : '0');
  return s;
}

WatermarkMessage WatermarkMessage::from_bitstring(const std::string& s) {
  if (s.empty()) throw ConfigError("watermark bit string must be nonempty");
  WatermarkMessage m;
  m.bits.reserve(s.size());
  for (char c : s) {
    if (c != '0' && c != '1') throw ConfigError(std::string("invalid watermark bit: ") + c);
    m.bits.push_back(static_cast<std::uint8_t>(c == '1'));
  }
  return m;
}

WatermarkMessage sample_watermark(int length, std::uint64_t rng_seed) {
  if (length <= 0) throw ConfigError("sample_watermark: length must be >= 1");
  Rng rng(rng_seed);
  WatermarkMessage m;
  m.bits.resize(static_cast<std::size_t>(length));
  for (auto& b : m.bits) b = static_cast<std::uint8_t>(rng.bit());
  return m;
}

const char* split_name(Split s) {
  switch (s) {
    case Split::train: return "train";
    case Split::val: return "val";
    default: return "test";
  }
}

const std::vector<int>& SplitIndices::of(Split s) const {
  switch (s) {
    case Split::train: return train;
    case Split::val: return val;
    default: return test;
  }
}

std::uint64_t derive_split_seed(std::uint64_t base_seed, int which) {
  return base_seed ^ (which == 0 ? 0x7461726765740000ULL : 0x736f757263650000ULL);
}

SplitIndices split_dataset(int n, std::uint64_t seed) {
  if (n < 10) throw ConfigError("split_dataset: need at least 10 images, got " + std::to_string(n));
  const int n_val = n / 5;   // floor(0.2 n)
  const int n_test = n / 5;  // floor(0.2 n)
  const int n_train = n - n_val - n_test;
  std::vector<int> order(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  Rng rng(seed);
  rng.shuffle(order);
  SplitIndices out;
  out.train.assign(order.begin(), order.begin() + n_train);
  out.val.assign(order.begin() + n_train, order.begin() + n_train + n_val);
  out.test.assign(order.begin() + n_train + n_val, order.end());
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.val.begin(), out.val.end());
  std::sort(out.test.begin(), out.test.end());
  return out;
}

std::vector<const Tensor*> PairedDataset::images_of(int which, Split s) const {
  const IdentityImages& id = identity(which);
  std::vector<const Tensor*> out;
  for (int i : split(which).of(s)) out.push_back(&id.images[static_cast<std::size_t>(i)]);
  return out;
}

namespace {

Split split_of_index(const SplitIndices& s, int i) {
  if (std::binary_search(s.train.begin(), s.train.end(), i)) return Split::train;
  if (std::binary_search(s.val.begin(), s.val.end(), i)) return Split::val;
  return Split::test;
}

IdentityImages load_identity(const std::string& root, const std::string& name, int image_size) {
  const fs::path dir = fs::path(root) / name;
  if (!fs::is_directory(dir))
    throw ConfigError("identity directory not found: " + dir.string());
  IdentityImages id;
  id.name = name;
  std::vector<std::string> files;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file()) files.push_back(entry.path().filename().string());
  std::sort(files.begin(), files.end());  // lexicographic, locale independent
  for (const auto& f : files) {
    auto img = try_load_image_file((dir / f).string());
    if (!img) {
      std::cerr << "warning: skipping undecodable file " << (dir / f).string() << "\n";
      continue;
    }
    Tensor t = *img;
    if (t.dim(1) != image_size || t.dim(2) != image_size)
      t = resize_bilinear(t, image_size, image_size);
    clamp01_inplace(t);
    id.files.push_back(f);
    id.images.push_back(std::move(t));
  }
  if (static_cast<int>(id.images.size()) < 10)
    throw ConfigError("identity '" + name + "' has only " + std::to_string(id.images.size()) +
                      " usable images; at least 10 are needed to split");
  return id;
}

}  // namespace

std::string PairedDataset::split_manifest() const {
  std::string out;
  for (int which = 0; which < 2; ++which) {
    const IdentityImages& id = identity(which);
    const SplitIndices& s = split(which);
    for (std::size_t i = 0; i < id.files.size(); ++i) {
      out += id.name;
      out += '/';
      out += id.files[i];
      out += '\t';
      out += split_name(split_of_index(s, static_cast<int>(i)));
      out += '\n';
    }
  }
  return out;
}

void PairedDataset::write_split_manifest(const std::string& path) const {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw RuntimeFailure("cannot write split manifest: " + path);
  os << split_manifest();
}

PairedDataset load_identity_pair(const std::string& root_path, const std::string& id_t_name,
                                 const std::string& id_s_name, int image_size,
                                 std::uint64_t split_seed) {
  if (image_size < 8 || image_size % 4 != 0)
    throw ConfigError("image_size must be a positive multiple of 4, got " +
                      std::to_string(image_size));
  PairedDataset ds;
  ds.identity_t = load_identity(root_path, id_t_name, image_size);
  ds.identity_s = load_identity(root_path, id_s_name, image_size);
  ds.seed = split_seed;
  ds.image_size = image_size;
  // Decorrelated per-identity streams so each identity splits independently.
  ds.split_t = split_dataset(static_cast<int>(ds.identity_t.images.size()),
                             derive_split_seed(split_seed, 0));
  ds.split_s = split_dataset(static_cast<int>(ds.identity_s.images.size()),
                             derive_split_seed(split_seed, 1));
  return ds;
}

}  // namespace dd
