#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dd/tensor.hpp"

namespace dd {

/// Fixed-length bit vector, the user's fingerprint. 30 bits by default,
/// which spans 2^30 distinct values.
struct WatermarkMessage {
  std::vector<std::uint8_t> bits;  // each exactly 0 or 1

  int length() const { return static_cast<int>(bits.size()); }

  /// Hex encoding, most-significant bit first, left-padded to ceil(L/4)
  /// nibbles. Round-trips for arbitrary lengths.
  std::string to_hex() const;
  static WatermarkMessage from_hex(const std::string& hex, int length);

  std::string to_bitstring() const;
  static WatermarkMessage from_bitstring(const std::string& s);

  bool operator==(const WatermarkMessage& other) const { return bits == other.bits; }
};

/// I.i.d. fair bits; the same seed always yields the same message.
WatermarkMessage sample_watermark(int length, std::uint64_t rng_seed);

enum class Split { train, val, test };
const char* split_name(Split s);

/// Disjoint index cover of 0..n-1 in the ratio 0.6/0.2/0.2. Val and test get
/// floor(0.2 n) each; the remainder goes to train. n < 10 is rejected.
/// Membership is a pure function of (n, seed); indices are sorted within
/// each split.
struct SplitIndices {
  std::vector<int> train, val, test;
  const std::vector<int>& of(Split s) const;
};
SplitIndices split_dataset(int n, std::uint64_t seed);

/// Per-identity split-stream derivation: identity 0 is the target set,
/// identity 1 the source set. Shared by every dataset builder so file-based
/// and in-memory corpora split identically.
std::uint64_t derive_split_seed(std::uint64_t base_seed, int which);

/// One identity's preprocessed images, ordered lexicographically by filename.
struct IdentityImages {
  std::string name;
  std::vector<std::string> files;   // basenames, sorted
  std::vector<Tensor> images;       // (3,S,S), clamped to [0,1]
};

/// Two identities plus their per-identity splits.
struct PairedDataset {
  IdentityImages identity_t, identity_s;
  SplitIndices split_t, split_s;
  std::uint64_t seed = 0;
  int image_size = 0;

  const IdentityImages& identity(int which) const { return which == 0 ? identity_t : identity_s; }
  const SplitIndices& split(int which) const { return which == 0 ? split_t : split_s; }
  std::vector<const Tensor*> images_of(int which, Split s) const;

  /// Text manifest, one "filename<TAB>split" line per image, identities in
  /// order, files in lexicographic order.
  std::string split_manifest() const;
  void write_split_manifest(const std::string& path) const;
};

/// Load `<root>/<id>/<image files>` for two identities, resize to
/// image_size x image_size, clamp to [0,1], and split deterministically.
/// Missing directories are fatal; undecodable files are skipped with a
/// warning on stderr; fewer than 10 usable images per identity is fatal.
PairedDataset load_identity_pair(const std::string& root_path, const std::string& id_t_name,
                                 const std::string& id_s_name, int image_size,
                                 std::uint64_t split_seed);

}  // namespace dd
