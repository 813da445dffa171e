#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dd/dataset.hpp"
#include "dd/rng.hpp"
#include "dd/tensor.hpp"

namespace dd {

/// Identity-level appearance of a synthetic face: colors and geometry that
/// stay fixed across a person's images. Two handmade presets (0 and 1) are
/// visually distinct; higher ids are sampled around the presets.
struct FaceStyle {
  real_t skin[3], hair[3], iris[3], mouth[3], bg_a[3], bg_b[3];
  real_t face_ax, face_ay;     // face ellipse half-axes (normalized units)
  real_t hair_coverage;        // how far the hair cap reaches down
  real_t eye_dx, eye_y, eye_r; // eye spacing, height, radius
  real_t brow_h;               // brow thickness
  real_t mouth_y, mouth_w, mouth_h;
  real_t nose_len;
  bool glasses;

  static FaceStyle preset(int identity, std::uint64_t seed);
};

/// Per-image latent state: pose, expression, lighting, background phase.
struct FaceState {
  real_t dx, dy, scale;
  real_t mouth_curve, mouth_open;
  real_t eye_open, gaze;
  real_t brightness;
  real_t bg_phase;
  real_t noise_amp, noise_fx, noise_fy, noise_ph;
};

FaceState sample_face_state(Rng& rng);

/// Render one face at size x size. Output is quantized to 8-bit levels so a
/// rendered tensor equals its PNG round-trip exactly.
Tensor render_face(const FaceStyle& style, const FaceState& state, int size);

/// In-memory corpus for one identity; image k uses a state stream derived
/// from (seed, identity, k), so subsets are stable under count changes.
std::vector<Tensor> render_identity_images(int identity, int count, int size,
                                           std::uint64_t seed);

/// Write `<out_dir>/<id_name>/img_####.png` for each identity ("id_a",
/// "id_b", ...). Returns the identity directory names.
std::vector<std::string> generate_corpus(const std::string& out_dir, int identities,
                                         int per_identity, int size, std::uint64_t seed);

/// Equivalent of generate_corpus + load_identity_pair for identities 0 and 1,
/// without touching the filesystem. Pixel data matches the file path bitwise.
PairedDataset synthetic_paired_dataset(int per_identity, int size, std::uint64_t corpus_seed,
                                       std::uint64_t split_seed);

}  // namespace dd
