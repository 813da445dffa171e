#include "dd/synth_faces.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>

#include "dd/error.hpp"
#include "dd/image.hpp"
#include "dd/rng.hpp"

namespace fs = std::filesystem;

namespace dd {
namespace {

constexpr real_t kPi = 3.14159265358979323846;

real_t smoothstep(real_t e0, real_t e1, real_t x) {
  real_t t = (x - e0) / (e1 - e0);
  t = t < 0.0 ? 0.0 : (t > 1.0 ? 1.0 : t);
  return t * t * (3.0 - 2.0 * t);
}

// Soft inside-mask of an ellipse; edge is the transition width.
real_t ellipse_mask(real_t u, real_t v, real_t cx, real_t cy, real_t ax, real_t ay, real_t edge) {
  real_t du = (u - cx) / ax, dv = (v - cy) / ay;
  real_t d = std::sqrt(du * du + dv * dv);
  return 1.0 - smoothstep(1.0 - edge, 1.0 + edge, d);
}

void mix(real_t* dst, const real_t* color, real_t alpha) {
  for (int c = 0; c < 3; ++c) dst[c] = dst[c] * (1.0 - alpha) + color[c] * alpha;
}

void set3(real_t* dst, real_t r, real_t g, real_t b) {
  dst[0] = r;
  dst[1] = g;
  dst[2] = b;
}

}  // namespace

FaceStyle FaceStyle::preset(int identity, std::uint64_t seed) {
  FaceStyle s{};
  if (identity == 0) {
    set3(s.skin, 0.86, 0.70, 0.57);
    set3(s.hair, 0.22, 0.13, 0.09);
    set3(s.iris, 0.42, 0.26, 0.12);
    set3(s.mouth, 0.64, 0.26, 0.26);
    set3(s.bg_a, 0.55, 0.62, 0.72);
    set3(s.bg_b, 0.38, 0.45, 0.58);
    s.face_ax = 0.60; s.face_ay = 0.78;
    s.hair_coverage = -0.28;
    s.eye_dx = 0.26; s.eye_y = -0.16; s.eye_r = 0.105;
    s.brow_h = 0.045;
    s.mouth_y = 0.42; s.mouth_w = 0.26; s.mouth_h = 0.055;
    s.nose_len = 0.18;
    s.glasses = false;
  } else if (identity == 1) {
    set3(s.skin, 0.95, 0.81, 0.76);
    set3(s.hair, 0.84, 0.68, 0.34);
    set3(s.iris, 0.18, 0.46, 0.52);
    set3(s.mouth, 0.76, 0.38, 0.42);
    set3(s.bg_a, 0.72, 0.66, 0.55);
    set3(s.bg_b, 0.60, 0.52, 0.42);
    s.face_ax = 0.68; s.face_ay = 0.72;
    s.hair_coverage = -0.46;
    s.eye_dx = 0.30; s.eye_y = -0.20; s.eye_r = 0.12;
    s.brow_h = 0.03;
    s.mouth_y = 0.40; s.mouth_w = 0.22; s.mouth_h = 0.05;
    s.nose_len = 0.14;
    s.glasses = true;
  } else {
    // Derived identity: start from a preset and perturb every knob.
    FaceStyle base = preset(identity % 2, seed);
    Rng rng(seed ^ (0xabcdef12345ULL * static_cast<std::uint64_t>(identity)));
    s = base;
    for (int c = 0; c < 3; ++c) {
      s.skin[c] = std::clamp(base.skin[c] + rng.uniform(-0.12, 0.12), 0.3, 1.0);
      s.hair[c] = std::clamp(base.hair[c] + rng.uniform(-0.25, 0.25), 0.05, 0.95);
      s.iris[c] = std::clamp(base.iris[c] + rng.uniform(-0.2, 0.2), 0.05, 0.9);
      s.mouth[c] = std::clamp(base.mouth[c] + rng.uniform(-0.1, 0.1), 0.2, 0.9);
      s.bg_a[c] = std::clamp(base.bg_a[c] + rng.uniform(-0.15, 0.15), 0.1, 0.9);
      s.bg_b[c] = std::clamp(base.bg_b[c] + rng.uniform(-0.15, 0.15), 0.1, 0.9);
    }
    s.face_ax = std::clamp(base.face_ax + rng.uniform(-0.06, 0.06), 0.5, 0.75);
    s.face_ay = std::clamp(base.face_ay + rng.uniform(-0.06, 0.06), 0.6, 0.85);
    s.hair_coverage = std::clamp(base.hair_coverage + rng.uniform(-0.1, 0.1), -0.55, -0.2);
    s.eye_dx = std::clamp(base.eye_dx + rng.uniform(-0.04, 0.04), 0.2, 0.34);
    s.eye_r = std::clamp(base.eye_r + rng.uniform(-0.02, 0.02), 0.08, 0.14);
    s.glasses = rng.bernoulli(0.5);
  }
  return s;
}

FaceState sample_face_state(Rng& rng) {
  FaceState st{};
  st.dx = rng.uniform(-0.07, 0.07);
  st.dy = rng.uniform(-0.07, 0.07);
  st.scale = rng.uniform(0.90, 1.10);
  st.mouth_curve = rng.uniform(-0.35, 0.35);
  st.mouth_open = rng.uniform(0.7, 1.5);
  st.eye_open = rng.uniform(0.55, 1.1);
  st.gaze = rng.uniform(-0.35, 0.35);
  st.brightness = rng.uniform(0.88, 1.10);
  st.bg_phase = rng.uniform(0.0, 1.0);
  st.noise_amp = rng.uniform(0.004, 0.012);
  st.noise_fx = rng.uniform(2.0, 7.0);
  st.noise_fy = rng.uniform(2.0, 7.0);
  st.noise_ph = rng.uniform(0.0, 2.0 * kPi);
  return st;
}

Tensor render_face(const FaceStyle& sty, const FaceState& st, int size) {
  Tensor img({3, size, size});
  const real_t edge = 3.0 / size;
  const real_t white[3] = {0.93, 0.93, 0.93};
  const real_t pupil[3] = {0.05, 0.05, 0.05};
  const real_t glass[3] = {0.12, 0.12, 0.14};
  real_t nose_col[3], shade_col[3];
  for (int c = 0; c < 3; ++c) {
    nose_col[c] = sty.skin[c] * 0.82;
    shade_col[c] = sty.skin[c] * 0.9;
  }

  const std::size_t plane = static_cast<std::size_t>(size) * size;
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      // Normalized coordinates with pose transform.
      real_t u = ((x + 0.5) / size * 2.0 - 1.0 - st.dx) / st.scale;
      real_t v = ((y + 0.5) / size * 2.0 - 1.0 - st.dy) / st.scale;
      real_t px[3];

      // Background: diagonal gradient with a per-image phase.
      real_t t = 0.5 + 0.5 * std::sin((u + v) * 1.3 + st.bg_phase * 2.0 * kPi);
      for (int c = 0; c < 3; ++c) px[c] = sty.bg_a[c] * t + sty.bg_b[c] * (1.0 - t);

      // Face.
      real_t face = ellipse_mask(u, v, 0.0, 0.05, sty.face_ax, sty.face_ay, edge);
      mix(px, sty.skin, face);
      // Cheek shading keeps the face from being flat.
      real_t cheek = ellipse_mask(u, v, 0.0, 0.30, sty.face_ax * 0.8, 0.35, 3 * edge);
      mix(px, shade_col, 0.35 * cheek * face);

      // Hair cap: upper part of a slightly larger ellipse.
      real_t hair_zone = ellipse_mask(u, v, 0.0, -0.02, sty.face_ax * 1.18, sty.face_ay * 1.12, edge);
      real_t cap = smoothstep(sty.hair_coverage + 0.03, sty.hair_coverage - 0.03, v);
      mix(px, sty.hair, hair_zone * cap);

      // Eyes.
      for (int side = -1; side <= 1; side += 2) {
        real_t ex = side * sty.eye_dx;
        real_t er = sty.eye_r;
        real_t eo = st.eye_open;
        real_t sclera = ellipse_mask(u, v, ex, sty.eye_y, er * 1.45, er * eo, edge) * face;
        mix(px, white, sclera);
        real_t iris = ellipse_mask(u, v, ex + st.gaze * er * 0.5, sty.eye_y, er * 0.62,
                                   er * 0.62 * std::min<real_t>(1.0, eo * 1.4), edge) * sclera;
        mix(px, sty.iris, iris);
        real_t pup = ellipse_mask(u, v, ex + st.gaze * er * 0.5, sty.eye_y, er * 0.26,
                                  er * 0.26, edge) * sclera;
        mix(px, pupil, pup);
        // Brow.
        real_t brow = ellipse_mask(u, v, ex, sty.eye_y - 1.9 * er, er * 1.5, sty.brow_h, edge) * face;
        mix(px, sty.hair, 0.85 * brow);
        if (sty.glasses) {
          real_t ring = ellipse_mask(u, v, ex, sty.eye_y, er * 1.85, er * 1.6, edge) -
                        ellipse_mask(u, v, ex, sty.eye_y, er * 1.55, er * 1.3, edge);
          ring = std::max<real_t>(0.0, ring) * face;
          mix(px, glass, ring);
        }
      }
      if (sty.glasses) {
        // Bridge between the lenses.
        real_t bridge = (std::fabs(v - sty.eye_y) < 0.02 ? 1.0 : 0.0) *
                        smoothstep(sty.eye_dx * 0.55, sty.eye_dx * 0.45, std::fabs(u));
        mix(px, glass, bridge * face);
      }

      // Nose: narrow vertical wedge ending above the mouth.
      real_t nose = ellipse_mask(u, v, 0.0, sty.mouth_y - sty.nose_len - 0.12, 0.045,
                                 sty.nose_len, edge) * face;
      mix(px, nose_col, 0.8 * nose);

      // Mouth: curved band, curvature bends the center line.
      real_t mu = u / sty.mouth_w;
      if (std::fabs(mu) < 1.6) {
        real_t center = sty.mouth_y + st.mouth_curve * 0.12 * (mu * mu - 0.5);
        real_t half_h = sty.mouth_h * st.mouth_open * std::max<real_t>(0.0, 1.0 - mu * mu * 0.55);
        real_t band = (half_h > 0)
                          ? (1.0 - smoothstep(half_h - edge, half_h + edge, std::fabs(v - center)))
                          : 0.0;
        band *= 1.0 - smoothstep(0.9, 1.1, std::fabs(mu));
        mix(px, sty.mouth, band * face);
      }

      // Lighting and a faint smooth texture field.
      real_t noise = st.noise_amp * std::sin(st.noise_fx * u * kPi + st.noise_ph) *
                     std::cos(st.noise_fy * v * kPi - st.noise_ph);
      for (int c = 0; c < 3; ++c) {
        real_t val = px[c] * st.brightness + noise;
        val = val < 0.0 ? 0.0 : (val > 1.0 ? 1.0 : val);
        // Quantize to the 8-bit grid so the PNG round-trip is exact.
        img[static_cast<std::size_t>(c) * plane + static_cast<std::size_t>(y) * size + x] =
            std::round(val * 255.0) / 255.0;
      }
    }
  }
  return img;
}

std::vector<Tensor> render_identity_images(int identity, int count, int size,
                                           std::uint64_t seed) {
  const FaceStyle style = FaceStyle::preset(identity, seed);
  Rng base(seed);
  Rng id_stream = base.split(static_cast<std::uint64_t>(identity) + 101);
  std::vector<Tensor> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) {
    Rng img_rng = id_stream.split(static_cast<std::uint64_t>(k));
    out.push_back(render_face(style, sample_face_state(img_rng), size));
  }
  return out;
}

std::vector<std::string> generate_corpus(const std::string& out_dir, int identities,
                                         int per_identity, int size, std::uint64_t seed) {
  if (identities < 1) throw ConfigError("generate_corpus: need at least one identity");
  if (per_identity < 1) throw ConfigError("generate_corpus: per_identity must be positive");
  std::vector<std::string> names;
  for (int id = 0; id < identities; ++id) {
    std::string name = "id_";
    name.push_back(static_cast<char>('a' + id));
    const fs::path dir = fs::path(out_dir) / name;
    fs::create_directories(dir);
    auto images = render_identity_images(id, per_identity, size, seed);
    for (int k = 0; k < per_identity; ++k) {
      char fname[32];
      std::snprintf(fname, sizeof(fname), "img_%04d.png", k);
      save_png((dir / fname).string(), images[static_cast<std::size_t>(k)]);
    }
    names.push_back(name);
  }
  return names;
}

PairedDataset synthetic_paired_dataset(int per_identity, int size, std::uint64_t corpus_seed,
                                       std::uint64_t split_seed) {
  PairedDataset ds;
  ds.image_size = size;
  ds.seed = split_seed;
  for (int which = 0; which < 2; ++which) {
    IdentityImages id;
    id.name = which == 0 ? "id_a" : "id_b";
    id.images = render_identity_images(which, per_identity, size, corpus_seed);
    for (int k = 0; k < per_identity; ++k) {
      char fname[32];
      std::snprintf(fname, sizeof(fname), "img_%04d.png", k);
      id.files.emplace_back(fname);
    }
    if (which == 0) ds.identity_t = std::move(id);
    else ds.identity_s = std::move(id);
  }
  ds.split_t = split_dataset(per_identity, derive_split_seed(split_seed, 0));
  ds.split_s = split_dataset(per_identity, derive_split_seed(split_seed, 1));
  return ds;
}

}  // namespace dd
