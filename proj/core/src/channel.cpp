#include "dd/channel.hpp"

#include <cmath>

#include "dd/error.hpp"
#include "dd/image.hpp"
#include "dd/jpeg_sim.hpp"
#include "dd/rng.hpp"

namespace dd {
namespace {

Tensor gaussian_noise(const Tensor& img, real_t variance, Rng rng) {
  const real_t stddev = std::sqrt(variance);
  Tensor out = img;
  for (std::size_t i = 0; i < out.numel(); ++i) out[i] += rng.normal(0.0, stddev);
  clamp01_inplace(out);
  return out;
}

Tensor salt_pepper(const Tensor& img, real_t amount, Rng rng) {
  if (img.rank() != 3) throw ConfigError("salt_pepper: expects (C,H,W)");
  Tensor out = img;
  const int c = img.dim(0);
  const std::size_t plane = static_cast<std::size_t>(img.dim(1)) * img.dim(2);
  // Selection is per pixel; a hit drives all channels to 0 or 1.
  for (std::size_t k = 0; k < plane; ++k) {
    if (!rng.bernoulli(amount)) continue;
    const real_t v = rng.bit() ? 1.0 : 0.0;
    for (int ch = 0; ch < c; ++ch) out[static_cast<std::size_t>(ch) * plane + k] = v;
  }
  return out;
}

Tensor rescale_restore(const Tensor& img, real_t scale) {
  if (scale <= 0.0) throw ConfigError("resize channel: scale must be positive");
  const int h = img.dim(1), w = img.dim(2);
  const int sh = std::max(1, static_cast<int>(std::lround(h * scale)));
  const int sw = std::max(1, static_cast<int>(std::lround(w * scale)));
  Tensor scaled = resize_bilinear(img, sh, sw);
  Tensor out = resize_bilinear(scaled, h, w);
  clamp01_inplace(out);
  return out;
}

bool near(real_t a, real_t b) { return std::fabs(a - b) < 1e-9; }

}  // namespace

const char* channel_kind_name(ChannelKind k) {
  switch (k) {
    case ChannelKind::identity: return "identity";
    case ChannelKind::jpeg: return "jpeg";
    case ChannelKind::gaussian_noise: return "gaussian_noise";
    case ChannelKind::resize: return "resize";
    default: return "salt_pepper";
  }
}

ChannelKind parse_channel_kind(const std::string& name) {
  if (name == "identity") return ChannelKind::identity;
  if (name == "jpeg") return ChannelKind::jpeg;
  if (name == "gaussian_noise") return ChannelKind::gaussian_noise;
  if (name == "resize") return ChannelKind::resize;
  if (name == "salt_pepper") return ChannelKind::salt_pepper;
  throw ConfigError("unknown channel kind: " + name);
}

bool ChannelSpec::on_default_grid() const {
  switch (kind) {
    case ChannelKind::identity:
      return true;
    case ChannelKind::jpeg:
      return near(parameter, 30) || near(parameter, 50) || near(parameter, 70) ||
             near(parameter, 90);
    case ChannelKind::gaussian_noise:
      return near(parameter, 0.001) || near(parameter, 0.002) || near(parameter, 0.003) ||
             near(parameter, 0.004);
    case ChannelKind::resize:
      return near(parameter, 0.5) || near(parameter, 0.75) || near(parameter, 1.25) ||
             near(parameter, 1.5) || near(parameter, 1.75);
    default:
      return near(parameter, 0.001) || near(parameter, 0.002) || near(parameter, 0.003) ||
             near(parameter, 0.004);
  }
}

std::string ChannelSpec::label() const {
  if (kind == ChannelKind::identity) return "identity";
  char buf[64];
  if (kind == ChannelKind::jpeg) {
    std::snprintf(buf, sizeof(buf), "jpeg(%d)", static_cast<int>(std::lround(parameter)));
  } else if (kind == ChannelKind::resize) {
    const char* frac = near(parameter, 0.5)    ? "1/2"
                       : near(parameter, 0.75) ? "3/4"
                       : near(parameter, 1.25) ? "5/4"
                       : near(parameter, 1.5)  ? "3/2"
                       : near(parameter, 1.75) ? "7/4"
                                               : nullptr;
    if (frac) std::snprintf(buf, sizeof(buf), "resize(%s)", frac);
    else std::snprintf(buf, sizeof(buf), "resize(%g)", parameter);
  } else {
    std::snprintf(buf, sizeof(buf), "%s(%g)", channel_kind_name(kind), parameter);
  }
  return buf;
}

Tensor apply_channel(const Tensor& img, const ChannelSpec& spec, int image_index) {
  if (img.rank() != 3 || img.dim(0) != 3) throw ConfigError("apply_channel: expects (3,H,W)");
  switch (spec.kind) {
    case ChannelKind::identity:
      return img;
    case ChannelKind::jpeg:
      return jpeg_roundtrip(img, static_cast<int>(std::lround(spec.parameter)));
    case ChannelKind::gaussian_noise:
      return gaussian_noise(img, spec.parameter,
                            Rng(spec.rng_seed).split(static_cast<std::uint64_t>(image_index)));
    case ChannelKind::resize:
      return rescale_restore(img, spec.parameter);
    case ChannelKind::salt_pepper:
      return salt_pepper(img, spec.parameter,
                         Rng(spec.rng_seed).split(static_cast<std::uint64_t>(image_index)));
  }
  throw ConfigError("apply_channel: unsupported channel kind");
}

std::vector<ChannelSpec> default_channel_grid(std::uint64_t seed_base) {
  std::vector<ChannelSpec> grid;
  const real_t jpeg_q[] = {30, 50, 70, 90};
  const real_t noise_var[] = {0.001, 0.002, 0.003, 0.004};
  const real_t scales[] = {0.75, 1.25, 1.5, 1.75};
  const real_t amounts[] = {0.001, 0.002, 0.003, 0.004};
  std::uint64_t k = 1;
  for (real_t q : jpeg_q) grid.push_back({ChannelKind::jpeg, q, seed_base + k++});
  for (real_t v : noise_var) grid.push_back({ChannelKind::gaussian_noise, v, seed_base + k++});
  for (real_t s : scales) grid.push_back({ChannelKind::resize, s, seed_base + k++});
  for (real_t a : amounts) grid.push_back({ChannelKind::salt_pepper, a, seed_base + k++});
  return grid;
}

std::vector<std::pair<ChannelSpec, std::vector<Tensor>>> channel_sweep(
    const std::vector<Tensor>& images, const std::vector<ChannelSpec>& grid) {
  if (grid.empty()) throw ConfigError("channel_sweep: empty grid");
  std::vector<std::pair<ChannelSpec, std::vector<Tensor>>> out;
  out.reserve(grid.size());
  for (const auto& spec : grid) {
    std::vector<Tensor> processed;
    processed.reserve(images.size());
    for (std::size_t i = 0; i < images.size(); ++i)
      processed.push_back(apply_channel(images[i], spec, static_cast<int>(i)));
    out.emplace_back(spec, std::move(processed));
  }
  return out;
}

}  // namespace dd
