#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dd/tensor.hpp"

namespace dd {

/// Social-network post-processing simulation. Every channel preserves the
/// input shape (resize restores the original resolution) and clamps to
/// [0,1]; stochastic kinds are fully determined by (input, spec, image
/// index).
enum class ChannelKind { identity, jpeg, gaussian_noise, resize, salt_pepper };

const char* channel_kind_name(ChannelKind k);
ChannelKind parse_channel_kind(const std::string& name);

struct ChannelSpec {
  ChannelKind kind = ChannelKind::identity;
  /// jpeg: quality in [1,100]; gaussian_noise: variance on the [0,1] scale;
  /// resize: scale factor; salt_pepper: per-pixel flip probability.
  real_t parameter = 0.0;
  std::uint64_t rng_seed = 0;

  /// True when the parameter sits on the documented evaluation grid.
  bool on_default_grid() const;
  /// Human-readable label, e.g. "jpeg(50)" or "resize(3/4)".
  std::string label() const;
};

Tensor apply_channel(const Tensor& img, const ChannelSpec& spec, int image_index = 0);

/// The documented 4 kinds x 4 parameters evaluation grid, with seeds derived
/// from seed_base.
std::vector<ChannelSpec> default_channel_grid(std::uint64_t seed_base);

/// Every (spec, image) combination, deterministic ordering.
std::vector<std::pair<ChannelSpec, std::vector<Tensor>>> channel_sweep(
    const std::vector<Tensor>& images, const std::vector<ChannelSpec>& grid);

}  // namespace dd
