#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "dd/dataset.hpp"
#include "dd/layers.hpp"
#include "dd/tensor.hpp"

namespace dd {

struct DualDefenseArch {
  int image_size = 64;        // multiple of 4
  int watermark_length = 30;
  int enc_feat = 16;          // full-resolution feature width
  int enc_body = 32;          // bottleneck width after the message join
  int se_reduction = 8;
  int dec_base = 32;
  int disc_base = 12;
  bool use_se = true;         // channel recalibration on/off (ablation)
  bool residual_output = false;

  void validate() const;
};

/// Watermark embedding network. The message is replicated bit-per-plane to
/// the bottleneck resolution, concatenated with the carrier features, passed
/// through channel-recalibrated mixing blocks and an upsampling head that
/// emits the watermarked image directly (sigmoid range [0,1]). A skip from
/// the full-resolution features keeps carrier detail.
class WatermarkEncoder {
 public:
  WatermarkEncoder() = default;
  WatermarkEncoder(const DualDefenseArch& arch, Rng& rng);

  /// x: (N,3,H,W); bits: (N,L) of 0/1 values.
  Var operator()(const Var& x, const Var& bits) const;
  void named_params(const std::string& prefix, NamedParams& out) const;

 private:
  Conv2dLayer c_full_, c_down_, c_mix1_, c_mix2_, c_up_, c_fuse_, c_out_;
  SeBlock se1_, se2_;
  bool use_se_ = true;
  bool residual_ = false;
};

/// Stacked convolutions, global max pool, linear head to L logits.
class WatermarkDecoder {
 public:
  WatermarkDecoder() = default;
  WatermarkDecoder(const DualDefenseArch& arch, Rng& rng);

  Var logits(const Var& x) const;
  void named_params(const std::string& prefix, NamedParams& out) const;

 private:
  Conv2dLayer c1_, c2_, c3_, c4_, c5_, c6_;
  LinearLayer head_;
};

/// CNN classifier, image -> probability in (0,1) of being an original
/// carrier.
class Discriminator {
 public:
  Discriminator() = default;
  Discriminator(const DualDefenseArch& arch, Rng& rng);

  /// (N,3,H,W) -> (N,1) probabilities.
  Var operator()(const Var& x) const;
  void named_params(const std::string& prefix, NamedParams& out) const;

 private:
  Conv2dLayer c1_, c2_, c3_;
  LinearLayer head_;
};

/// Bits of a batch of messages as an (N,L) tensor.
Tensor messages_to_tensor(const std::vector<WatermarkMessage>& messages);
/// Thresholding rule: bit i is 1 iff sigmoid(logit_i) >= 0.5.
WatermarkMessage bits_from_logits(const std::vector<real_t>& logits);

/// The trainable watermarking system: encoder + decoder + discriminator.
struct DualDefenseModel {
  DualDefenseModel(const DualDefenseArch& arch, std::uint64_t seed);

  DualDefenseArch arch;
  std::uint64_t seed = 0;
  WatermarkEncoder encoder;
  WatermarkDecoder decoder;
  Discriminator discriminator;

  // Graph-building forms used by the trainer.
  Var encode_batch(const Var& x, const Tensor& bits) const;
  Var decode_logits(const Var& x) const;
  Var discriminate_batch(const Var& x) const;

  // Single-image forms (no graph); these are the operator surface.
  Tensor encode(const Tensor& image, const WatermarkMessage& message) const;
  std::pair<std::vector<real_t>, WatermarkMessage> decode(const Tensor& image) const;
  real_t discriminate(const Tensor& image) const;

  NamedParams encoder_params() const;
  NamedParams decoder_params() const;
  NamedParams discriminator_params() const;
  NamedParams named_params() const;

  void save(const std::string& path,
            const std::vector<std::pair<std::string, std::string>>& extra_meta = {}) const;
  static DualDefenseModel load(const std::string& path);
};

/// Discriminator objective over image batches (scores computed inside).
Var loss_discriminator(const Tensor& originals, const Tensor& watermarked,
                       const Discriminator& discriminator);

}  // namespace dd
