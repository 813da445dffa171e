#include "dd/watermark.hpp"

#include <cmath>

#include "dd/checkpoint.hpp"
#include "dd/error.hpp"
#include "dd/image.hpp"
#include "dd/losses.hpp"
#include "dd/rng.hpp"

namespace dd {
namespace {

constexpr real_t kLeak = 0.2;

}  // namespace

void DualDefenseArch::validate() const {
  if (image_size < 8 || image_size % 4 != 0)
    throw ConfigError("image_size must be a positive multiple of 4, got " +
                      std::to_string(image_size));
  if (watermark_length < 1) throw ConfigError("watermark_length must be >= 1");
  if (enc_feat < 4 || enc_body < se_reduction)
    throw ConfigError("encoder widths too small for the configured SE reduction");
  if (dec_base < 4 || disc_base < 2) throw ConfigError("decoder/discriminator widths too small");
}

WatermarkEncoder::WatermarkEncoder(const DualDefenseArch& arch, Rng& rng)
    : use_se_(arch.use_se), residual_(arch.residual_output) {
  const int F = arch.enc_feat, B = arch.enc_body, L = arch.watermark_length;
  c_full_ = Conv2dLayer(3, F, 3, 1, 1, rng);
  c_down_ = Conv2dLayer(F, B, 3, 2, 1, rng);
  c_mix1_ = Conv2dLayer(B + L, B, 3, 1, 1, rng);
  c_mix2_ = Conv2dLayer(B, B, 3, 1, 1, rng);
  // SE blocks are always constructed so checkpoints stay compatible across
  // the ablation switch; use_se only controls the forward pass.
  se1_ = SeBlock(B, arch.se_reduction, rng);
  se2_ = SeBlock(B, arch.se_reduction, rng);
  c_up_ = Conv2dLayer(B, F, 3, 1, 1, rng);
  c_fuse_ = Conv2dLayer(2 * F, F, 3, 1, 1, rng);
  c_out_ = Conv2dLayer(F, 3, 3, 1, 1, rng);
}

Var WatermarkEncoder::operator()(const Var& x, const Var& bits) const {
  const int h2 = x->value.dim(2) / 2, w2 = x->value.dim(3) / 2;
  Var f0 = leaky_relu(c_full_(x), kLeak);
  Var f1 = leaky_relu(c_down_(f0), kLeak);
  Var planes = broadcast_plane(bits, h2, w2);
  Var b1 = leaky_relu(c_mix1_(concat_channels(f1, planes)), kLeak);
  if (use_se_) b1 = se1_(b1);
  Var b2 = leaky_relu(c_mix2_(b1), kLeak);
  if (use_se_) b2 = se2_(b2);
  Var u = leaky_relu(c_up_(upsample_nearest2x(b2)), kLeak);
  Var g = leaky_relu(c_fuse_(concat_channels(u, f0)), kLeak);
  Var raw = c_out_(g);
  if (residual_) return clamp(add(x, raw), 0.0, 1.0);
  return sigmoid(raw);
}

void WatermarkEncoder::named_params(const std::string& p, NamedParams& out) const {
  c_full_.named_params(p + ".full", out);
  c_down_.named_params(p + ".down", out);
  c_mix1_.named_params(p + ".mix1", out);
  c_mix2_.named_params(p + ".mix2", out);
  se1_.named_params(p + ".se1", out);
  se2_.named_params(p + ".se2", out);
  c_up_.named_params(p + ".up", out);
  c_fuse_.named_params(p + ".fuse", out);
  c_out_.named_params(p + ".out", out);
}

WatermarkDecoder::WatermarkDecoder(const DualDefenseArch& arch, Rng& rng) {
  const int c = arch.dec_base;
  c1_ = Conv2dLayer(3, c / 2, 3, 2, 1, rng);
  c2_ = Conv2dLayer(c / 2, c, 3, 1, 1, rng);
  c3_ = Conv2dLayer(c, c, 3, 2, 1, rng);
  c4_ = Conv2dLayer(c, c + c / 2, 3, 1, 1, rng);
  c5_ = Conv2dLayer(c + c / 2, 2 * c, 3, 2, 1, rng);
  c6_ = Conv2dLayer(2 * c, 2 * c, 3, 1, 1, rng);
  head_ = LinearLayer(2 * c, arch.watermark_length, rng);
}

Var WatermarkDecoder::logits(const Var& x) const {
  Var h = leaky_relu(c1_(x), kLeak);
  h = leaky_relu(c2_(h), kLeak);
  h = leaky_relu(c3_(h), kLeak);
  h = leaky_relu(c4_(h), kLeak);
  h = leaky_relu(c5_(h), kLeak);
  h = leaky_relu(c6_(h), kLeak);
  return head_(global_max_pool(h));
}

void WatermarkDecoder::named_params(const std::string& p, NamedParams& out) const {
  c1_.named_params(p + ".c1", out);
  c2_.named_params(p + ".c2", out);
  c3_.named_params(p + ".c3", out);
  c4_.named_params(p + ".c4", out);
  c5_.named_params(p + ".c5", out);
  c6_.named_params(p + ".c6", out);
  head_.named_params(p + ".head", out);
}

Discriminator::Discriminator(const DualDefenseArch& arch, Rng& rng) {
  const int d = arch.disc_base;
  c1_ = Conv2dLayer(3, d, 3, 2, 1, rng);
  c2_ = Conv2dLayer(d, 2 * d, 3, 2, 1, rng);
  c3_ = Conv2dLayer(2 * d, 4 * d, 3, 2, 1, rng);
  head_ = LinearLayer(4 * d, 1, rng);
}

Var Discriminator::operator()(const Var& x) const {
  Var h = leaky_relu(c1_(x), kLeak);
  h = leaky_relu(c2_(h), kLeak);
  h = leaky_relu(c3_(h), kLeak);
  return sigmoid(head_(global_avg_pool(h)));
}

void Discriminator::named_params(const std::string& p, NamedParams& out) const {
  c1_.named_params(p + ".c1", out);
  c2_.named_params(p + ".c2", out);
  c3_.named_params(p + ".c3", out);
  head_.named_params(p + ".head", out);
}

Tensor messages_to_tensor(const std::vector<WatermarkMessage>& messages) {
  if (messages.empty()) throw ConfigError("messages_to_tensor: empty batch");
  const int l = messages.front().length();
  Tensor out({static_cast<int>(messages.size()), l});
  for (std::size_t i = 0; i < messages.size(); ++i) {
    if (messages[i].length() != l) throw ConfigError("messages_to_tensor: mixed lengths");
    for (int j = 0; j < l; ++j)
      out.at2(static_cast<int>(i), j) = messages[i].bits[static_cast<std::size_t>(j)];
  }
  return out;
}

WatermarkMessage bits_from_logits(const std::vector<real_t>& logits) {
  WatermarkMessage m;
  m.bits.reserve(logits.size());
  // sigmoid(l) >= 0.5 iff l >= 0; the tie at exactly 0.5 maps to 1.
  for (real_t l : logits) m.bits.push_back(static_cast<std::uint8_t>(l >= 0.0));
  return m;
}

DualDefenseModel::DualDefenseModel(const DualDefenseArch& a, std::uint64_t s)
    : arch(a), seed(s) {
  arch.validate();
  Rng rng(seed);
  encoder = WatermarkEncoder(arch, rng);
  decoder = WatermarkDecoder(arch, rng);
  discriminator = Discriminator(arch, rng);
}

Var DualDefenseModel::encode_batch(const Var& x, const Tensor& bits) const {
  if (bits.rank() != 2 || bits.dim(1) != arch.watermark_length)
    throw ConfigError("encode: watermark length mismatch (model expects " +
                      std::to_string(arch.watermark_length) + ")");
  if (bits.dim(0) != x->value.dim(0))
    throw ConfigError("encode: batch size mismatch between images and messages");
  return encoder(x, constant(bits));
}

Var DualDefenseModel::decode_logits(const Var& x) const { return decoder.logits(x); }

Var DualDefenseModel::discriminate_batch(const Var& x) const { return discriminator(x); }

Tensor DualDefenseModel::encode(const Tensor& image, const WatermarkMessage& message) const {
  if (message.length() != arch.watermark_length)
    throw ConfigError("encode: watermark length mismatch (model expects " +
                      std::to_string(arch.watermark_length) + " bits, got " +
                      std::to_string(message.length()) + ")");
  NoGradGuard no_grad;
  Var x = constant(stack_batch({image}));
  Var out = encode_batch(x, messages_to_tensor({message}));
  return batch_slice(out->value, 0);
}

std::pair<std::vector<real_t>, WatermarkMessage> DualDefenseModel::decode(
    const Tensor& image) const {
  NoGradGuard no_grad;
  Var x = constant(stack_batch({image}));
  Var l = decode_logits(x);
  std::vector<real_t> logits(static_cast<std::size_t>(arch.watermark_length));
  for (int i = 0; i < arch.watermark_length; ++i) logits[static_cast<std::size_t>(i)] = l->value.at2(0, i);
  return {logits, bits_from_logits(logits)};
}

real_t DualDefenseModel::discriminate(const Tensor& image) const {
  NoGradGuard no_grad;
  Var x = constant(stack_batch({image}));
  return discriminate_batch(x)->value.at2(0, 0);
}

NamedParams DualDefenseModel::encoder_params() const {
  NamedParams out;
  encoder.named_params("encoder", out);
  return out;
}

NamedParams DualDefenseModel::decoder_params() const {
  NamedParams out;
  decoder.named_params("decoder", out);
  return out;
}

NamedParams DualDefenseModel::discriminator_params() const {
  NamedParams out;
  discriminator.named_params("discriminator", out);
  return out;
}

NamedParams DualDefenseModel::named_params() const {
  NamedParams out = encoder_params();
  NamedParams d = decoder_params();
  NamedParams di = discriminator_params();
  out.insert(out.end(), d.begin(), d.end());
  out.insert(out.end(), di.begin(), di.end());
  return out;
}

void DualDefenseModel::save(
    const std::string& path,
    const std::vector<std::pair<std::string, std::string>>& extra_meta) const {
  CheckpointWriter w("dualdefense");
  w.set_meta_int("image_size", arch.image_size);
  w.set_meta_int("watermark_length", arch.watermark_length);
  w.set_meta_int("enc_feat", arch.enc_feat);
  w.set_meta_int("enc_body", arch.enc_body);
  w.set_meta_int("se_reduction", arch.se_reduction);
  w.set_meta_int("dec_base", arch.dec_base);
  w.set_meta_int("disc_base", arch.disc_base);
  w.set_meta_int("use_se", arch.use_se ? 1 : 0);
  w.set_meta_int("residual_output", arch.residual_output ? 1 : 0);
  w.set_meta_int("seed", static_cast<std::int64_t>(seed));
  for (const auto& [k, v] : extra_meta) w.set_meta(k, v);
  for (const auto& [name, v] : named_params()) w.add(name, v->value);
  w.write_file(path);
}

DualDefenseModel DualDefenseModel::load(const std::string& path) {
  Checkpoint c = Checkpoint::read_file(path, "dualdefense");
  DualDefenseArch arch;
  arch.image_size = static_cast<int>(c.meta_int("image_size"));
  arch.watermark_length = static_cast<int>(c.meta_int("watermark_length"));
  arch.enc_feat = static_cast<int>(c.meta_int("enc_feat"));
  arch.enc_body = static_cast<int>(c.meta_int("enc_body"));
  arch.se_reduction = static_cast<int>(c.meta_int("se_reduction"));
  arch.dec_base = static_cast<int>(c.meta_int("dec_base"));
  arch.disc_base = static_cast<int>(c.meta_int("disc_base"));
  arch.use_se = c.meta_int("use_se") != 0;
  arch.residual_output = c.meta_int("residual_output") != 0;
  DualDefenseModel model(arch, static_cast<std::uint64_t>(c.meta_int("seed")));
  for (const auto& [name, v] : model.named_params()) {
    const Tensor& stored = c.tensor(name);
    if (!stored.same_shape(v->value))
      throw RuntimeFailure("dualdefense checkpoint tensor shape mismatch: " + name);
    v->value = stored;
  }
  return model;
}

Var loss_discriminator(const Tensor& originals, const Tensor& watermarked,
                       const Discriminator& discriminator) {
  Var scores_real = discriminator(constant(originals));
  Var scores_fake = discriminator(constant(watermarked));
  return loss_discriminator_from_scores(scores_real, scores_fake);
}

}  // namespace dd
