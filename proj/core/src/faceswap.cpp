#include "dd/faceswap.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>

#include "dd/checkpoint.hpp"
#include "dd/error.hpp"
#include "dd/image.hpp"
#include "dd/metrics.hpp"
#include "dd/optimizer.hpp"
#include "dd/rng.hpp"

namespace dd {
namespace {

constexpr real_t kLeak = 0.2;

// Decoder widths from the latent up to full resolution.
constexpr int kDecW1 = 48, kDecW2 = 24, kDecW3 = 16, kDecW4 = 8;
constexpr int kEncW1 = 32, kEncW2 = 64, kEncW3 = 64;

}  // namespace

FaceIdentity parse_identity(const std::string& label) {
  if (label == "L_t" || label == "t" || label == "target") return FaceIdentity::target;
  if (label == "L_s" || label == "s" || label == "source") return FaceIdentity::source;
  throw ConfigError("unknown identity label '" + label + "' (expected L_t or L_s)");
}

const char* identity_label(FaceIdentity id) {
  return id == FaceIdentity::target ? "L_t" : "L_s";
}

void FaceSwapArch::validate() const {
  if (image_size < 16 || image_size % 16 != 0)
    throw ConfigError("faceswap image_size must be a positive multiple of 16, got " +
                      std::to_string(image_size));
  if (latent_channels < 1) throw ConfigError("faceswap latent_channels must be positive");
}

FaceSwapModel::FaceSwapModel(const FaceSwapArch& arch, std::uint64_t seed)
    : arch_(arch), seed_(seed) {
  arch.validate();
  Rng rng(seed);
  e1_ = Conv2dLayer(3, kEncW1, 3, 2, 1, rng);
  e2_ = Conv2dLayer(kEncW1, kEncW2, 3, 2, 1, rng);
  e3_ = Conv2dLayer(kEncW2, kEncW3, 3, 2, 1, rng);
  e4_ = Conv2dLayer(kEncW3, arch.latent_channels, 3, 2, 1, rng);
  for (Decoder* d : {&dec_t_, &dec_s_}) {
    d->c1 = Conv2dLayer(arch.latent_channels, kDecW1, 3, 1, 1, rng);
    d->c2 = Conv2dLayer(kDecW1, kDecW2, 3, 1, 1, rng);
    d->c3 = Conv2dLayer(kDecW2, kDecW3, 3, 1, 1, rng);
    d->c4 = Conv2dLayer(kDecW3, kDecW4, 3, 1, 1, rng);
    d->head = Conv2dLayer(kDecW4, 3, 3, 1, 1, rng);
  }
}

Var FaceSwapModel::encode(const Var& x) const {
  Var h = leaky_relu(e1_(x), kLeak);
  h = leaky_relu(e2_(h), kLeak);
  h = leaky_relu(e3_(h), kLeak);
  return leaky_relu(e4_(h), kLeak);
}

const FaceSwapModel::Decoder& FaceSwapModel::decoder(FaceIdentity id) const {
  return id == FaceIdentity::target ? dec_t_ : dec_s_;
}

std::pair<Var, Var> FaceSwapModel::decode_with_tap(const Var& latent, FaceIdentity id) const {
  const Decoder& d = decoder(id);
  Var h = leaky_relu(d.c1(upsample_nearest2x(latent)), kLeak);
  h = leaky_relu(d.c2(upsample_nearest2x(h)), kLeak);
  h = leaky_relu(d.c3(upsample_nearest2x(h)), kLeak);
  h = leaky_relu(d.c4(upsample_nearest2x(h)), kLeak);
  Var pre_sigmoid = d.head(h);
  return {pre_sigmoid, sigmoid(pre_sigmoid)};
}

Var FaceSwapModel::decode_image(const Var& latent, FaceIdentity id) const {
  return decode_with_tap(latent, id).second;
}

Var FaceSwapModel::forward_swap(const Var& x, FaceIdentity source_identity) const {
  return decode_image(encode(x), source_identity);
}

Tensor FaceSwapModel::swap(const Tensor& img, FaceIdentity source_identity) const {
  if (!trained_)
    throw RuntimeFailure("FaceSwapModel::swap called on an untrained model");
  if (img.rank() != 3) throw ConfigError("swap: expects a (3,H,W) image");
  NoGradGuard no_grad;
  Var x = constant(stack_batch({img}));
  Var out = forward_swap(x, source_identity);
  return batch_slice(out->value, 0);
}

NamedParams FaceSwapModel::named_params() const {
  NamedParams out = encoder_params();
  for (auto id : {FaceIdentity::target, FaceIdentity::source}) {
    NamedParams dec = decoder_params(id);
    out.insert(out.end(), dec.begin(), dec.end());
  }
  return out;
}

NamedParams FaceSwapModel::encoder_params() const {
  NamedParams out;
  e1_.named_params("enc.c1", out);
  e2_.named_params("enc.c2", out);
  e3_.named_params("enc.c3", out);
  e4_.named_params("enc.c4", out);
  return out;
}

NamedParams FaceSwapModel::decoder_params(FaceIdentity id) const {
  NamedParams out;
  const Decoder& d = decoder(id);
  const std::string p = id == FaceIdentity::target ? "dec_t" : "dec_s";
  d.c1.named_params(p + ".c1", out);
  d.c2.named_params(p + ".c2", out);
  d.c3.named_params(p + ".c3", out);
  d.c4.named_params(p + ".c4", out);
  d.head.named_params(p + ".head", out);
  return out;
}

void FaceSwapModel::freeze() {
  set_trainable(named_params(), false);
  frozen_ = true;
}

void FaceSwapModel::save(const std::string& path) const {
  CheckpointWriter w("faceswap");
  w.set_meta_int("image_size", arch_.image_size);
  w.set_meta_int("latent_channels", arch_.latent_channels);
  w.set_meta_int("seed", static_cast<std::int64_t>(seed_));
  w.set_meta_int("trained", trained_ ? 1 : 0);
  for (const auto& [name, v] : named_params()) w.add(name, v->value);
  w.write_file(path);
}

FaceSwapModel FaceSwapModel::load(const std::string& path) {
  Checkpoint c = Checkpoint::read_file(path, "faceswap");
  FaceSwapArch arch;
  arch.image_size = static_cast<int>(c.meta_int("image_size"));
  arch.latent_channels = static_cast<int>(c.meta_int("latent_channels"));
  FaceSwapModel model(arch, static_cast<std::uint64_t>(c.meta_int("seed")));
  for (const auto& [name, v] : model.named_params()) {
    const Tensor& stored = c.tensor(name);
    if (!stored.same_shape(v->value))
      throw RuntimeFailure("faceswap checkpoint tensor shape mismatch: " + name);
    v->value = stored;
  }
  model.trained_ = c.meta_int("trained") != 0;
  return model;
}

FaceSwapModel train_faceswap(const PairedDataset& data, const FaceSwapArch& arch,
                             const FaceSwapTrainOptions& options) {
  if (data.split_t.train.empty() || data.split_s.train.empty())
    throw ConfigError("train_faceswap: both identities need nonempty train splits");
  FaceSwapModel model(arch, options.seed);
  if (options.epochs == 0) return model;  // random init, flagged untrained

  Adam opt(params_of(model.named_params()), options.learning_rate);
  Rng shuffle_rng = Rng(options.seed).split(0xface);

  std::vector<Tensor> best_snapshot = snapshot_params(model.named_params());
  real_t best_val = std::numeric_limits<real_t>::infinity();

  auto val_loss = [&]() {
    NoGradGuard no_grad;
    real_t total = 0.0;
    int count = 0;
    for (int which = 0; which < 2; ++which) {
      const FaceIdentity id = which == 0 ? FaceIdentity::target : FaceIdentity::source;
      auto imgs = data.images_of(which, Split::val);
      if (imgs.empty()) continue;
      for (std::size_t i = 0; i < imgs.size(); i += 16) {
        std::vector<const Tensor*> chunk(imgs.begin() + static_cast<long>(i),
                                         imgs.begin() + static_cast<long>(std::min(i + 16, imgs.size())));
        Var x = constant(stack_batch(chunk));
        Var recon = model.decode_image(model.encode(x), id);
        total += mse(recon->value, x->value) * static_cast<real_t>(chunk.size());
        count += static_cast<int>(chunk.size());
      }
    }
    return count ? total / count : 0.0;
  };

  for (int epoch = 1; epoch <= options.epochs; ++epoch) {
    // Alternate identity batches within the epoch.
    struct Batch {
      int which;
      std::vector<int> idx;
    };
    std::vector<Batch> batches;
    for (int which = 0; which < 2; ++which) {
      std::vector<int> order = data.split(which).train;
      shuffle_rng.shuffle(order);
      for (std::size_t i = 0; i < order.size(); i += static_cast<std::size_t>(options.batch_size)) {
        Batch b;
        b.which = which;
        for (std::size_t j = i;
             j < std::min(i + static_cast<std::size_t>(options.batch_size), order.size()); ++j)
          b.idx.push_back(order[j]);
        batches.push_back(std::move(b));
      }
    }
    // Interleave target/source batches in a seeded order.
    shuffle_rng.shuffle(batches);

    real_t epoch_loss = 0.0;
    for (const auto& b : batches) {
      const FaceIdentity id = b.which == 0 ? FaceIdentity::target : FaceIdentity::source;
      std::vector<const Tensor*> imgs;
      for (int i : b.idx) imgs.push_back(&data.identity(b.which).images[static_cast<std::size_t>(i)]);
      Var x = constant(stack_batch(imgs));
      Var recon = model.decode_image(model.encode(x), id);
      Var loss = mean_all(square(sub(recon, x)));
      if (!std::isfinite(loss->value.item()))
        throw RuntimeFailure("train_faceswap: loss diverged (NaN) at epoch " +
                             std::to_string(epoch));
      opt.zero_grad();
      backward(loss);
      opt.step();
      epoch_loss += loss->value.item();
    }

    if (epoch % options.val_every == 0 || epoch == options.epochs) {
      const real_t v = val_loss();
      if (v < best_val) {
        best_val = v;
        best_snapshot = snapshot_params(model.named_params());
      }
      if (options.verbose)
        std::cerr << "faceswap epoch " << epoch << " train_mse "
                  << epoch_loss / static_cast<real_t>(batches.size()) << " val_mse " << v << "\n";
    }
  }

  restore_params(model.named_params(), best_snapshot);
  model.mark_trained();
  return model;
}

std::pair<real_t, real_t> faceswap_val_psnr(const FaceSwapModel& model,
                                            const PairedDataset& data) {
  NoGradGuard no_grad;
  real_t out[2] = {0.0, 0.0};
  for (int which = 0; which < 2; ++which) {
    const FaceIdentity id = which == 0 ? FaceIdentity::target : FaceIdentity::source;
    auto imgs = data.images_of(which, Split::val);
    real_t acc = 0.0;
    for (const Tensor* img : imgs) {
      Var x = constant(stack_batch({*img}));
      Var recon = model.decode_image(model.encode(x), id);
      acc += psnr(recon->value, x->value);
    }
    out[which] = imgs.empty() ? 0.0 : acc / static_cast<real_t>(imgs.size());
  }
  return {out[0], out[1]};
}

}  // namespace dd
