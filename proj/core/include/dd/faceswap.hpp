#pragma once

#include <cstdint>
#include <string>
#include <utility>

#include "dd/dataset.hpp"
#include "dd/layers.hpp"
#include "dd/tensor.hpp"

namespace dd {

/// The two parties of a swap task: the protected target identity and the
/// source identity a forger would swap in.
enum class FaceIdentity { target, source };
FaceIdentity parse_identity(const std::string& label);  // "L_t"/"L_s" (or "t"/"s")
const char* identity_label(FaceIdentity id);

struct FaceSwapArch {
  int image_size = 64;      // must be a multiple of 16 (four stride-2 stages)
  int latent_channels = 16;

  void validate() const;
};

/// Shared-encoder, per-identity-decoder autoencoder. Each decoder ends in a
/// 3-channel convolution whose output (the pre-sigmoid tap) feeds a sigmoid;
/// decode_with_tap returns both from one forward pass.
class FaceSwapModel {
 public:
  FaceSwapModel(const FaceSwapArch& arch, std::uint64_t seed);

  Var encode(const Var& x) const;
  /// (pre_sigmoid, image); image == sigmoid(pre_sigmoid) elementwise.
  std::pair<Var, Var> decode_with_tap(const Var& latent, FaceIdentity id) const;
  Var decode_image(const Var& latent, FaceIdentity id) const;
  /// decode_image(encode(x), source_identity) -- graph-building form.
  Var forward_swap(const Var& x, FaceIdentity source_identity) const;

  /// Single-image swap on a frozen, trained model (no graph recorded).
  Tensor swap(const Tensor& img, FaceIdentity source_identity) const;

  NamedParams named_params() const;
  NamedParams encoder_params() const;
  NamedParams decoder_params(FaceIdentity id) const;

  void freeze();
  bool frozen() const { return frozen_; }
  bool trained() const { return trained_; }
  void mark_trained() { trained_ = true; }

  void save(const std::string& path) const;
  static FaceSwapModel load(const std::string& path);

  const FaceSwapArch& arch() const { return arch_; }
  std::uint64_t seed() const { return seed_; }

 private:
  struct Decoder {
    Conv2dLayer c1, c2, c3, c4, head;
  };
  const Decoder& decoder(FaceIdentity id) const;

  FaceSwapArch arch_;
  std::uint64_t seed_ = 0;
  bool trained_ = false;
  bool frozen_ = false;
  Conv2dLayer e1_, e2_, e3_, e4_;
  Decoder dec_t_, dec_s_;
};

struct FaceSwapTrainOptions {
  int epochs = 150;
  int batch_size = 16;
  real_t learning_rate = 2e-4;
  std::uint64_t seed = 7;
  int val_every = 5;
  bool verbose = false;
};

/// Reconstruction training (per-identity MSE through the shared encoder).
/// Returns the parameters with the lowest validation reconstruction loss and
/// marks the model trained; with epochs == 0 the model keeps its random
/// initialization and stays flagged untrained. NaN loss aborts.
FaceSwapModel train_faceswap(const PairedDataset& data, const FaceSwapArch& arch,
                             const FaceSwapTrainOptions& options);

/// Mean validation reconstruction PSNR per identity, in dB.
std::pair<real_t, real_t> faceswap_val_psnr(const FaceSwapModel& model,
                                            const PairedDataset& data);

}  // namespace dd
