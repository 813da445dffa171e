#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dd/dataset.hpp"
#include "dd/layers.hpp"
#include "dd/tensor.hpp"

namespace dd {

struct MatcherArch {
  int image_size = 64;
  int channels = 12;
  int embed_dim = 32;
};

/// Identity-recognition model used for the adversariality metrics: a small
/// embedding network plus one unit-norm prototype per identity and a cosine
/// acceptance threshold. recognize() returns the best-prototype identity when
/// its similarity clears the threshold, otherwise "unknown" (nullopt).
/// External embedders can be plugged in through the same prototype/threshold
/// protocol via from_external_embeddings().
class FaceMatcher {
 public:
  FaceMatcher() = default;
  FaceMatcher(const MatcherArch& arch, std::uint64_t seed);

  /// Unit-norm embeddings, graph-building form. (N,3,H,W) -> (N,E)
  Var embed_batch(const Var& x) const;
  /// Intermediate conv activations (three stages) for perceptual distances.
  std::vector<Var> feature_taps(const Var& x) const;

  Tensor embed(const Tensor& image) const;  // single image, no graph

  int identity_count() const { return prototypes_.empty() ? 0 : prototypes_.dim(0); }
  const std::vector<std::string>& identity_names() const { return names_; }
  real_t threshold() const { return tau_; }
  real_t clean_accuracy(int which) const { return clean_accuracy_[which]; }

  void set_prototypes(Tensor prototypes, std::vector<std::string> names, real_t tau);

  /// Identity index of the most similar prototype, subject to
  /// similarity >= threshold; nullopt means unknown.
  std::optional<int> recognize(const Tensor& image) const;
  /// Cosine similarity to each prototype.
  std::vector<real_t> similarities(const Tensor& image) const;

  /// Mean over the tapped layers of the squared difference between
  /// channel-unit-normalized feature maps; 0 for identical inputs.
  real_t perceptual_distance(const Tensor& a, const Tensor& b) const;

  NamedParams named_params() const;
  void save(const std::string& path) const;
  static FaceMatcher load(const std::string& path);

  const MatcherArch& arch() const { return arch_; }

 private:
  MatcherArch arch_;
  std::uint64_t seed_ = 0;
  Conv2dLayer c1_, c2_, c3_;
  LinearLayer head_;
  Tensor prototypes_;  // (K,E), unit rows
  std::vector<std::string> names_;
  real_t tau_ = 0.0;
  real_t clean_accuracy_[2] = {0.0, 0.0};

  friend FaceMatcher train_face_matcher(const PairedDataset&, const struct MatcherTrainOptions&);
};

struct MatcherTrainOptions {
  int epochs = 20;
  int batch_per_identity = 8;
  real_t learning_rate = 1e-3;
  real_t margin = 0.4;
  std::uint64_t seed = 23;
  /// Gate: held-out clean recognition accuracy each identity must reach,
  /// otherwise the matcher is rejected.
  real_t min_accuracy = 0.9;
  bool verbose = false;
};

/// Margin-based identity separation on the train split; prototypes are the
/// mean train embeddings, the threshold is fitted on the val split. Throws
/// RuntimeFailure when the held-out accuracy gate fails.
FaceMatcher train_face_matcher(const PairedDataset& data, const MatcherTrainOptions& options);

/// Recognition-rate ratio: (disrupted swaps recognized as source) /
/// (clean swaps recognized as source). Lower is better adversariality.
/// Throws RuntimeFailure when no clean swap is recognized as source.
real_t fn_acc(const std::vector<Tensor>& disrupted_swaps, const std::vector<Tensor>& clean_swaps,
              int source_identity_index, const FaceMatcher& matcher);

}  // namespace dd
