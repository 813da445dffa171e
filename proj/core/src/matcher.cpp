#include "dd/matcher.hpp"

#include <cmath>
#include <iostream>

#include "dd/checkpoint.hpp"
#include "dd/error.hpp"
#include "dd/image.hpp"
#include "dd/optimizer.hpp"
#include "dd/rng.hpp"

namespace dd {
namespace {

constexpr real_t kLeak = 0.2;

}  // namespace

FaceMatcher::FaceMatcher(const MatcherArch& arch, std::uint64_t seed)
    : arch_(arch), seed_(seed) {
  Rng rng(seed);
  const int c = arch.channels;
  c1_ = Conv2dLayer(3, c, 3, 2, 1, rng);
  c2_ = Conv2dLayer(c, 2 * c, 3, 2, 1, rng);
  c3_ = Conv2dLayer(2 * c, 4 * c, 3, 2, 1, rng);
  head_ = LinearLayer(4 * c, arch.embed_dim, rng);
}

std::vector<Var> FaceMatcher::feature_taps(const Var& x) const {
  std::vector<Var> taps;
  Var h = leaky_relu(c1_(x), kLeak);
  taps.push_back(h);
  h = leaky_relu(c2_(h), kLeak);
  taps.push_back(h);
  h = leaky_relu(c3_(h), kLeak);
  taps.push_back(h);
  return taps;
}

Var FaceMatcher::embed_batch(const Var& x) const {
  Var h = leaky_relu(c1_(x), kLeak);
  h = leaky_relu(c2_(h), kLeak);
  h = leaky_relu(c3_(h), kLeak);
  return l2_normalize_rows(head_(global_avg_pool(h)));
}

Tensor FaceMatcher::embed(const Tensor& image) const {
  NoGradGuard no_grad;
  Var e = embed_batch(constant(stack_batch({image})));
  Tensor out({arch_.embed_dim});
  for (int i = 0; i < arch_.embed_dim; ++i) out[static_cast<std::size_t>(i)] = e->value.at2(0, i);
  return out;
}

void FaceMatcher::set_prototypes(Tensor prototypes, std::vector<std::string> names, real_t tau) {
  if (prototypes.rank() != 2 || prototypes.dim(0) != static_cast<int>(names.size()) ||
      prototypes.dim(1) != arch_.embed_dim)
    throw ConfigError("set_prototypes: shape mismatch");
  prototypes_ = std::move(prototypes);
  names_ = std::move(names);
  tau_ = tau;
}

std::vector<real_t> FaceMatcher::similarities(const Tensor& image) const {
  if (prototypes_.empty()) throw RuntimeFailure("matcher has no identity prototypes");
  Tensor e = embed(image);
  std::vector<real_t> sims(static_cast<std::size_t>(identity_count()), 0.0);
  for (int k = 0; k < identity_count(); ++k) {
    real_t dot = 0.0;
    for (int j = 0; j < arch_.embed_dim; ++j) dot += e[static_cast<std::size_t>(j)] * prototypes_.at2(k, j);
    sims[static_cast<std::size_t>(k)] = dot;
  }
  return sims;
}

std::optional<int> FaceMatcher::recognize(const Tensor& image) const {
  std::vector<real_t> sims = similarities(image);
  int best = 0;
  for (int k = 1; k < identity_count(); ++k)
    if (sims[static_cast<std::size_t>(k)] > sims[static_cast<std::size_t>(best)]) best = k;
  if (sims[static_cast<std::size_t>(best)] < tau_) return std::nullopt;
  return best;
}

real_t FaceMatcher::perceptual_distance(const Tensor& a, const Tensor& b) const {
  if (!a.same_shape(b)) throw ConfigError("perceptual_distance: shape mismatch");
  NoGradGuard no_grad;
  std::vector<Var> ta = feature_taps(constant(stack_batch({a})));
  std::vector<Var> tb = feature_taps(constant(stack_batch({b})));
  real_t total = 0.0;
  for (std::size_t layer = 0; layer < ta.size(); ++layer) {
    const Tensor& fa = ta[layer]->value;
    const Tensor& fb = tb[layer]->value;
    const int c = fa.dim(1), h = fa.dim(2), w = fa.dim(3);
    const std::size_t plane = static_cast<std::size_t>(h) * w;
    real_t layer_acc = 0.0;
    for (std::size_t k = 0; k < plane; ++k) {
      // Unit-normalize the channel vector at this location for both inputs.
      real_t na = 1e-12, nb = 1e-12;
      for (int ch = 0; ch < c; ++ch) {
        const real_t va = fa[static_cast<std::size_t>(ch) * plane + k];
        const real_t vb = fb[static_cast<std::size_t>(ch) * plane + k];
        na += va * va;
        nb += vb * vb;
      }
      na = std::sqrt(na);
      nb = std::sqrt(nb);
      for (int ch = 0; ch < c; ++ch) {
        const real_t d = fa[static_cast<std::size_t>(ch) * plane + k] / na -
                         fb[static_cast<std::size_t>(ch) * plane + k] / nb;
        layer_acc += d * d;
      }
    }
    total += layer_acc / static_cast<real_t>(plane * static_cast<std::size_t>(c));
  }
  return total / static_cast<real_t>(ta.size());
}

NamedParams FaceMatcher::named_params() const {
  NamedParams out;
  c1_.named_params("m.c1", out);
  c2_.named_params("m.c2", out);
  c3_.named_params("m.c3", out);
  head_.named_params("m.head", out);
  return out;
}

void FaceMatcher::save(const std::string& path) const {
  CheckpointWriter w("matcher");
  w.set_meta_int("image_size", arch_.image_size);
  w.set_meta_int("channels", arch_.channels);
  w.set_meta_int("embed_dim", arch_.embed_dim);
  w.set_meta_int("seed", static_cast<std::int64_t>(seed_));
  w.set_meta("tau", std::to_string(tau_));
  w.set_meta("clean_accuracy_t", std::to_string(clean_accuracy_[0]));
  w.set_meta("clean_accuracy_s", std::to_string(clean_accuracy_[1]));
  std::string joined;
  for (const auto& n : names_) {
    if (!joined.empty()) joined += ",";
    joined += n;
  }
  w.set_meta("identities", joined);
  for (const auto& [name, v] : named_params()) w.add(name, v->value);
  if (!prototypes_.empty()) w.add("prototypes", prototypes_);
  w.write_file(path);
}

FaceMatcher FaceMatcher::load(const std::string& path) {
  Checkpoint c = Checkpoint::read_file(path, "matcher");
  MatcherArch arch;
  arch.image_size = static_cast<int>(c.meta_int("image_size"));
  arch.channels = static_cast<int>(c.meta_int("channels"));
  arch.embed_dim = static_cast<int>(c.meta_int("embed_dim"));
  FaceMatcher m(arch, static_cast<std::uint64_t>(c.meta_int("seed")));
  for (const auto& [name, v] : m.named_params()) {
    const Tensor& stored = c.tensor(name);
    if (!stored.same_shape(v->value))
      throw RuntimeFailure("matcher checkpoint tensor shape mismatch: " + name);
    v->value = stored;
  }
  if (c.has_tensor("prototypes")) {
    std::vector<std::string> names;
    std::string joined = c.meta_at("identities");
    std::size_t pos = 0;
    while (pos != std::string::npos && !joined.empty()) {
      std::size_t comma = joined.find(',', pos);
      names.push_back(joined.substr(pos, comma == std::string::npos ? comma : comma - pos));
      pos = comma == std::string::npos ? comma : comma + 1;
    }
    m.set_prototypes(c.tensor("prototypes"), names, std::stod(c.meta_at("tau")));
  }
  m.clean_accuracy_[0] = std::stod(c.meta_at("clean_accuracy_t"));
  m.clean_accuracy_[1] = std::stod(c.meta_at("clean_accuracy_s"));
  return m;
}

FaceMatcher train_face_matcher(const PairedDataset& data, const MatcherTrainOptions& options) {
  if (data.split_t.train.empty() || data.split_s.train.empty())
    throw ConfigError("train_face_matcher: needs train splits for both identities");

  MatcherArch arch;
  arch.image_size = data.image_size;
  FaceMatcher m(arch, options.seed);
  Adam opt(params_of(m.named_params()), options.learning_rate);
  Rng rng = Rng(options.seed).split(0x3a7c);

  const int k = options.batch_per_identity;
  const int steps_per_epoch =
      std::max<int>(1, static_cast<int>(data.split_t.train.size()) / k);

  for (int epoch = 1; epoch <= options.epochs; ++epoch) {
    for (int step = 0; step < steps_per_epoch; ++step) {
      // k images per identity, identities contiguous in the batch.
      std::vector<const Tensor*> batch;
      for (int which = 0; which < 2; ++which) {
        const auto& train = data.split(which).train;
        for (int i = 0; i < k; ++i) {
          const int idx = train[static_cast<std::size_t>(rng.below(train.size()))];
          batch.push_back(&data.identity(which).images[static_cast<std::size_t>(idx)]);
        }
      }
      Var x = constant(stack_batch(batch));
      Var e = m.embed_batch(x);  // (2k, E)

      // Batch prototypes: group means, unit-normalized.
      Tensor avg({2, 2 * k});
      for (int i = 0; i < k; ++i) {
        avg.at2(0, i) = 1.0 / k;
        avg.at2(1, k + i) = 1.0 / k;
      }
      Var protos = l2_normalize_rows(matmul(constant(avg), e));  // (2, E)
      Var sims = linear(e, protos, constant(Tensor::zeros({2})));  // (2k, 2)

      // Hinge on (margin - s_own + s_other) per sample.
      Tensor coef({2 * k, 2});
      for (int i = 0; i < 2 * k; ++i) {
        const int own = i < k ? 0 : 1;
        coef.at2(i, own) = -1.0;
        coef.at2(i, 1 - own) = 1.0;
      }
      Var violation = add_scalar(sum_rows(mul(sims, constant(coef))), options.margin);
      Var loss = mean_all(relu(violation));
      if (!std::isfinite(loss->value.item()))
        throw RuntimeFailure("train_face_matcher: loss diverged");
      opt.zero_grad();
      backward(loss);
      opt.step();
    }
    if (options.verbose) std::cerr << "matcher epoch " << epoch << " done\n";
  }

  // Final prototypes: mean unit-norm embedding over each train split.
  Tensor protos({2, arch.embed_dim});
  for (int which = 0; which < 2; ++which) {
    for (int idx : data.split(which).train) {
      Tensor e = m.embed(data.identity(which).images[static_cast<std::size_t>(idx)]);
      for (int j = 0; j < arch.embed_dim; ++j) protos.at2(which, j) += e[static_cast<std::size_t>(j)];
    }
    real_t norm = 1e-12;
    for (int j = 0; j < arch.embed_dim; ++j) norm += protos.at2(which, j) * protos.at2(which, j);
    norm = std::sqrt(norm);
    for (int j = 0; j < arch.embed_dim; ++j) protos.at2(which, j) /= norm;
  }
  m.set_prototypes(protos, {data.identity_t.name, data.identity_s.name}, /*tau=*/-1.0);

  // Threshold: the largest tau that keeps every correctly-argmaxed val image
  // recognized, i.e. the minimum correct top similarity. Held-out accuracy
  // under that threshold is the argmax accuracy.
  real_t min_correct_sim = 1.0;
  int correct[2] = {0, 0}, total[2] = {0, 0};
  for (int which = 0; which < 2; ++which) {
    for (int idx : data.split(which).val) {
      std::vector<real_t> sims = m.similarities(data.identity(which).images[static_cast<std::size_t>(idx)]);
      const int best = sims[0] >= sims[1] ? 0 : 1;
      ++total[which];
      if (best == which) {
        ++correct[which];
        min_correct_sim = std::min(min_correct_sim, sims[static_cast<std::size_t>(best)]);
      }
    }
  }
  m.tau_ = min_correct_sim;
  for (int which = 0; which < 2; ++which)
    m.clean_accuracy_[which] =
        total[which] ? static_cast<real_t>(correct[which]) / total[which] : 0.0;

  if (m.clean_accuracy_[0] < options.min_accuracy || m.clean_accuracy_[1] < options.min_accuracy)
    throw RuntimeFailure(
        "face matcher rejected: held-out clean accuracy " +
        std::to_string(m.clean_accuracy_[0]) + "/" + std::to_string(m.clean_accuracy_[1]) +
        " below the " + std::to_string(options.min_accuracy) + " gate; evaluation would be meaningless");
  return m;
}

real_t fn_acc(const std::vector<Tensor>& disrupted_swaps, const std::vector<Tensor>& clean_swaps,
              int source_identity_index, const FaceMatcher& matcher) {
  if (disrupted_swaps.empty() || clean_swaps.empty())
    throw ConfigError("fn_acc: empty image sets");
  auto hit_fraction = [&](const std::vector<Tensor>& set) {
    int hits = 0;
    for (const auto& img : set) {
      auto r = matcher.recognize(img);
      if (r && *r == source_identity_index) ++hits;
    }
    return static_cast<real_t>(hits) / static_cast<real_t>(set.size());
  };
  const real_t clean = hit_fraction(clean_swaps);
  if (clean <= 0.0)
    throw RuntimeFailure("FaceSwap baseline failed; FN_acc undefined (no clean swap recognized as source)");
  return hit_fraction(disrupted_swaps) / clean;
}

}  // namespace dd
