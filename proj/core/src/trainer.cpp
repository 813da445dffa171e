#include "dd/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "dd/checkpoint.hpp"
#include "dd/image.hpp"
#include "dd/metrics.hpp"

namespace fs_std = std::filesystem;

namespace dd {
namespace {

std::uint64_t message_seed_for(std::uint64_t base, int image_index) {
  return base ^ (0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(image_index + 1));
}

std::string rng_state_string(const Rng& rng) {
  std::string out;
  for (std::uint64_t v : rng.state()) {
    if (!out.empty()) out += ",";
    out += std::to_string(v);
  }
  return out;
}

void restore_rng_from_string(Rng& rng, const std::string& s) {
  std::vector<std::uint64_t> state;
  std::size_t pos = 0;
  while (pos < s.size()) {
    std::size_t comma = s.find(',', pos);
    state.push_back(std::stoull(s.substr(pos, comma - pos)));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  rng.restore(state);
}

}  // namespace

TrainMode parse_train_mode(const std::string& name) {
  if (name == "dual_defense") return TrainMode::dual_defense;
  if (name == "ablate_untargeted") return TrainMode::ablate_untargeted;
  if (name == "ablate_targeted_original") return TrainMode::ablate_targeted_original;
  if (name == "ablate_no_se") return TrainMode::ablate_no_se;
  if (name == "ablate_no_sic") return TrainMode::ablate_no_sic;
  if (name == "ablate_no_adv") return TrainMode::ablate_no_adv;
  if (name == "ablate_no_sic_se") return TrainMode::ablate_no_sic_se;
  throw ConfigError("unknown training mode: " + name);
}

const char* train_mode_name(TrainMode mode) {
  switch (mode) {
    case TrainMode::dual_defense: return "dual_defense";
    case TrainMode::ablate_untargeted: return "ablate_untargeted";
    case TrainMode::ablate_targeted_original: return "ablate_targeted_original";
    case TrainMode::ablate_no_se: return "ablate_no_se";
    case TrainMode::ablate_no_sic: return "ablate_no_sic";
    case TrainMode::ablate_no_adv: return "ablate_no_adv";
    default: return "ablate_no_sic_se";
  }
}

void TrainConfig::validate() const {
  if (maxiter < 1) throw ConfigError("maxiter must be >= 1");
  if (deiter < 0 || deiter >= maxiter)
    throw ConfigError("deiter must satisfy 0 <= deiter < maxiter (got deiter=" +
                      std::to_string(deiter) + ", maxiter=" + std::to_string(maxiter) + ")");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (learning_rate <= 0) throw ConfigError("learning_rate must be positive");
  if (val_every < 1) throw ConfigError("val_every must be >= 1");
  weights.validate();
  arch.validate();
}

TrainConfig TrainConfig::from_config(const Config& cfg) {
  TrainConfig t;
  t.maxiter = static_cast<int>(cfg.get_int("maxiter", t.maxiter));
  t.deiter = static_cast<int>(cfg.get_int("deiter", t.deiter));
  t.batch_size = static_cast<int>(cfg.get_int("batch_size", t.batch_size));
  t.learning_rate = cfg.get_real("learning_rate", t.learning_rate);
  t.adam_beta1 = cfg.get_real("adam_beta1", t.adam_beta1);
  t.adam_beta2 = cfg.get_real("adam_beta2", t.adam_beta2);
  t.weights.lambda_en = cfg.get_real("lambda_en", t.weights.lambda_en);
  t.weights.lambda_s = cfg.get_real("lambda_s", t.weights.lambda_s);
  t.weights.lambda_adv = cfg.get_real("lambda_adv", t.weights.lambda_adv);
  t.weights.alpha = cfg.get_real("alpha", t.weights.alpha);
  t.weights.beta = cfg.get_real("beta", t.weights.beta);
  t.seed = static_cast<std::uint64_t>(cfg.get_int("train_seed", static_cast<std::int64_t>(t.seed)));
  t.mode = parse_train_mode(cfg.get("mode", "dual_defense"));
  t.val_every = static_cast<int>(cfg.get_int("val_every", t.val_every));
  t.sr_tau = cfg.get_real("sr_tau", t.sr_tau);
  t.arch.image_size = static_cast<int>(cfg.get_int("image_size", t.arch.image_size));
  t.arch.watermark_length =
      static_cast<int>(cfg.get_int("watermark_length", t.arch.watermark_length));
  t.arch.enc_feat = static_cast<int>(cfg.get_int("enc_feat", t.arch.enc_feat));
  t.arch.enc_body = static_cast<int>(cfg.get_int("enc_body", t.arch.enc_body));
  t.arch.se_reduction = static_cast<int>(cfg.get_int("se_reduction", t.arch.se_reduction));
  t.arch.dec_base = static_cast<int>(cfg.get_int("dec_base", t.arch.dec_base));
  t.arch.disc_base = static_cast<int>(cfg.get_int("disc_base", t.arch.disc_base));
  t.arch.residual_output = cfg.get_bool("residual_output", t.arch.residual_output);
  t.validate();
  return t;
}

namespace {

DualDefenseArch arch_for_mode(const TrainConfig& cfg) {
  DualDefenseArch arch = cfg.arch;
  if (cfg.mode == TrainMode::ablate_no_se || cfg.mode == TrainMode::ablate_no_sic_se)
    arch.use_se = false;
  return arch;
}

LossWeights weights_for_mode(const TrainConfig& cfg) {
  LossWeights w = cfg.weights;
  if (cfg.mode == TrainMode::ablate_no_sic || cfg.mode == TrainMode::ablate_no_sic_se)
    w.lambda_s = 0.0;
  if (cfg.mode == TrainMode::ablate_no_adv) w.lambda_adv = 0.0;
  return w;
}

}  // namespace

TrainSession::TrainSession(const TrainConfig& cfg, const FaceSwapModel& faceswap,
                           const PairedDataset& data, const FaceMatcher* matcher)
    : cfg_(cfg),
      faceswap_(faceswap),
      data_(data),
      matcher_(matcher),
      model_(arch_for_mode(cfg), cfg.seed),
      adam_enc_(params_of(model_.encoder_params()), cfg.learning_rate, cfg.adam_beta1,
                cfg.adam_beta2),
      adam_dec_(params_of(model_.decoder_params()), cfg.learning_rate, cfg.adam_beta1,
                cfg.adam_beta2),
      adam_disc_(params_of(model_.discriminator_params()), cfg.learning_rate, cfg.adam_beta1,
                 cfg.adam_beta2),
      shuffle_rng_(Rng(cfg.seed).split(2)),
      message_rng_(Rng(cfg.seed).split(1)) {
  cfg_.validate();
  if (!faceswap.trained())
    throw ConfigError("dual defense training requires a trained FaceSwap model");
  if (!faceswap.frozen())
    throw ConfigError("FaceSwap model must be frozen before dual defense training");
  if (faceswap.arch().image_size != cfg.arch.image_size)
    throw ConfigError("FaceSwap and watermark model disagree on image_size");
  if (data.split_t.train.empty()) throw ConfigError("target identity train split is empty");
  best_params_ = snapshot_params(model_.named_params());
  last_good_params_ = best_params_;
}

void TrainSession::run_epoch() {
  if (finished()) throw RuntimeFailure("run_epoch called after maxiter epochs");
  const int epoch = epoch_ + 1;
  const LossWeights weights = weights_for_mode(cfg_);
  const int length = cfg_.arch.watermark_length;

  std::vector<int> order = data_.split_t.train;
  shuffle_rng_.shuffle(order);

  EpochLog log;
  log.epoch = epoch;
  const bool decoder_active = epoch > cfg_.deiter;
  if (decoder_active) {
    log.l_wm_en = 0.0;
    log.l_wm_adv = 0.0;
  }
  int batches = 0;

  for (std::size_t begin = 0; begin < order.size();
       begin += static_cast<std::size_t>(cfg_.batch_size)) {
    const std::size_t end =
        std::min(begin + static_cast<std::size_t>(cfg_.batch_size), order.size());
    std::vector<const Tensor*> imgs;
    std::vector<WatermarkMessage> messages;
    for (std::size_t i = begin; i < end; ++i) {
      imgs.push_back(&data_.identity_t.images[static_cast<std::size_t>(order[i])]);
      WatermarkMessage m;
      m.bits.resize(static_cast<std::size_t>(length));
      for (auto& b : m.bits) b = static_cast<std::uint8_t>(message_rng_.bit());
      messages.push_back(std::move(m));
    }
    const Tensor bits = messages_to_tensor(messages);

    Var x = constant(stack_batch(imgs));
    Var x_w = model_.encode_batch(x, bits);

    // Victim-model pass: reconstruction and swap share one encoding.
    Var latent = faceswap_.encode(x_w);
    auto [tap_t, recon] = faceswap_.decode_with_tap(latent, FaceIdentity::target);
    auto [tap_s, x_adv] = faceswap_.decode_with_tap(latent, FaceIdentity::source);

    // Discriminator step (its gradients stop at the detached watermarked batch).
    Var d_real = model_.discriminate_batch(x);
    Var d_fake = model_.discriminate_batch(detach(x_w));
    Var l_d = loss_discriminator_from_scores(d_real, d_fake);
    adam_disc_.zero_grad();
    backward(l_d);
    adam_disc_.step();

    Var l_en = loss_encoding_mse(x, x_w);
    Var l_s = weights.lambda_s > 0.0 ? loss_structural_from_images(x, x_w)
                                     : constant(Tensor::scalar(0.0));
    Var l_adv;
    switch (cfg_.mode) {
      case TrainMode::ablate_no_adv:
        l_adv = constant(Tensor::scalar(0.0));
        break;
      case TrainMode::ablate_untargeted: {
        Tensor clean_swap;
        {
          NoGradGuard no_grad;
          clean_swap = faceswap_.forward_swap(constant(x->value), FaceIdentity::source)->value;
        }
        l_adv = loss_untargeted_ablation(x_adv, constant(clean_swap));
        break;
      }
      case TrainMode::ablate_targeted_original: {
        Tensor recon_clean;
        {
          NoGradGuard no_grad;
          recon_clean =
              faceswap_.forward_swap(constant(x->value), FaceIdentity::target)->value;
        }
        l_adv = loss_targeted_original_ablation(x_adv, constant(recon_clean));
        break;
      }
      default:
        l_adv = loss_adversarial(tap_t, tap_s);
        break;
    }
    Var l_img = loss_image(l_en, l_s, l_adv, weights);

    adam_enc_.zero_grad();
    adam_dec_.zero_grad();
    real_t wm_en_val = 0.0, wm_adv_val = 0.0;
    Var objective;
    if (decoder_active) {
      Var logits_en = model_.decode_logits(x_w);
      Var logits_adv = model_.decode_logits(x_adv);
      Var l_wm_en = bce_with_logits(bits, logits_en);
      Var l_wm_adv = bce_with_logits(bits, logits_adv);
      wm_en_val = l_wm_en->value.item();
      wm_adv_val = l_wm_adv->value.item();
      Var l_wm = add(l_wm_en, l_wm_adv);
      objective = loss_total(l_img, l_wm, weights.alpha, weights.beta);
    } else {
      objective = l_img;
    }

    const bool finite = std::isfinite(objective->value.item()) &&
                        std::isfinite(l_d->value.item());
    if (!finite) {
      restore_params(model_.named_params(), last_good_params_);
      throw TrainingDiverged("loss diverged (non-finite) in epoch " + std::to_string(epoch) +
                             "; parameters rolled back to the last completed epoch");
    }

    backward(objective);
    adam_enc_.step();
    if (decoder_active) adam_dec_.step();

    log.l_d += l_d->value.item();
    log.l_en += l_en->value.item();
    log.l_s += l_s->value.item();
    log.l_adv += l_adv->value.item();
    if (decoder_active) {
      *log.l_wm_en += wm_en_val;
      *log.l_wm_adv += wm_adv_val;
    }
    ++batches;
  }

  const real_t inv = batches > 0 ? 1.0 / batches : 0.0;
  log.l_d *= inv;
  log.l_en *= inv;
  log.l_s *= inv;
  log.l_adv *= inv;
  if (decoder_active) {
    *log.l_wm_en *= inv;
    *log.l_wm_adv *= inv;
  }

  epoch_ = epoch;
  last_good_params_ = snapshot_params(model_.named_params());

  if (epoch % cfg_.val_every == 0 || epoch == cfg_.maxiter) {
    ValSnapshot snap = validate_now();
    log.val = snap;
    if (snap.composite() > best_score_) {
      best_score_ = snap.composite();
      best_epoch_ = epoch;
      best_params_ = last_good_params_;
    }
  }
  logs_.push_back(std::move(log));
}

ValSnapshot TrainSession::validate_now() const {
  return validate_dual_defense(model_, faceswap_, data_, Split::val, matcher_, cfg_.sr_tau,
                               cfg_.seed ^ 0x76616c0000ULL);
}

DualDefenseModel TrainSession::best_model() const {
  DualDefenseModel out(model_.arch, model_.seed);
  restore_params(out.named_params(), best_params_);
  return out;
}

void TrainSession::write_epoch_csv(const std::string& path) const {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw RuntimeFailure("cannot write epoch log: " + path);
  os << "epoch,l_d,l_en,l_s,l_adv,l_wm_en,l_wm_adv,val_psnr,val_ssim,val_acc_org,val_acc_adv,"
        "val_fn_proxy,val_composite\n";
  os.precision(10);
  for (const auto& log : logs_) {
    os << log.epoch << ',' << log.l_d << ',' << log.l_en << ',' << log.l_s << ',' << log.l_adv
       << ',';
    if (log.l_wm_en) os << *log.l_wm_en;
    os << ',';
    if (log.l_wm_adv) os << *log.l_wm_adv;
    os << ',';
    if (log.val)
      os << log.val->psnr << ',' << log.val->ssim << ',' << log.val->acc_org << ','
         << log.val->acc_adv << ',' << log.val->fn_proxy << ',' << log.val->composite();
    else
      os << ",,,,,";
    os << '\n';
  }
}

void TrainSession::save_state(const std::string& path) const {
  CheckpointWriter w("ddtrain");
  w.set_meta_int("epoch", epoch_);
  w.set_meta_int("best_epoch", best_epoch_);
  w.set_meta("best_score", std::to_string(best_score_));
  w.set_meta_int("maxiter", cfg_.maxiter);
  w.set_meta_int("deiter", cfg_.deiter);
  w.set_meta_int("seed", static_cast<std::int64_t>(cfg_.seed));
  w.set_meta("mode", train_mode_name(cfg_.mode));
  w.set_meta("rng_shuffle", rng_state_string(shuffle_rng_));
  w.set_meta("rng_message", rng_state_string(message_rng_));
  const NamedParams named = model_.named_params();
  for (const auto& [name, v] : named) w.add("model." + name, v->value);
  for (std::size_t i = 0; i < best_params_.size(); ++i)
    w.add("best." + named[i].first, best_params_[i]);
  adam_enc_.save_state(w, "adam_enc");
  adam_dec_.save_state(w, "adam_dec");
  adam_disc_.save_state(w, "adam_disc");
  w.write_file(path);
}

TrainSession TrainSession::resume(const std::string& path, const TrainConfig& cfg,
                                  const FaceSwapModel& faceswap, const PairedDataset& data,
                                  const FaceMatcher* matcher) {
  Checkpoint c = Checkpoint::read_file(path, "ddtrain");
  if (c.meta_int("maxiter") != cfg.maxiter || c.meta_int("deiter") != cfg.deiter ||
      static_cast<std::uint64_t>(c.meta_int("seed")) != cfg.seed ||
      c.meta_at("mode") != train_mode_name(cfg.mode))
    throw ConfigError("resume: config does not match the saved training state");
  TrainSession s(cfg, faceswap, data, matcher);
  const NamedParams named = s.model_.named_params();
  for (const auto& [name, v] : named) v->value = c.tensor("model." + name);
  s.best_params_.clear();
  for (const auto& [name, v] : named) s.best_params_.push_back(c.tensor("best." + name));
  s.adam_enc_.load_state(c, "adam_enc");
  s.adam_dec_.load_state(c, "adam_dec");
  s.adam_disc_.load_state(c, "adam_disc");
  restore_rng_from_string(s.shuffle_rng_, c.meta_at("rng_shuffle"));
  restore_rng_from_string(s.message_rng_, c.meta_at("rng_message"));
  s.epoch_ = static_cast<int>(c.meta_int("epoch"));
  s.best_epoch_ = static_cast<int>(c.meta_int("best_epoch"));
  s.best_score_ = std::stod(c.meta_at("best_score"));
  s.last_good_params_ = snapshot_params(named);
  return s;
}

TrainResult train_dual_defense(const TrainConfig& cfg, const FaceSwapModel& faceswap,
                               const PairedDataset& data, const FaceMatcher* matcher,
                               const std::string& out_dir, bool verbose) {
  TrainSession session(cfg, faceswap, data, matcher);
  TrainResult result{DualDefenseModel(arch_for_mode(cfg), cfg.seed), {}, false, "", 0, 0};
  try {
    while (!session.finished()) {
      session.run_epoch();
      if (verbose && !session.logs().empty()) {
        const EpochLog& l = session.logs().back();
        std::cerr << "epoch " << l.epoch << " l_d " << l.l_d << " l_en " << l.l_en << " l_s "
                  << l.l_s << " l_adv " << l.l_adv;
        if (l.l_wm_en) std::cerr << " l_wm " << (*l.l_wm_en + *l.l_wm_adv);
        if (l.val)
          std::cerr << " | val psnr " << l.val->psnr << " acc_org " << l.val->acc_org
                    << " acc_adv " << l.val->acc_adv << " fn " << l.val->fn_proxy;
        std::cerr << "\n";
      }
    }
  } catch (const TrainingDiverged& e) {
    result.aborted = true;
    result.note = e.what();
  }
  if (session.best_composite() <= -1e29) {
    // Divergence before the first validation point: fall back to last good.
    result.model = session.model();
  } else {
    result.model = session.best_model();
  }
  result.logs = session.logs();
  result.best_epoch = session.best_epoch();
  result.best_composite = session.best_composite();

  if (!out_dir.empty()) {
    fs_std::create_directories(out_dir);
    session.write_epoch_csv((fs_std::path(out_dir) / "epoch_log.csv").string());
    session.save_state((fs_std::path(out_dir) / "latest.ddckpt").string());
    result.model.save((fs_std::path(out_dir) / "best.ddckpt").string(),
                      {{"mode", train_mode_name(cfg.mode)},
                       {"best_epoch", std::to_string(result.best_epoch)},
                       {"best_composite", std::to_string(result.best_composite)},
                       {"aborted", result.aborted ? "1" : "0"}});
  }
  return result;
}

ValSnapshot validate_dual_defense(const DualDefenseModel& model, const FaceSwapModel& faceswap,
                                  const PairedDataset& data, Split split,
                                  const FaceMatcher* matcher, real_t sr_tau,
                                  std::uint64_t message_seed) {
  NoGradGuard no_grad;
  const std::vector<int>& indices = data.split_t.of(split);
  if (indices.empty()) throw ConfigError("validate: empty split");
  const int length = model.arch.watermark_length;

  ValSnapshot snap;
  int disrupted_hits = 0, clean_hits = 0, attack_failures = 0;
  const int n = static_cast<int>(indices.size());

  for (int begin = 0; begin < n; begin += 16) {
    const int end = std::min(begin + 16, n);
    std::vector<const Tensor*> imgs;
    std::vector<WatermarkMessage> messages;
    for (int i = begin; i < end; ++i) {
      imgs.push_back(&data.identity_t.images[static_cast<std::size_t>(indices[static_cast<std::size_t>(i)])]);
      messages.push_back(sample_watermark(length, message_seed_for(message_seed, indices[static_cast<std::size_t>(i)])));
    }
    Var x = constant(stack_batch(imgs));
    Var x_w = model.encode_batch(x, messages_to_tensor(messages));
    Var latent = faceswap.encode(x_w);
    Var x_adv = faceswap.decode_image(latent, FaceIdentity::source);
    Var clean_swap = faceswap.forward_swap(x, FaceIdentity::source);
    Var logits_en = model.decode_logits(x_w);
    Var logits_adv = model.decode_logits(x_adv);

    for (int i = 0; i < end - begin; ++i) {
      Tensor xi = batch_slice(x->value, i);
      Tensor xwi = batch_slice(x_w->value, i);
      Tensor advi = batch_slice(x_adv->value, i);
      Tensor cleani = batch_slice(clean_swap->value, i);
      snap.psnr += psnr(xi, xwi);
      snap.ssim += ssim(xi, xwi);
      std::vector<real_t> len(static_cast<std::size_t>(length)), ladv(static_cast<std::size_t>(length));
      for (int j = 0; j < length; ++j) {
        len[static_cast<std::size_t>(j)] = logits_en->value.at2(i, j);
        ladv[static_cast<std::size_t>(j)] = logits_adv->value.at2(i, j);
      }
      snap.acc_org += bit_accuracy(messages[static_cast<std::size_t>(i)], bits_from_logits(len));
      snap.acc_adv += bit_accuracy(messages[static_cast<std::size_t>(i)], bits_from_logits(ladv));
      if (matcher) {
        auto rd = matcher->recognize(advi);
        auto rc = matcher->recognize(cleani);
        if (rd && *rd == 1) ++disrupted_hits;
        if (rc && *rc == 1) ++clean_hits;
      } else if (mse(advi, cleani) <= sr_tau) {
        ++attack_failures;
      }
    }
  }

  snap.psnr /= n;
  snap.ssim /= n;
  snap.acc_org /= n;
  snap.acc_adv /= n;
  if (matcher) {
    snap.fn_proxy = clean_hits > 0
                        ? static_cast<real_t>(disrupted_hits) / static_cast<real_t>(clean_hits)
                        : static_cast<real_t>(attack_failures) / n;
  } else {
    snap.fn_proxy = static_cast<real_t>(attack_failures) / n;
  }
  return snap;
}

AblationRow evaluate_original_setting(const DualDefenseModel& model,
                                      const FaceSwapModel& faceswap, const PairedDataset& data,
                                      const FaceMatcher& matcher, real_t sr_tau,
                                      std::uint64_t message_seed) {
  NoGradGuard no_grad;
  AblationRow row;
  const std::vector<int>& indices = data.split_t.test;
  if (indices.empty()) throw ConfigError("evaluate_original_setting: empty test split");
  const int length = model.arch.watermark_length;

  std::vector<Tensor> disrupted, clean;
  int n = 0;
  for (int idx : indices) {
    const Tensor& x = data.identity_t.images[static_cast<std::size_t>(idx)];
    WatermarkMessage msg = sample_watermark(length, message_seed_for(message_seed, idx));
    Tensor x_w = model.encode(x, msg);
    row.psnr += psnr(x, x_w);
    row.ssim += ssim(x, x_w);
    Tensor x_adv = faceswap.swap(x_w, FaceIdentity::source);
    Tensor clean_swap = faceswap.swap(x, FaceIdentity::source);
    row.acc_org += bit_accuracy(msg, model.decode(x_w).second);
    row.acc_adv += bit_accuracy(msg, model.decode(x_adv).second);
    disrupted.push_back(std::move(x_adv));
    clean.push_back(std::move(clean_swap));
    ++n;
  }
  row.psnr /= n;
  row.ssim /= n;
  row.acc_org /= n;
  row.acc_adv /= n;
  row.sr_mask = sr_mask(disrupted, clean, sr_tau);
  try {
    row.fn_acc = fn_acc(disrupted, clean, 1, matcher);
  } catch (const RuntimeFailure& e) {
    row.failed = true;
    row.note = e.what();
  }
  return row;
}

std::vector<AblationRow> run_ablation_suite(const TrainConfig& base_cfg,
                                            const FaceSwapModel& faceswap,
                                            const PairedDataset& data,
                                            const FaceMatcher& matcher,
                                            const std::string& out_dir, bool verbose) {
  const std::pair<const char*, TrainMode> modes[] = {
      {"w/o SIC", TrainMode::ablate_no_sic},
      {"w/o SENet", TrainMode::ablate_no_se},
      {"w/o SIC+SENet", TrainMode::ablate_no_sic_se},
      {"w/o Adv", TrainMode::ablate_no_adv},
      {"full", TrainMode::dual_defense},
  };
  std::vector<AblationRow> rows;
  for (const auto& [label, mode] : modes) {
    TrainConfig cfg = base_cfg;
    cfg.mode = mode;
    std::string mode_dir;
    if (!out_dir.empty())
      mode_dir = (fs_std::path(out_dir) / train_mode_name(mode)).string();
    AblationRow row;
    row.label = label;
    row.mode = mode;
    try {
      if (verbose) std::cerr << "== ablation mode " << label << " ==\n";
      TrainResult result = train_dual_defense(cfg, faceswap, data, &matcher, mode_dir, verbose);
      row = evaluate_original_setting(result.model, faceswap, data, matcher, cfg.sr_tau,
                                      cfg.seed ^ 0x74657374ULL);
      row.label = label;
      row.mode = mode;
      if (result.aborted) {
        row.failed = true;
        row.note = result.note;
      }
    } catch (const RuntimeFailure& e) {
      row.failed = true;
      row.note = e.what();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string ablation_table_text(const std::vector<AblationRow>& rows) {
  char buf[256];
  std::string out =
      "mode,psnr,ssim,fn_acc,sr_mask,acc_org,acc_adv,note\n";
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof(buf), "%s,%.3f,%.3f,%.3f,%.3f,%.3f,%.3f,%s\n", r.label.c_str(),
                  r.psnr, r.ssim, r.fn_acc, r.sr_mask, r.acc_org, r.acc_adv,
                  r.failed ? (r.note.empty() ? "failed" : r.note.c_str()) : "");
    out += buf;
  }
  return out;
}

}  // namespace dd
