#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dd/config.hpp"
#include "dd/dataset.hpp"
#include "dd/error.hpp"
#include "dd/faceswap.hpp"
#include "dd/losses.hpp"
#include "dd/matcher.hpp"
#include "dd/optimizer.hpp"
#include "dd/watermark.hpp"

namespace dd {

enum class TrainMode {
  dual_defense,
  ablate_untargeted,
  ablate_targeted_original,
  ablate_no_se,
  ablate_no_sic,
  ablate_no_adv,
  ablate_no_sic_se,  // combined row of the ablation table
};
TrainMode parse_train_mode(const std::string& name);
const char* train_mode_name(TrainMode mode);

struct TrainConfig {
  int maxiter = 300;      // epochs
  int deiter = 30;        // decoder joins at epoch deiter+1
  int batch_size = 16;
  real_t learning_rate = 5e-5;
  real_t adam_beta1 = 0.9;
  real_t adam_beta2 = 0.999;
  LossWeights weights;
  std::uint64_t seed = 11;
  TrainMode mode = TrainMode::dual_defense;
  int val_every = 5;
  real_t sr_tau = 0.05;   // attack-success threshold used by the val proxy
  DualDefenseArch arch;

  void validate() const;
  /// Keys: maxiter, deiter, batch_size, learning_rate, lambda_en, lambda_s,
  /// lambda_adv, alpha, beta, train_seed, mode, val_every, sr_tau, plus the
  /// architecture keys (image_size, watermark_length, ...).
  static TrainConfig from_config(const Config& cfg);
};

/// Validation snapshot; the composite score drives best-model selection and
/// grows with adversariality and traceability and with invisibility.
struct ValSnapshot {
  real_t psnr = 0, ssim = 0, acc_org = 0, acc_adv = 0, fn_proxy = 0;
  real_t composite() const { return acc_adv - fn_proxy + psnr / 60.0; }
};

struct EpochLog {
  int epoch = 0;
  real_t l_d = 0, l_en = 0, l_s = 0, l_adv = 0;
  std::optional<real_t> l_wm_en, l_wm_adv;
  std::optional<ValSnapshot> val;
};

/// Raised when a loss turns non-finite; the session has already rolled the
/// parameters back to the end of the last completed epoch.
class TrainingDiverged : public RuntimeFailure {
 public:
  explicit TrainingDiverged(const std::string& what) : RuntimeFailure(what) {}
};

/// Epoch-stepped training per the schedule: every batch updates the
/// discriminator on its own objective first, then the encoder (and, after
/// deiter epochs, the decoder jointly) on the composite objective. The
/// victim model must arrive trained and frozen.
class TrainSession {
 public:
  TrainSession(const TrainConfig& cfg, const FaceSwapModel& faceswap,
               const PairedDataset& data, const FaceMatcher* matcher);

  void run_epoch();
  int epoch() const { return epoch_; }
  bool finished() const { return epoch_ >= cfg_.maxiter; }

  const std::vector<EpochLog>& logs() const { return logs_; }
  DualDefenseModel& model() { return model_; }
  const DualDefenseModel& model() const { return model_; }

  ValSnapshot validate_now() const;
  real_t best_composite() const { return best_score_; }
  int best_epoch() const { return best_epoch_; }
  /// Copy of the model at the best validation composite so far.
  DualDefenseModel best_model() const;

  void write_epoch_csv(const std::string& path) const;

  /// Full training state (model, optimizer moments, RNG streams, best
  /// snapshot) for bitwise-identical resumption.
  void save_state(const std::string& path) const;
  static TrainSession resume(const std::string& path, const TrainConfig& cfg,
                             const FaceSwapModel& faceswap, const PairedDataset& data,
                             const FaceMatcher* matcher);

  const TrainConfig& config() const { return cfg_; }

 private:
  void apply_best_to(DualDefenseModel& target) const;

  TrainConfig cfg_;
  const FaceSwapModel& faceswap_;
  const PairedDataset& data_;
  const FaceMatcher* matcher_;
  DualDefenseModel model_;
  Adam adam_enc_, adam_dec_, adam_disc_;
  Rng shuffle_rng_, message_rng_;
  int epoch_ = 0;
  std::vector<EpochLog> logs_;
  std::vector<Tensor> best_params_;
  real_t best_score_ = -1e30;
  int best_epoch_ = 0;
  std::vector<Tensor> last_good_params_;
};

struct TrainResult {
  DualDefenseModel model;       // best-validation parameters
  std::vector<EpochLog> logs;
  bool aborted = false;         // divergence rollback happened
  std::string note;
  int best_epoch = 0;
  real_t best_composite = 0;
};

/// End-to-end training. When out_dir is nonempty, writes epoch_log.csv plus
/// `latest` and `best` checkpoint bundles there. Divergence is caught,
/// annotated, and returns the best parameters reached.
TrainResult train_dual_defense(const TrainConfig& cfg, const FaceSwapModel& faceswap,
                               const PairedDataset& data, const FaceMatcher* matcher,
                               const std::string& out_dir = "", bool verbose = false);

/// Validation metrics of a standalone model (used by tests and tools).
ValSnapshot validate_dual_defense(const DualDefenseModel& model, const FaceSwapModel& faceswap,
                                  const PairedDataset& data, Split split,
                                  const FaceMatcher* matcher, real_t sr_tau,
                                  std::uint64_t message_seed);

struct AblationRow {
  std::string label;
  TrainMode mode;
  bool failed = false;
  std::string note;
  real_t psnr = 0, ssim = 0, fn_acc = 0, sr_mask = 0, acc_org = 0, acc_adv = 0;
};

/// Trains each ablation mode (shared seed) and evaluates the unprocessed
/// setting on the test split: full, w/o SIC, w/o SENet, w/o SIC+SENet,
/// w/o Adv. A mode that aborts keeps its row with a failure annotation.
std::vector<AblationRow> run_ablation_suite(const TrainConfig& base_cfg,
                                            const FaceSwapModel& faceswap,
                                            const PairedDataset& data,
                                            const FaceMatcher& matcher,
                                            const std::string& out_dir = "",
                                            bool verbose = false);

/// Ablation-table metrics of one trained model in the unprocessed setting.
AblationRow evaluate_original_setting(const DualDefenseModel& model,
                                      const FaceSwapModel& faceswap, const PairedDataset& data,
                                      const FaceMatcher& matcher, real_t sr_tau,
                                      std::uint64_t message_seed);

std::string ablation_table_text(const std::vector<AblationRow>& rows);

}  // namespace dd
