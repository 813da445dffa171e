// Command line front end: one subcommand per pipeline stage.
//
// Exit codes: 0 success, 2 usage/config error, 3 runtime failure.

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>

#include "dd/channel.hpp"
#include "dd/config.hpp"
#include "dd/dataset.hpp"
#include "dd/error.hpp"
#include "dd/evaluator.hpp"
#include "dd/faceswap.hpp"
#include "dd/image.hpp"
#include "dd/manifest.hpp"
#include "dd/matcher.hpp"
#include "dd/metrics.hpp"
#include "dd/synth_faces.hpp"
#include "dd/trainer.hpp"
#include "dd/watermark.hpp"

namespace fs = std::filesystem;
using dd::Config;

namespace {

struct Timer {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  std::int64_t ms() const {
    return std::chrono::duration_cast<std::chrono::milliseconds>(
               std::chrono::steady_clock::now() - start)
        .count();
  }
};

std::string resolve_path(const Config& cfg, const std::string& flag_value,
                         const std::string& key) {
  if (!flag_value.empty()) return flag_value;
  return cfg.require(key);
}

dd::PairedDataset load_dataset(const Config& cfg) {
  return dd::load_identity_pair(cfg.require("data_root"), cfg.require("identity_t"),
                                cfg.require("identity_s"),
                                static_cast<int>(cfg.get_int("image_size", 64)),
                                static_cast<std::uint64_t>(cfg.get_int("split_seed", 1)));
}

dd::WatermarkMessage message_from_flags(const std::string& bits, const std::string& hex,
                                        int length) {
  if (!bits.empty() && !hex.empty())
    throw dd::ConfigError("pass either --bits or --hex, not both");
  if (!bits.empty()) {
    dd::WatermarkMessage m = dd::WatermarkMessage::from_bitstring(bits);
    if (m.length() != length)
      throw dd::ConfigError("watermark has " + std::to_string(m.length()) +
                            " bits but the model expects " + std::to_string(length));
    return m;
  }
  if (!hex.empty()) return dd::WatermarkMessage::from_hex(hex, length);
  throw dd::ConfigError("missing watermark: pass --bits or --hex");
}

int cmd_make_corpus(const std::string& out, int identities, int count, int size,
                    std::uint64_t seed) {
  Timer timer;
  auto names = dd::generate_corpus(out, identities, count, size, seed);
  dd::RunManifest m;
  m.command = "make-corpus";
  m.seeds = std::to_string(seed);
  m.outputs = out;
  m.wall_ms = timer.ms();
  dd::append_manifest(out, m);
  std::cout << "wrote " << identities << " identities x " << count << " images under " << out
            << "\n";
  for (const auto& n : names) std::cout << "  " << n << "\n";
  return 0;
}

int cmd_train_faceswap(const std::string& config_path, const std::string& out) {
  Timer timer;
  Config cfg = Config::from_file(config_path);
  dd::PairedDataset data = load_dataset(cfg);
  dd::FaceSwapArch arch;
  arch.image_size = data.image_size;
  arch.latent_channels = static_cast<int>(cfg.get_int("fs_latent_channels", 16));
  dd::FaceSwapTrainOptions opt;
  opt.epochs = static_cast<int>(cfg.get_int("fs_epochs", 150));
  opt.batch_size = static_cast<int>(cfg.get_int("fs_batch", 16));
  opt.learning_rate = cfg.get_real("fs_lr", 2e-4);
  opt.seed = static_cast<std::uint64_t>(cfg.get_int("fs_seed", 7));
  opt.val_every = static_cast<int>(cfg.get_int("fs_val_every", 5));
  opt.verbose = cfg.get_bool("verbose", false);

  dd::FaceSwapModel model = dd::train_faceswap(data, arch, opt);
  fs::create_directories(out);
  const std::string ckpt = (fs::path(out) / "faceswap.ddckpt").string();
  model.save(ckpt);
  data.write_split_manifest((fs::path(out) / "splits.tsv").string());
  auto [psnr_t, psnr_s] = dd::faceswap_val_psnr(model, data);
  std::cout << "faceswap checkpoint: " << ckpt << "\n";
  std::cout << "val reconstruction PSNR: " << psnr_t << " dB (" << data.identity_t.name << "), "
            << psnr_s << " dB (" << data.identity_s.name << ")\n";

  dd::RunManifest m;
  m.command = "train-faceswap";
  m.config_hash = cfg.hash_hex();
  m.seeds = "fs_seed=" + std::to_string(opt.seed) + ",split_seed=" + std::to_string(data.seed);
  m.inputs = cfg.require("data_root");
  m.outputs = ckpt;
  m.wall_ms = timer.ms();
  dd::append_manifest(out, m);
  return 0;
}

int cmd_train_matcher(const std::string& config_path, const std::string& out) {
  Timer timer;
  Config cfg = Config::from_file(config_path);
  dd::PairedDataset data = load_dataset(cfg);
  dd::MatcherTrainOptions opt;
  opt.epochs = static_cast<int>(cfg.get_int("matcher_epochs", 20));
  opt.batch_per_identity = static_cast<int>(cfg.get_int("matcher_batch_per_identity", 8));
  opt.learning_rate = cfg.get_real("matcher_lr", 1e-3);
  opt.margin = cfg.get_real("matcher_margin", 0.4);
  opt.seed = static_cast<std::uint64_t>(cfg.get_int("matcher_seed", 23));
  opt.min_accuracy = cfg.get_real("matcher_min_accuracy", 0.9);
  opt.verbose = cfg.get_bool("verbose", false);

  dd::FaceMatcher matcher = dd::train_face_matcher(data, opt);
  fs::create_directories(out);
  const std::string ckpt = (fs::path(out) / "matcher.ddckpt").string();
  matcher.save(ckpt);
  std::cout << "matcher checkpoint: " << ckpt << "\n";
  std::cout << "clean accuracy: " << matcher.clean_accuracy(0) << " ("
            << data.identity_t.name << "), " << matcher.clean_accuracy(1) << " ("
            << data.identity_s.name << "); tau=" << matcher.threshold() << "\n";

  dd::RunManifest m;
  m.command = "train-matcher";
  m.config_hash = cfg.hash_hex();
  m.seeds = "matcher_seed=" + std::to_string(opt.seed);
  m.inputs = cfg.require("data_root");
  m.outputs = ckpt;
  m.wall_ms = timer.ms();
  dd::append_manifest(out, m);
  return 0;
}

int cmd_train(const std::string& config_path, const std::string& faceswap_flag,
              const std::string& matcher_flag, const std::string& out) {
  Timer timer;
  Config cfg = Config::from_file(config_path);
  dd::PairedDataset data = load_dataset(cfg);
  dd::FaceSwapModel faceswap =
      dd::FaceSwapModel::load(resolve_path(cfg, faceswap_flag, "faceswap_checkpoint"));
  faceswap.freeze();

  std::optional<dd::FaceMatcher> matcher;
  std::string matcher_path = matcher_flag.empty() ? cfg.get("matcher_checkpoint", "") : matcher_flag;
  if (!matcher_path.empty()) matcher = dd::FaceMatcher::load(matcher_path);

  dd::TrainConfig tc = dd::TrainConfig::from_config(cfg);
  tc.arch.image_size = data.image_size;
  dd::TrainResult result = dd::train_dual_defense(tc, faceswap, data, matcher ? &*matcher : nullptr,
                                                  out, cfg.get_bool("verbose", false));
  std::cout << "best epoch " << result.best_epoch << " composite " << result.best_composite
            << (result.aborted ? " (aborted: " + result.note + ")" : "") << "\n";
  std::cout << "checkpoints: " << (fs::path(out) / "best.ddckpt").string() << ", "
            << (fs::path(out) / "latest.ddckpt").string() << "\n";

  dd::RunManifest m;
  m.command = "train";
  m.config_hash = cfg.hash_hex();
  m.seeds = "train_seed=" + std::to_string(tc.seed) + ",split_seed=" + std::to_string(data.seed);
  m.inputs = cfg.require("data_root");
  m.outputs = out;
  m.wall_ms = timer.ms();
  dd::append_manifest(out, m);
  return result.aborted ? 3 : 0;
}

int cmd_embed(const std::string& checkpoint, const std::string& image_path,
              const std::string& bits, const std::string& hex, const std::string& out_image) {
  Timer timer;
  dd::DualDefenseModel model = dd::DualDefenseModel::load(checkpoint);
  dd::Tensor img = dd::load_image_file(image_path);
  if (img.dim(1) != model.arch.image_size || img.dim(2) != model.arch.image_size)
    img = dd::resize_bilinear(img, model.arch.image_size, model.arch.image_size);
  dd::clamp01_inplace(img);
  dd::WatermarkMessage msg = message_from_flags(bits, hex, model.arch.watermark_length);
  dd::Tensor watermarked = model.encode(img, msg);
  dd::save_png(out_image, watermarked);
  std::cout << "embedded " << msg.to_hex() << " -> " << out_image
            << " (psnr vs carrier: " << dd::psnr(img, watermarked) << " dB)\n";

  dd::RunManifest m;
  m.command = "embed";
  m.inputs = image_path;
  m.outputs = out_image;
  m.wall_ms = timer.ms();
  dd::append_manifest(fs::path(out_image).parent_path().string(), m);
  return 0;
}

int cmd_extract(const std::string& checkpoint, const std::string& image_path) {
  dd::DualDefenseModel model = dd::DualDefenseModel::load(checkpoint);
  dd::Tensor img = dd::load_image_file(image_path);
  if (img.dim(1) != model.arch.image_size || img.dim(2) != model.arch.image_size)
    img = dd::resize_bilinear(img, model.arch.image_size, model.arch.image_size);
  dd::clamp01_inplace(img);
  auto [logits, message] = model.decode(img);
  std::cout << "hex: " << message.to_hex() << "\n";
  std::cout << "bits: " << message.to_bitstring() << "\n";
  std::cout << "confidence:";
  for (dd::real_t l : logits) {
    const dd::real_t p = 1.0 / (1.0 + std::exp(-l));
    std::printf(" %.3f", p >= 0.5 ? p : 1.0 - p);
  }
  std::cout << "\n";
  return 0;
}

int cmd_swap(const std::string& checkpoint, const std::string& image_path,
             const std::string& identity, const std::string& out_image) {
  Timer timer;
  dd::FaceSwapModel model = dd::FaceSwapModel::load(checkpoint);
  dd::Tensor img = dd::load_image_file(image_path);
  if (img.dim(1) != model.arch().image_size || img.dim(2) != model.arch().image_size)
    img = dd::resize_bilinear(img, model.arch().image_size, model.arch().image_size);
  dd::clamp01_inplace(img);
  dd::Tensor swapped = model.swap(img, dd::parse_identity(identity));
  dd::save_png(out_image, swapped);
  std::cout << "swapped with decoder " << identity << " -> " << out_image << "\n";

  dd::RunManifest m;
  m.command = "swap";
  m.inputs = image_path;
  m.outputs = out_image;
  m.wall_ms = timer.ms();
  dd::append_manifest(fs::path(out_image).parent_path().string(), m);
  return 0;
}

int cmd_evaluate(const std::string& config_path, const std::string& checkpoint_flag,
                 const std::string& faceswap_flag, const std::string& matcher_flag,
                 const std::string& out, bool plots, bool dump_samples) {
  Timer timer;
  Config cfg = Config::from_file(config_path);
  dd::PairedDataset data = load_dataset(cfg);
  dd::DualDefenseModel model =
      dd::DualDefenseModel::load(resolve_path(cfg, checkpoint_flag, "dualdefense_checkpoint"));
  dd::FaceSwapModel faceswap =
      dd::FaceSwapModel::load(resolve_path(cfg, faceswap_flag, "faceswap_checkpoint"));
  faceswap.freeze();
  dd::FaceMatcher matcher =
      dd::FaceMatcher::load(resolve_path(cfg, matcher_flag, "matcher_checkpoint"));
  if (model.arch.image_size != data.image_size)
    throw dd::ConfigError("checkpoint image_size " + std::to_string(model.arch.image_size) +
                          " does not match config image_size " + std::to_string(data.image_size));

  dd::EvalOptions opt;
  opt.sr_tau = cfg.get_real("sr_tau", 0.05);
  opt.message_seed = static_cast<std::uint64_t>(cfg.get_int("eval_message_seed", 97));
  opt.max_test_images = static_cast<int>(cfg.get_int("eval_max_images", 0));
  opt.dump_images = dump_samples;
  opt.dump_dir = (fs::path(out) / "samples").string();
  opt.extra_header.emplace_back("config_hash", cfg.hash_hex());

  auto grid = dd::default_channel_grid(static_cast<std::uint64_t>(cfg.get_int("channel_seed", 1234)));
  dd::EvaluationReport report = dd::evaluate_scenarios(model, faceswap, matcher, data, grid, opt);

  fs::create_directories(out);
  report.write_csv((fs::path(out) / "report.csv").string());
  report.write_json((fs::path(out) / "report.json").string());
  if (plots) report.write_plots((fs::path(out) / "plots").string());
  std::cout << report.summary_text();
  std::cout << "report: " << (fs::path(out) / "report.csv").string() << "\n";

  dd::RunManifest m;
  m.command = "evaluate";
  m.config_hash = cfg.hash_hex();
  m.seeds = "eval_message_seed=" + std::to_string(opt.message_seed);
  m.inputs = cfg.require("data_root");
  m.outputs = out;
  m.wall_ms = timer.ms();
  dd::append_manifest(out, m);
  return 0;
}

int cmd_ablate(const std::string& config_path, const std::string& faceswap_flag,
               const std::string& matcher_flag, const std::string& out) {
  Timer timer;
  Config cfg = Config::from_file(config_path);
  dd::PairedDataset data = load_dataset(cfg);
  dd::FaceSwapModel faceswap =
      dd::FaceSwapModel::load(resolve_path(cfg, faceswap_flag, "faceswap_checkpoint"));
  faceswap.freeze();
  dd::FaceMatcher matcher =
      dd::FaceMatcher::load(resolve_path(cfg, matcher_flag, "matcher_checkpoint"));

  dd::TrainConfig tc = dd::TrainConfig::from_config(cfg);
  tc.arch.image_size = data.image_size;
  auto rows = dd::run_ablation_suite(tc, faceswap, data, matcher, out,
                                     cfg.get_bool("verbose", false));
  const std::string table = dd::ablation_table_text(rows);
  fs::create_directories(out);
  std::ofstream os((fs::path(out) / "ablation.csv").string(), std::ios::trunc);
  os << table;
  std::cout << table;

  dd::RunManifest m;
  m.command = "ablate";
  m.config_hash = cfg.hash_hex();
  m.seeds = "train_seed=" + std::to_string(tc.seed);
  m.inputs = cfg.require("data_root");
  m.outputs = out;
  m.wall_ms = timer.ms();
  dd::append_manifest(out, m);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adversarial, traceable watermarking for face-swap autoencoders"};
  app.require_subcommand(1);

  std::string config_path, out = "out";
  std::string checkpoint, faceswap_ckpt, matcher_ckpt;
  std::string image_path, out_image, bits, hex, identity = "L_s";
  bool plots = false, dump_samples = false;
  int identities = 2, count = 250, size = 64;
  std::uint64_t seed = 5;

  auto* mk = app.add_subcommand("make-corpus", "Generate a synthetic two-identity face corpus");
  mk->add_option("--out", out, "Output directory")->required();
  mk->add_option("--identities", identities, "Number of identities");
  mk->add_option("--count", count, "Images per identity");
  mk->add_option("--size", size, "Image size (multiple of 16)");
  mk->add_option("--seed", seed, "Corpus seed");

  auto* tf = app.add_subcommand("train-faceswap", "Train the victim autoencoder");
  tf->add_option("--config", config_path, "Config file")->required();
  tf->add_option("--out", out, "Output directory");

  auto* tm = app.add_subcommand("train-matcher", "Train the identity matcher");
  tm->add_option("--config", config_path, "Config file")->required();
  tm->add_option("--out", out, "Output directory");

  auto* tr = app.add_subcommand("train", "Train the watermark encoder/decoder/discriminator");
  tr->add_option("--config", config_path, "Config file")->required();
  tr->add_option("--faceswap", faceswap_ckpt, "FaceSwap checkpoint (or faceswap_checkpoint key)");
  tr->add_option("--matcher", matcher_ckpt, "Matcher checkpoint (optional)");
  tr->add_option("--out", out, "Output directory");

  auto* em = app.add_subcommand("embed", "Embed a watermark into an image");
  em->add_option("--checkpoint", checkpoint, "Dual defense checkpoint")->required();
  em->add_option("--image", image_path, "Input image")->required();
  em->add_option("--bits", bits, "Watermark as a 0/1 string");
  em->add_option("--hex", hex, "Watermark as hex (MSB first)");
  em->add_option("--out-image", out_image, "Output PNG")->required();

  auto* ex = app.add_subcommand("extract", "Extract the watermark from an image");
  ex->add_option("--checkpoint", checkpoint, "Dual defense checkpoint")->required();
  ex->add_option("--image", image_path, "Input image")->required();

  auto* sw = app.add_subcommand("swap", "Run the victim face swap");
  sw->add_option("--faceswap", faceswap_ckpt, "FaceSwap checkpoint")->required();
  sw->add_option("--image", image_path, "Input image")->required();
  sw->add_option("--identity", identity, "Decoder identity: L_t or L_s");
  sw->add_option("--out-image", out_image, "Output PNG")->required();

  auto* ev = app.add_subcommand("evaluate", "Three-scenario evaluation over the channel grid");
  ev->add_option("--config", config_path, "Config file")->required();
  ev->add_option("--checkpoint", checkpoint, "Dual defense checkpoint");
  ev->add_option("--faceswap", faceswap_ckpt, "FaceSwap checkpoint");
  ev->add_option("--matcher", matcher_ckpt, "Matcher checkpoint");
  ev->add_option("--out", out, "Output directory");
  ev->add_flag("--plots", plots, "Write metric-vs-parameter SVG plots");
  ev->add_flag("--dump-samples", dump_samples, "Dump per-channel sample images");

  auto* ab = app.add_subcommand("ablate", "Train and compare the ablation modes");
  ab->add_option("--config", config_path, "Config file")->required();
  ab->add_option("--faceswap", faceswap_ckpt, "FaceSwap checkpoint");
  ab->add_option("--matcher", matcher_ckpt, "Matcher checkpoint");
  ab->add_option("--out", out, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    app.exit(e);
    return 2;
  }

  try {
    if (mk->parsed()) return cmd_make_corpus(out, identities, count, size, seed);
    if (tf->parsed()) return cmd_train_faceswap(config_path, out);
    if (tm->parsed()) return cmd_train_matcher(config_path, out);
    if (tr->parsed()) return cmd_train(config_path, faceswap_ckpt, matcher_ckpt, out);
    if (em->parsed()) return cmd_embed(checkpoint, image_path, bits, hex, out_image);
    if (ex->parsed()) return cmd_extract(checkpoint, image_path);
    if (sw->parsed()) return cmd_swap(faceswap_ckpt, image_path, identity, out_image);
    if (ev->parsed())
      return cmd_evaluate(config_path, checkpoint, faceswap_ckpt, matcher_ckpt, out, plots,
                          dump_samples);
    if (ab->parsed()) return cmd_ablate(config_path, faceswap_ckpt, matcher_ckpt, out);
  } catch (const dd::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 2;
}
