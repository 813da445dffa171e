#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dd/channel.hpp"
#include "dd/dataset.hpp"
#include "dd/faceswap.hpp"
#include "dd/matcher.hpp"
#include "dd/report.hpp"
#include "dd/watermark.hpp"

namespace dd {

struct EvalOptions {
  real_t sr_tau = 0.05;
  std::uint64_t message_seed = 97;
  bool dump_images = false;
  std::string dump_dir;
  int max_test_images = 0;  // 0 = whole test split

  /// Extra header entries (config echo, checkpoint provenance).
  std::vector<std::pair<std::string, std::string>> extra_header;
};

/// The three-scenario evaluation over a channel grid (the identity channel is
/// prepended automatically):
///   normal: decode after the channel only; quality columns compare the
///           processed watermarked image against the carrier.
///   best:   channel -> swap -> decode; quality/adversariality columns
///           compare the disrupted swap against the channel-matched clean
///           swap; traceability covers both the processed watermarked image
///           (acc_org) and the disrupted swap (acc_adv).
///   worst:  rows restricted to swaps the matcher still recognizes as the
///           source identity; empty subsets are annotated, not silently
///           dropped.
EvaluationReport evaluate_scenarios(const DualDefenseModel& model, const FaceSwapModel& faceswap,
                                    const FaceMatcher& matcher, const PairedDataset& data,
                                    const std::vector<ChannelSpec>& grid,
                                    const EvalOptions& options);

}  // namespace dd
