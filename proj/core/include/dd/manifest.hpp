#pragma once

#include <cstdint>
#include <string>

namespace dd {

inline constexpr const char* kArtifactVersion = "dualdefense 0.1.0";

/// Provenance record appended to <out_dir>/manifest.tsv; one manifest file
/// per output directory, append-only.
struct RunManifest {
  std::string command;
  std::string config_hash = "-";
  std::string seeds = "-";
  std::string inputs = "-";
  std::string outputs = "-";
  std::int64_t wall_ms = 0;
};

void append_manifest(const std::string& out_dir, const RunManifest& manifest);

}  // namespace dd
