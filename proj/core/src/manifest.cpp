#include "dd/manifest.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "dd/error.hpp"

namespace dd {

void append_manifest(const std::string& out_dir, const RunManifest& m) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  const fs::path path = fs::path(out_dir) / "manifest.tsv";
  const bool fresh = !fs::exists(path);
  std::ofstream os(path, std::ios::app);
  if (!os) throw RuntimeFailure("cannot append manifest: " + path.string());
  if (fresh)
    os << "# " << kArtifactVersion
       << " manifest\ntimestamp\tcommand\tconfig_hash\tseeds\tinputs\toutputs\tversion\twall_ms\n";

  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char stamp[32];
  std::tm tm_utc{};
  gmtime_r(&t, &tm_utc);
  std::strftime(stamp, sizeof(stamp), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);

  os << stamp << '\t' << m.command << '\t' << m.config_hash << '\t' << m.seeds << '\t'
     << m.inputs << '\t' << m.outputs << '\t' << kArtifactVersion << '\t' << m.wall_ms << '\n';
}

}  // namespace dd
