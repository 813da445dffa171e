#pragma once

#include <map>
#include <string>
#include <vector>

#include "dd/channel.hpp"

namespace dd {

/// One (scenario, channel) cell row. Metrics that do not apply to a scenario
/// are absent from `values`; the annotation says why a row is partial.
struct EvaluationRow {
  std::string scenario;  // "normal" | "best" | "worst"
  ChannelSpec channel;
  std::map<std::string, real_t> values;
  std::string annotation;

  bool has(const std::string& key) const { return values.count(key) != 0; }
  real_t at(const std::string& key) const;
};

/// Self-describing result table: every threshold and interpretation choice
/// that shaped the numbers is serialized into the header.
struct EvaluationReport {
  std::map<std::string, std::string> header;
  std::vector<EvaluationRow> rows;

  const EvaluationRow* find(const std::string& scenario, const std::string& channel_label) const;

  std::string csv_text() const;
  std::string json_text() const;
  /// 17-line per-channel summary (key metrics from all three scenarios).
  std::string summary_text() const;

  void write_csv(const std::string& path) const;
  void write_json(const std::string& path) const;
  /// One SVG per channel kind with metric-vs-parameter curves.
  void write_plots(const std::string& dir) const;
};

}  // namespace dd
