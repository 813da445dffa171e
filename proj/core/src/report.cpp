#include "dd/report.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "dd/error.hpp"

namespace dd {
namespace {

const char* kMetricColumns[] = {"psnr",   "ssim",    "l1",      "perceptual",
                                "fn_acc", "sr_mask", "acc_org", "acc_adv"};

std::string fmt(real_t v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

}  // namespace

real_t EvaluationRow::at(const std::string& key) const {
  auto it = values.find(key);
  if (it == values.end())
    throw RuntimeFailure("evaluation row " + scenario + "/" + channel.label() +
                         " has no metric '" + key + "'");
  return it->second;
}

const EvaluationRow* EvaluationReport::find(const std::string& scenario,
                                            const std::string& channel_label) const {
  for (const auto& row : rows)
    if (row.scenario == scenario && row.channel.label() == channel_label) return &row;
  return nullptr;
}

std::string EvaluationReport::csv_text() const {
  std::string out;
  for (const auto& [k, v] : header) out += "# " + k + ": " + v + "\n";
  out += "scenario,channel,kind,parameter";
  for (const char* m : kMetricColumns) out += std::string(",") + m;
  out += ",annotation\n";
  for (const auto& row : rows) {
    out += row.scenario + "," + row.channel.label() + "," + channel_kind_name(row.channel.kind) +
           "," + fmt(row.channel.parameter);
    for (const char* m : kMetricColumns) {
      out += ",";
      if (row.has(m)) out += fmt(row.at(m));
    }
    out += "," + row.annotation + "\n";
  }
  return out;
}

std::string EvaluationReport::json_text() const {
  nlohmann::ordered_json j;
  for (const auto& [k, v] : header) j["header"][k] = v;
  j["rows"] = nlohmann::ordered_json::array();
  for (const auto& row : rows) {
    nlohmann::ordered_json r;
    r["scenario"] = row.scenario;
    r["channel"] = row.channel.label();
    r["kind"] = channel_kind_name(row.channel.kind);
    r["parameter"] = row.channel.parameter;
    for (const char* m : kMetricColumns)
      if (row.has(m)) r["metrics"][m] = row.at(m);
    if (!row.annotation.empty()) r["annotation"] = row.annotation;
    j["rows"].push_back(std::move(r));
  }
  return j.dump(2) + "\n";
}

std::string EvaluationReport::summary_text() const {
  std::string out =
      "channel            acc_org  fn_acc  sr_mask  acc_adv  worst_acc_adv\n";
  for (const auto& row : rows) {
    if (row.scenario != "best") continue;
    const EvaluationRow* normal = find("normal", row.channel.label());
    const EvaluationRow* worst = find("worst", row.channel.label());
    char buf[160];
    auto cell = [](const EvaluationRow* r, const char* key) {
      return r && r->has(key) ? fmt(r->at(key)).substr(0, 6) : std::string("   -  ");
    };
    std::snprintf(buf, sizeof(buf), "%-18s %7s %7s %8s %8s %10s\n", row.channel.label().c_str(),
                  cell(normal, "acc_org").c_str(), cell(&row, "fn_acc").c_str(),
                  cell(&row, "sr_mask").c_str(), cell(&row, "acc_adv").c_str(),
                  cell(worst, "acc_adv").c_str());
    out += buf;
  }
  return out;
}

void EvaluationReport::write_csv(const std::string& path) const {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw RuntimeFailure("cannot write report CSV: " + path);
  os << csv_text();
}

void EvaluationReport::write_json(const std::string& path) const {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw RuntimeFailure("cannot write report JSON: " + path);
  os << json_text();
}

void EvaluationReport::write_plots(const std::string& dir) const {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  const ChannelKind kinds[] = {ChannelKind::jpeg, ChannelKind::gaussian_noise,
                               ChannelKind::resize, ChannelKind::salt_pepper};
  const char* curves[] = {"acc_org", "acc_adv", "fn_acc", "sr_mask"};
  const char* colors[] = {"#1f77b4", "#2ca02c", "#d62728", "#9467bd"};

  for (ChannelKind kind : kinds) {
    // Collect best-scenario rows of this kind, ordered by parameter.
    std::vector<const EvaluationRow*> pts;
    for (const auto& row : rows)
      if (row.scenario == "best" && row.channel.kind == kind) pts.push_back(&row);
    if (pts.empty()) continue;
    std::sort(pts.begin(), pts.end(), [](const EvaluationRow* a, const EvaluationRow* b) {
      return a->channel.parameter < b->channel.parameter;
    });

    const int w = 520, h = 360, ml = 50, mr = 16, mt = 28, mb = 46;
    const int pw = w - ml - mr, ph = h - mt - mb;
    std::string svg = "<svg xmlns='http://www.w3.org/2000/svg' width='" + std::to_string(w) +
                      "' height='" + std::to_string(h) + "'>\n";
    svg += "<rect width='100%' height='100%' fill='white'/>\n";
    svg += "<text x='" + std::to_string(w / 2) + "' y='18' text-anchor='middle' font-size='14'>" +
           std::string(channel_kind_name(kind)) + " robustness</text>\n";
    // Axes and unit gridlines.
    for (int i = 0; i <= 4; ++i) {
      const int y = mt + ph - ph * i / 4;
      svg += "<line x1='" + std::to_string(ml) + "' y1='" + std::to_string(y) + "' x2='" +
             std::to_string(ml + pw) + "' y2='" + std::to_string(y) +
             "' stroke='#dddddd'/>\n<text x='" + std::to_string(ml - 8) + "' y='" +
             std::to_string(y + 4) + "' text-anchor='end' font-size='11'>" + fmt(i / 4.0).substr(0, 4) +
             "</text>\n";
    }
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const int x = ml + (pts.size() > 1 ? static_cast<int>(pw * i / (pts.size() - 1)) : pw / 2);
      svg += "<text x='" + std::to_string(x) + "' y='" + std::to_string(mt + ph + 18) +
             "' text-anchor='middle' font-size='11'>" + fmt(pts[i]->channel.parameter).substr(0, 5) +
             "</text>\n";
    }
    for (int c = 0; c < 4; ++c) {
      std::string poly;
      bool any = false;
      for (std::size_t i = 0; i < pts.size(); ++i) {
        if (!pts[i]->has(curves[c])) continue;
        real_t v = std::clamp<real_t>(pts[i]->at(curves[c]), 0.0, 1.0);
        const int x = ml + (pts.size() > 1 ? static_cast<int>(pw * i / (pts.size() - 1)) : pw / 2);
        const int y = mt + ph - static_cast<int>(ph * v);
        poly += std::to_string(x) + "," + std::to_string(y) + " ";
        any = true;
      }
      if (!any) continue;
      svg += "<polyline points='" + poly + "' fill='none' stroke='" + colors[c] +
             "' stroke-width='2'/>\n";
      svg += "<text x='" + std::to_string(ml + 6 + 110 * c) + "' y='" + std::to_string(h - 8) +
             "' font-size='11' fill='" + colors[c] + "'>" + curves[c] + "</text>\n";
    }
    svg += "</svg>\n";
    std::ofstream os((fs::path(dir) / (std::string(channel_kind_name(kind)) + ".svg")).string(),
                     std::ios::trunc);
    if (!os) throw RuntimeFailure("cannot write plot SVG in " + dir);
    os << svg;
  }
}

}  // namespace dd
