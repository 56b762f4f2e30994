#include "segeval/report.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace segeval {

using nlohmann::json;

namespace {

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(); }

double number_or_nan(const json& j) {
  return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

std::string percent(double v) {
  if (!std::isfinite(v)) return "n/a";
  char buf[16];
  std::snprintf(buf, sizeof buf, "%.2f", v * 100.0);
  return buf;
}

// "AP50:95" for the usual 0.50..0.95 list, general form otherwise.
std::string ap_range_label(const std::vector<double>& thresholds) {
  if (thresholds.size() == 1) return "AP" + std::to_string(int(std::lround(thresholds[0] * 100)));
  const int lo = static_cast<int>(std::lround(thresholds.front() * 100));
  const int hi = static_cast<int>(std::lround(thresholds.back() * 100));
  return "AP" + std::to_string(lo) + ":" + std::to_string(hi);
}

std::string ap_first_label(const std::vector<double>& thresholds) {
  return "AP" + std::to_string(int(std::lround(thresholds.front() * 100)));
}

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::string format(ReportFormat fmt) const {
    if (fmt == ReportFormat::csv) {
      std::string out;
      for (std::size_t i = 0; i < header.size(); ++i)
        out += (i ? "," : "") + header[i];
      out += "\n";
      for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + row[i];
        out += "\n";
      }
      return out;
    }
    std::vector<std::size_t> width(header.size());
    for (std::size_t i = 0; i < header.size(); ++i) width[i] = header[i].size();
    for (const auto& row : rows)
      for (std::size_t i = 0; i < row.size(); ++i)
        width[i] = std::max(width[i], row[i].size());
    std::ostringstream out;
    auto line = [&](const std::vector<std::string>& cells) {
      for (std::size_t i = 0; i < cells.size(); ++i) {
        out << (i ? "  " : "");
        out << cells[i];
        out << std::string(width[i] - cells[i].size(), ' ');
      }
      out << "\n";
    };
    line(header);
    std::size_t total = 0;
    for (std::size_t i = 0; i < width.size(); ++i) total += width[i] + (i ? 2 : 0);
    out << std::string(total, '-') << "\n";
    for (const auto& row : rows) line(row);
    return out.str();
  }
};

}  // namespace

std::string report_to_json_string(const EvalReport& r) {
  json j;
  j["label"] = r.label;
  j["mode"] = eval_mode_name(r.config.mode);
  j["iou_kind"] = iou_kind_name(r.config.iou_kind);
  j["thresholds"] = r.config.thresholds;
  j["max_detections"] = r.config.max_detections;
  j["interpolation_points"] = r.config.interpolation_points;
  j["include_other"] = r.config.include_other;
  j["frames"] = r.frames;
  j["gt_instances"] = r.gt_total;
  j["predictions"] = r.prediction_total;

  json classes = json::array();
  for (const auto& ce : r.per_class) {
    json c;
    c["id"] = ce.id;
    c["name"] = ce.name;
    c["gt_count"] = ce.gt_count;
    json ap = json::array(), recall = json::array(), curves = json::array();
    for (std::size_t t = 0; t < ce.ap.size(); ++t) {
      json ap_row = json::array(), rc_row = json::array();
      for (std::size_t m = 0; m < ce.ap[t].size(); ++m) {
        ap_row.push_back(finite_or_null(ce.ap[t][m]));
        rc_row.push_back(finite_or_null(ce.recall[t][m]));
      }
      ap.push_back(std::move(ap_row));
      recall.push_back(std::move(rc_row));
      curves.push_back(ce.curves[t]);
    }
    c["ap"] = std::move(ap);
    c["recall"] = std::move(recall);
    c["curves"] = std::move(curves);
    c["ap50"] = finite_or_null(ce.ap50);
    c["ap_mean"] = finite_or_null(ce.ap_mean);
    json ar = json::array();
    for (double v : ce.ar) ar.push_back(finite_or_null(v));
    c["ar"] = std::move(ar);
    classes.push_back(std::move(c));
  }
  j["per_class"] = std::move(classes);

  json agg;
  agg["ap50"] = finite_or_null(r.ap50);
  agg["ap_mean"] = finite_or_null(r.ap_mean);
  json ar = json::array();
  for (double v : r.ar) ar.push_back(finite_or_null(v));
  agg["ar"] = std::move(ar);
  j["aggregate"] = std::move(agg);
  return j.dump(2) + "\n";
}

EvalReport report_from_json_string(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("malformed report JSON: ") + e.what());
  }
  EvalReport r;
  r.label = j.value("label", std::string("run"));
  r.config.mode = j.at("mode") == "binary" ? EvalMode::binary : EvalMode::multiclass;
  r.config.iou_kind = j.at("iou_kind") == "bbox" ? IouKind::bbox : IouKind::mask;
  r.config.thresholds = j.at("thresholds").get<std::vector<double>>();
  r.config.max_detections = j.at("max_detections").get<std::vector<int>>();
  r.config.interpolation_points = j.value("interpolation_points", 101);
  r.config.include_other = j.value("include_other", true);
  r.frames = j.value("frames", 0);
  r.gt_total = j.value("gt_instances", 0);
  r.prediction_total = j.value("predictions", 0);
  for (const auto& c : j.value("per_class", json::array())) {
    ClassEval ce;
    ce.id = c.at("id");
    ce.name = c.at("name");
    ce.gt_count = c.at("gt_count");
    for (const auto& row : c.value("ap", json::array())) {
      std::vector<double> vals;
      for (const auto& v : row) vals.push_back(number_or_nan(v));
      ce.ap.push_back(std::move(vals));
    }
    for (const auto& row : c.value("recall", json::array())) {
      std::vector<double> vals;
      for (const auto& v : row) vals.push_back(number_or_nan(v));
      ce.recall.push_back(std::move(vals));
    }
    for (const auto& row : c.value("curves", json::array()))
      ce.curves.push_back(row.get<std::vector<double>>());
    ce.ap50 = number_or_nan(c.at("ap50"));
    ce.ap_mean = number_or_nan(c.at("ap_mean"));
    for (const auto& v : c.at("ar")) ce.ar.push_back(number_or_nan(v));
    r.classes.push_back({ce.id, ce.name});
    r.per_class.push_back(std::move(ce));
  }
  const auto& agg = j.at("aggregate");
  r.ap50 = number_or_nan(agg.at("ap50"));
  r.ap_mean = number_or_nan(agg.at("ap_mean"));
  for (const auto& v : agg.at("ar")) r.ar.push_back(number_or_nan(v));
  return r;
}

std::string render_summary(const std::vector<EvalReport>& reports, ReportFormat fmt) {
  if (reports.empty()) throw std::invalid_argument("render_summary: no reports");
  Table table;
  table.header = {"run", "mode"};
  for (const auto& r : reports) {
    const std::string kind = iou_kind_name(r.config.iou_kind);
    table.header.push_back(kind + " " + ap_range_label(r.config.thresholds));
    table.header.push_back(kind + " " + ap_first_label(r.config.thresholds));
  }
  std::vector<std::string> row{reports.front().label,
                               eval_mode_name(reports.front().config.mode)};
  for (const auto& r : reports) {
    row.push_back(percent(r.ap_mean));
    row.push_back(percent(r.ap50));
  }
  table.rows.push_back(std::move(row));
  return table.format(fmt);
}

std::string render_class_table(const std::vector<EvalReport>& reports, ReportFormat fmt) {
  if (reports.empty()) throw std::invalid_argument("render_class_table: no reports");
  const EvalReport& first = reports.front();
  for (const auto& r : reports)
    if (r.per_class.size() != first.per_class.size())
      throw std::invalid_argument("render_class_table: reports cover different classes");

  Table table;
  table.header = {"class"};
  for (const auto& r : reports) {
    const std::string kind = iou_kind_name(r.config.iou_kind);
    const int ar_cap = r.config.max_detections.front();
    table.header.push_back(kind + " " + ap_range_label(r.config.thresholds));
    table.header.push_back(kind + " " + ap_first_label(r.config.thresholds));
    table.header.push_back(kind + " AR" + std::to_string(ar_cap));
  }
  for (std::size_t c = 0; c < first.per_class.size(); ++c) {
    std::vector<std::string> row{first.per_class[c].name};
    for (const auto& r : reports) {
      const auto& ce = r.per_class[c];
      row.push_back(percent(ce.ap_mean));
      row.push_back(percent(ce.ap50));
      row.push_back(percent(ce.ar.empty() ? std::numeric_limits<double>::quiet_NaN()
                                          : ce.ar.front()));
    }
    table.rows.push_back(std::move(row));
  }
  std::vector<std::string> total{"(mean)"};
  for (const auto& r : reports) {
    total.push_back(percent(r.ap_mean));
    total.push_back(percent(r.ap50));
    total.push_back(percent(r.ar.empty() ? std::numeric_limits<double>::quiet_NaN()
                                         : r.ar.front()));
  }
  table.rows.push_back(std::move(total));
  return table.format(fmt);
}

std::string render_report(const EvalReport& report, ReportStyle style, ReportFormat fmt) {
  const std::vector<EvalReport> one{report};
  return style == ReportStyle::summary ? render_summary(one, fmt)
                                       : render_class_table(one, fmt);
}

}  // namespace segeval
