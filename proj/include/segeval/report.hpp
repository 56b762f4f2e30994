#pragma once

#include "segeval/eval.hpp"

#include <string>
#include <vector>

namespace segeval {

enum class ReportStyle { summary, per_class };
enum class ReportFormat { text, csv };

std::string report_to_json_string(const EvalReport& report);
EvalReport report_from_json_string(const std::string& text);

// One row per report (typically one per IoU kind): AP over all thresholds
// and AP at the first threshold, as percentages with two decimals.
std::string render_summary(const std::vector<EvalReport>& reports, ReportFormat fmt);

// One row per class with AP, AP at the first threshold and AR at the
// smallest detection cap, grouped by IoU kind, plus the aggregate row.
std::string render_class_table(const std::vector<EvalReport>& reports, ReportFormat fmt);

std::string render_report(const EvalReport& report, ReportStyle style, ReportFormat fmt);

}  // namespace segeval
