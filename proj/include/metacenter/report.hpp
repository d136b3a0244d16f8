#pragma once

// Output formats for training results: the comparison table and JSON, loss
// curve CSV and SVG.

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>

#include <json.hpp>

#include "metacenter/training.hpp"

namespace metacenter {

// Machine-readable comparison. Holds only quantities fixed by the data,
// config and seed, so equal runs give byte-identical dumps; wall time is
// left to the table and the run manifest.
nlohmann::json report_to_json(const ComparisonReport& report);

// Aligned plain-text table, one row per architecture, wall time included.
std::string format_report_table(const ComparisonReport& report);

// `iteration,train_mse,test_mse`, 17 significant digits.
void write_loss_curve_csv(std::ostream& out, const LossCurve& curve);
void write_loss_curve_csv(const std::filesystem::path& path, const LossCurve& curve);

// Train and test polylines against iteration with labeled axes.
std::string loss_curve_svg(const LossCurve& curve, std::string_view title);

void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace metacenter
