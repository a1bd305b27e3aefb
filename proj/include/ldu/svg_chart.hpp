#pragma once

#include <optional>
#include <span>
#include <string>

#include "ldu/metrics.hpp"

namespace ldu {

// Dual-axis line chart on a fixed 800x500 canvas: F1 (solid) and F1
// overall (dashed) against the left axis, defer rate against the right
// axis, and an optional dotted no-defer baseline F1. Missing F1 values
// break the line.
std::string render_curve_svg(std::span<const MetricsRow> rows, const std::string& title,
                             const std::string& param_label,
                             std::optional<double> baseline_f1);

}  // namespace ldu
