#pragma once

#include "honeytrap/detector.hpp"
#include "honeytrap/report.hpp"

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace honeytrap {

/// Detection/false-positive trade-off over a threshold grid, sorted by threshold.
/// Throws std::invalid_argument on an empty grid or log.
std::vector<RocPoint> roc_sweep(std::span<const CheckInEvent> events, const TruthLabels& truth,
                                const DetectorConfig& config, std::span<const double> thresholds);

/// Total fakes with honeypots over total fakes without. Throws when the baseline has none.
double containment_ratio(const RunReport& with_honeypots, const RunReport& without_honeypots);

enum class ReportFormat { Csv, Json, Markdown };

ReportFormat report_format_from_string(std::string_view s);

std::string render_report(const RunReport& report, ReportFormat format);
std::string render_sweep(std::span<const RocPoint> sweep, ReportFormat format);

/// CSV header: threshold,detection_rate,false_positive_rate,median_time_to_detection,detected_fraction
std::string roc_csv(std::span<const RocPoint> sweep);

} // namespace honeytrap
