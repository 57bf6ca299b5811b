#include "honeytrap/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace honeytrap {

std::vector<RocPoint> roc_sweep(std::span<const CheckInEvent> events, const TruthLabels& truth,
                                const DetectorConfig& config, std::span<const double> thresholds)
{
    if (thresholds.empty()) {
        throw std::invalid_argument("roc_sweep: empty threshold grid");
    }
    if (events.empty()) {
        throw std::invalid_argument("roc_sweep: empty event log");
    }
    std::vector<double> grid(thresholds.begin(), thresholds.end());
    std::sort(grid.begin(), grid.end());
    const auto rows = sweep_threshold(events, truth, config, grid);
    std::vector<RocPoint> points;
    points.reserve(rows.size());
    for (const auto& row : rows) {
        RocPoint p;
        p.threshold = row.threshold;
        p.detection_rate = row.detection_rate;
        p.false_positive_rate = row.false_positive_rate;
        p.median_time_to_detection = row.median_time_to_detection;
        p.detected_fraction = row.cheaters == 0 ? 0.0 : static_cast<double>(row.detected) / row.cheaters;
        points.push_back(p);
    }
    return points;
}

double containment_ratio(const RunReport& with_honeypots, const RunReport& without_honeypots)
{
    if (without_honeypots.total_fakes == 0) {
        throw std::invalid_argument("containment_ratio: baseline run has no fake check-ins");
    }
    return static_cast<double>(with_honeypots.total_fakes) / static_cast<double>(without_honeypots.total_fakes);
}

ReportFormat report_format_from_string(std::string_view s)
{
    if (s == "csv") {
        return ReportFormat::Csv;
    }
    if (s == "json") {
        return ReportFormat::Json;
    }
    if (s == "md" || s == "markdown") {
        return ReportFormat::Markdown;
    }
    throw std::invalid_argument("unknown format '" + std::string(s) + "' (expected csv, json or md)");
}

namespace {

std::string number(double v)
{
    if (std::isinf(v)) {
        return v > 0 ? "inf" : "-inf";
    }
    std::ostringstream out;
    out.precision(17);
    out << v;
    return out.str();
}

std::string short_number(double v)
{
    if (std::isinf(v)) {
        return v > 0 ? "inf" : "-inf";
    }
    std::ostringstream out;
    out.precision(4);
    out << v;
    return out.str();
}

std::string markdown_sweep(std::span<const RocPoint> sweep)
{
    std::ostringstream out;
    out << "| L | detection rate | false-positive rate | median time to detection | detected fraction |\n";
    out << "|---|---|---|---|---|\n";
    for (const auto& p : sweep) {
        out << "| " << short_number(p.threshold) << " | " << short_number(p.detection_rate) << " | "
            << short_number(p.false_positive_rate) << " | "
            << (p.median_time_to_detection ? short_number(*p.median_time_to_detection) : "-") << " | "
            << short_number(p.detected_fraction) << " |\n";
    }
    return out.str();
}

std::string optional_text(const std::optional<double>& v)
{
    return v ? short_number(*v) : "-";
}

} // namespace

std::string roc_csv(std::span<const RocPoint> sweep)
{
    std::ostringstream out;
    out << "threshold,detection_rate,false_positive_rate,median_time_to_detection,detected_fraction\n";
    for (const auto& p : sweep) {
        out << number(p.threshold) << ',' << number(p.detection_rate) << ',' << number(p.false_positive_rate) << ','
            << (p.median_time_to_detection ? number(*p.median_time_to_detection) : "") << ','
            << number(p.detected_fraction) << '\n';
    }
    return out.str();
}

std::string render_sweep(std::span<const RocPoint> sweep, ReportFormat format)
{
    switch (format) {
    case ReportFormat::Csv:
        return roc_csv(sweep);
    case ReportFormat::Json: {
        auto arr = nlohmann::ordered_json::array();
        for (const auto& p : sweep) {
            arr.push_back(to_json(p));
        }
        return nlohmann::ordered_json{{"schema_version", kSchemaVersion}, {"threshold_sweep", std::move(arr)}}.dump(2) +
               "\n";
    }
    case ReportFormat::Markdown:
        return markdown_sweep(sweep);
    }
    throw std::invalid_argument("render_sweep: unknown format");
}

std::string render_report(const RunReport& report, ReportFormat format)
{
    switch (format) {
    case ReportFormat::Json:
        return to_json(report).dump(2) + "\n";
    case ReportFormat::Csv: {
        std::ostringstream out;
        out << "class,users,flagged,detection_rate,fake_checkins\n";
        for (const auto& [name, s] : report.per_class) {
            out << name << ',' << s.users << ',' << s.flagged << ',' << number(s.detection_rate) << ','
                << s.fake_checkins << '\n';
        }
        return out.str();
    }
    case ReportFormat::Markdown: {
        std::ostringstream out;
        out << "# Run summary\n\n";
        out << "- seed: " << report.config.seed << ", rounds: " << report.config.rounds
            << ", lambda: " << report.config.lambda << ", phi: " << report.config.phi << "\n";
        out << "- check-ins: " << report.total_checkins << " (fake: " << report.total_fakes
            << ", by never-flagged users: " << report.residual_fakes << ")\n";
        out << "- detection rate: " << short_number(report.detection_rate)
            << ", false-positive rate: " << short_number(report.false_positive_rate) << "\n";
        out << "- time to detection: median " << optional_text(report.time_to_detection.median) << ", p90 "
            << optional_text(report.time_to_detection.p90) << " (" << report.time_to_detection.detected << " of "
            << report.time_to_detection.cheaters << " cheaters detected)\n";
        if (report.adaptive_budget) {
            out << "- adaptive budget: " << *report.adaptive_budget << " fakes\n";
        }
        out << "- deal redemptions: " << report.economics.redemptions << " (fake-assisted "
            << report.economics.fake_assisted << "), excess loss " << format_dollars(report.economics.excess_loss)
            << "\n\n";
        out << "## Per class\n\n| class | users | flagged | detection rate | fake check-ins |\n|---|---|---|---|---|\n";
        for (const auto& [name, s] : report.per_class) {
            out << "| " << name << " | " << s.users << " | " << s.flagged << " | " << short_number(s.detection_rate)
                << " | " << s.fake_checkins << " |\n";
        }
        out << "\n## Threshold trade-off\n\n" << markdown_sweep(report.threshold_sweep);
        return out.str();
    }
    }
    throw std::invalid_argument("render_report: unknown format");
}

} // namespace honeytrap
