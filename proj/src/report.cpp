#include "honeytrap/report.hpp"

#include "honeytrap/json_reader.hpp"

#include <stdexcept>

namespace honeytrap {

using json = nlohmann::ordered_json;

namespace {

json optional_json(const std::optional<double>& v)
{
    return v ? json(*v) : json(nullptr);
}

std::optional<double> optional_double(const json& j)
{
    if (j.is_null()) {
        return std::nullopt;
    }
    return j.get<double>();
}

json rational_json(const ExactMoney& m)
{
    return json{{"numerator", m.numerator()}, {"denominator", m.denominator()}};
}

ExactMoney rational_from_json(const json& j)
{
    const auto den = j.at("denominator").get<std::int64_t>();
    if (den <= 0) {
        throw std::invalid_argument("rational amount needs a positive denominator");
    }
    return ExactMoney(j.at("numerator").get<std::int64_t>(), den);
}

json to_json(const ClassStats& s)
{
    return json{{"users", s.users},
                {"flagged", s.flagged},
                {"detection_rate", s.detection_rate},
                {"fake_checkins", s.fake_checkins}};
}

ClassStats class_stats_from_json(const json& j)
{
    ClassStats s;
    s.users = j.at("users").get<std::uint64_t>();
    s.flagged = j.at("flagged").get<std::uint64_t>();
    s.detection_rate = j.at("detection_rate").get<double>();
    s.fake_checkins = j.at("fake_checkins").get<std::uint64_t>();
    return s;
}

json to_json(const FitRecord& f)
{
    return json{{"round", f.round},
                {"fit", f.fit ? to_json(*f.fit) : json(nullptr)},
                {"estimate", to_json(f.estimate)},
                {"note", f.note}};
}

FitRecord fit_record_from_json(const json& j)
{
    FitRecord f;
    f.round = j.at("round").get<Round>();
    if (!j.at("fit").is_null()) {
        f.fit = fit_result_from_json(j.at("fit"));
    }
    f.estimate = behavior_weights_from_json(j.at("estimate"), "estimate");
    f.note = j.at("note").get<std::string>();
    return f;
}

} // namespace

json to_json(const RocPoint& p)
{
    return json{{"threshold", threshold_to_json(p.threshold)},
                {"detection_rate", p.detection_rate},
                {"false_positive_rate", p.false_positive_rate},
                {"median_time_to_detection", optional_json(p.median_time_to_detection)},
                {"detected_fraction", p.detected_fraction}};
}

RocPoint roc_point_from_json(const json& j)
{
    RocPoint p;
    p.threshold = threshold_from_json(j.at("threshold"), "threshold");
    p.detection_rate = j.at("detection_rate").get<double>();
    p.false_positive_rate = j.at("false_positive_rate").get<double>();
    p.median_time_to_detection = optional_double(j.at("median_time_to_detection"));
    p.detected_fraction = j.at("detected_fraction").get<double>();
    return p;
}

json to_json(const RunReport& r)
{
    json per_class = json::object();
    for (const auto& [name, stats] : r.per_class) {
        per_class[name] = to_json(stats);
    }
    json venues = json::array();
    for (const auto& v : r.economics.venues) {
        venues.push_back(to_json(v));
    }
    json trajectory = json::array();
    for (const auto& f : r.weights_trajectory) {
        trajectory.push_back(to_json(f));
    }
    json sweep = json::array();
    for (const auto& p : r.threshold_sweep) {
        sweep.push_back(to_json(p));
    }
    return json{
        {"schema_version", r.schema_version},
        {"rng_algorithm", r.rng_algorithm},
        {"config", to_json(r.config)},
        {"per_class", std::move(per_class)},
        {"detection_rate", r.detection_rate},
        {"false_positive_rate", r.false_positive_rate},
        {"time_to_detection",
         {{"median", optional_json(r.time_to_detection.median)},
          {"p90", optional_json(r.time_to_detection.p90)},
          {"detected", r.time_to_detection.detected},
          {"cheaters", r.time_to_detection.cheaters}}},
        {"total_checkins", r.total_checkins},
        {"total_fakes", r.total_fakes},
        {"residual_fakes", r.residual_fakes},
        {"adaptive_budget", r.adaptive_budget ? json(*r.adaptive_budget) : json(nullptr)},
        {"economics",
         {{"redemptions", r.economics.redemptions},
          {"fake_assisted", r.economics.fake_assisted},
          {"excess_loss", rational_json(r.economics.excess_loss)},
          {"excess_loss_display", format_dollars(r.economics.excess_loss)},
          {"venues", std::move(venues)}}},
        {"weights_trajectory", std::move(trajectory)},
        {"threshold_sweep", std::move(sweep)},
    };
}

RunReport run_report_from_json(const json& j)
{
    RunReport r;
    r.schema_version = j.at("schema_version").get<int>();
    if (r.schema_version != kSchemaVersion) {
        throw std::runtime_error("unsupported report schema_version " + std::to_string(r.schema_version));
    }
    r.rng_algorithm = j.at("rng_algorithm").get<std::string>();
    r.config = sim_config_from_json(j.at("config"));
    for (auto it = j.at("per_class").begin(); it != j.at("per_class").end(); ++it) {
        r.per_class[it.key()] = class_stats_from_json(it.value());
    }
    r.detection_rate = j.at("detection_rate").get<double>();
    r.false_positive_rate = j.at("false_positive_rate").get<double>();
    const auto& ttd = j.at("time_to_detection");
    r.time_to_detection.median = optional_double(ttd.at("median"));
    r.time_to_detection.p90 = optional_double(ttd.at("p90"));
    r.time_to_detection.detected = ttd.at("detected").get<std::uint64_t>();
    r.time_to_detection.cheaters = ttd.at("cheaters").get<std::uint64_t>();
    r.total_checkins = j.at("total_checkins").get<std::uint64_t>();
    r.total_fakes = j.at("total_fakes").get<std::uint64_t>();
    r.residual_fakes = j.at("residual_fakes").get<std::uint64_t>();
    if (!j.at("adaptive_budget").is_null()) {
        r.adaptive_budget = j.at("adaptive_budget").get<std::uint64_t>();
    }
    const auto& econ = j.at("economics");
    r.economics.redemptions = econ.at("redemptions").get<std::uint64_t>();
    r.economics.fake_assisted = econ.at("fake_assisted").get<std::uint64_t>();
    r.economics.excess_loss = rational_from_json(econ.at("excess_loss"));
    for (const auto& v : econ.at("venues")) {
        r.economics.venues.push_back(venue_loss_from_json(v));
    }
    for (const auto& f : j.at("weights_trajectory")) {
        r.weights_trajectory.push_back(fit_record_from_json(f));
    }
    for (const auto& p : j.at("threshold_sweep")) {
        r.threshold_sweep.push_back(roc_point_from_json(p));
    }
    return r;
}

} // namespace honeytrap
