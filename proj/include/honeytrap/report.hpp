#pragma once

#include "honeytrap/config.hpp"
#include "honeytrap/economics.hpp"
#include "honeytrap/learner.hpp"

#include <nlohmann/json.hpp>

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace honeytrap {

struct RocPoint {
    double threshold = 0.0;
    double detection_rate = 0.0;
    double false_positive_rate = 0.0;
    /// Over detected cheaters only; empty when nobody was detected.
    std::optional<double> median_time_to_detection;
    /// Share of cheaters detected (the population the median is taken over).
    double detected_fraction = 0.0;

    bool operator==(const RocPoint&) const = default;
};

struct ClassStats {
    std::uint64_t users = 0;
    std::uint64_t flagged = 0;
    double detection_rate = 0.0;
    std::uint64_t fake_checkins = 0;

    bool operator==(const ClassStats&) const = default;
};

struct DetectionTime {
    std::optional<double> median;
    std::optional<double> p90;
    std::uint64_t detected = 0;
    std::uint64_t cheaters = 0;

    bool operator==(const DetectionTime&) const = default;
};

struct EconomicsSummary {
    std::vector<VenueLoss> venues;
    std::uint64_t redemptions = 0;
    std::uint64_t fake_assisted = 0;
    ExactMoney excess_loss{0};

    bool operator==(const EconomicsSummary&) const = default;
};

struct FitRecord {
    Round round = 0;
    std::optional<FitResult> fit;
    BehaviorWeights estimate;
    /// Why no fit was applied, when fit is empty.
    std::string note;

    bool operator==(const FitRecord&) const = default;
};

struct RunReport {
    int schema_version = kSchemaVersion;
    std::string rng_algorithm;
    SimConfig config;
    std::map<std::string, ClassStats> per_class;
    double detection_rate = 0.0; // over all cheaters
    double false_positive_rate = 0.0;
    DetectionTime time_to_detection;
    std::uint64_t total_checkins = 0;
    std::uint64_t total_fakes = 0;
    /// Fakes by users never flagged during the run.
    std::uint64_t residual_fakes = 0;
    std::optional<std::uint64_t> adaptive_budget;
    EconomicsSummary economics;
    std::vector<FitRecord> weights_trajectory;
    std::vector<RocPoint> threshold_sweep;

    bool operator==(const RunReport&) const = default;
};

nlohmann::ordered_json to_json(const RocPoint& p);
RocPoint roc_point_from_json(const nlohmann::ordered_json& j);
nlohmann::ordered_json to_json(const RunReport& r);
RunReport run_report_from_json(const nlohmann::ordered_json& j);

} // namespace honeytrap
