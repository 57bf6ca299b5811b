#pragma once

#include "honeytrap/behavior.hpp"
#include "honeytrap/detector.hpp"
#include "honeytrap/honeypots.hpp"
#include "honeytrap/money.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace honeytrap {

struct UserCounts {
    std::uint32_t honest = 1000;
    std::uint32_t gamer = 50;
    std::uint32_t uniform = 0;
    std::uint32_t monetary = 10;
    std::uint32_t adaptive = 0;

    [[nodiscard]] std::uint32_t total() const { return honest + gamer + uniform + monetary + adaptive; }
    [[nodiscard]] std::uint32_t of(UserClass c) const;
    bool operator==(const UserCounts&) const = default;
};

struct ChallengeConfig {
    bool enabled = true;
    std::uint32_t menu_size = 4;
    std::uint32_t pool_size = 10;
    std::uint32_t rotation_period = 7;
    /// Fraction of deal venues whose owner keeps the challenges up to date.
    double owner_maintain_prob = 0.8;
    bool operator==(const ChallengeConfig&) const = default;
};

struct VenueConfig {
    std::uint32_t points_new = 3;
    std::uint32_t points_repeat = 1;
    Bounds<double> mayorship_prob{0.0, 1.0};
    std::vector<std::string> venue_types{"restaurant", "bar", "cafe", "shop", "gym"};
    std::uint32_t deal_types = 3;
    double deal_fraction = 0.006;
    Bounds<std::uint32_t> required_checkins{3, 3};
    Bounds<std::int64_t> offer_cost_cents{500, 500};
    ChallengeConfig challenges{};
    bool operator==(const VenueConfig&) const = default;
};

struct HonestConfig {
    double hv_accident_prob = 0.001;
    double dirichlet_concentration = 1.0;
    std::uint32_t locality_size = 30;
    bool operator==(const HonestConfig&) const = default;
};

struct BehaviorConfig {
    CandidateScope candidate_scope = CandidateScope::Presented;
    BehaviorWeights gamer = BehaviorWeights::two_feature();
    BehaviorWeights monetary = ClassModels::default_monetary(3);
    /// Deal venues each monetary cheater knows of (added to its locality).
    std::uint32_t monetary_known_deals = 3;
    double adaptive_safety_margin = 0.75;
    bool operator==(const BehaviorConfig&) const = default;
};

enum class BiasShape { Harmonic, Uniform };

struct HoneypotConfig {
    BehaviorWeights initial_estimate = BehaviorWeights::two_feature();
    Bounds<std::uint32_t> points_new{1, 3};
    Bounds<std::uint32_t> points_repeat{1, 1};
    Bounds<double> mayorship_prob{0.0, 1.0};
    Bounds<std::uint32_t> deal_count{0, 1};
    DesignOptions design{};
    bool operator==(const HoneypotConfig&) const = default;
};

struct LearnerConfig {
    bool enabled = true;
    std::uint32_t refit_every = 50;
    double blend = 0.5;
    double grid_step = 0.01;
    /// Rounds of history used per refit; 0 uses everything.
    std::uint32_t history_window = 0;
    std::vector<std::string> features{"points", "mayor"};
    bool operator==(const LearnerConfig&) const = default;
};

struct SimConfig {
    std::uint64_t seed = 1;
    std::uint32_t rounds = 200;
    double checkin_rate = 0.5;
    std::uint32_t lambda = 50;
    std::uint32_t phi = 1000;
    UserCounts users{};
    VenueConfig venues{};
    Bounds<std::int64_t> avg_spend_cents{2000, 2000};
    HonestConfig honest{};
    BehaviorConfig behavior{};
    PresentationPolicy presentation{};
    BiasShape position_bias = BiasShape::Harmonic;
    HoneypotConfig honeypots{};
    DetectorConfig detector{};
    LearnerConfig learner{};
    std::vector<double> report_thresholds{1.0, 2.0, 4.0, 8.0, 16.0};

    /// Throws ConfigError naming the offending field.
    void validate() const;

    [[nodiscard]] FeatureBounds feature_bounds() const;
    [[nodiscard]] ClassModels class_models() const;
    [[nodiscard]] PositionBias bias() const;

    bool operator==(const SimConfig&) const = default;
};

nlohmann::ordered_json to_json(const SimConfig& c);
/// Strict parse: unknown keys are rejected, omitted keys take defaults, the result is validated.
SimConfig sim_config_from_json(const nlohmann::ordered_json& j);
SimConfig load_config(const std::filesystem::path& path);

} // namespace honeytrap
