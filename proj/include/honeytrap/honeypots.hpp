#pragma once

#include "honeytrap/behavior.hpp"
#include "honeytrap/rng.hpp"
#include "honeytrap/world.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace honeytrap {

enum class Placement { Top, Bottom, UniformInterleave };

std::string_view to_string(Placement p);

/// How many of the delta presented venues are honeypots, and where they go.
struct PresentationPolicy {
    std::uint32_t list_length = 10; // delta
    std::uint32_t hv_count = 2;
    Placement placement = Placement::UniformInterleave;
    /// Scale hv_count by the user's current suspicion level.
    bool personalize = false;

    void validate() const;
    bool operator==(const PresentationPolicy&) const = default;
};

nlohmann::ordered_json to_json(const PresentationPolicy& p);
PresentationPolicy presentation_policy_from_json(const nlohmann::ordered_json& j,
                                                 const std::string& path = "presentation");

/// Attention paid to each list position; non-increasing, first entry positive.
struct PositionBias {
    std::vector<double> attention;

    /// attention_i proportional to 1/i, normalized to sum 1.
    static PositionBias harmonic(std::size_t length);
    static PositionBias uniform(std::size_t length);

    /// Positions past the end of the profile get the last entry's weight.
    [[nodiscard]] double at(std::size_t position) const;
    void validate() const;

    bool operator==(const PositionBias&) const = default;
};

template <class T>
struct Bounds {
    T lo{};
    T hi{};
    bool operator==(const Bounds&) const = default;
};

/// Admissible feature box for designed honeypots.
struct FeatureBounds {
    Bounds<std::uint32_t> points_new{1, 3};
    Bounds<std::uint32_t> points_repeat{1, 1};
    Bounds<double> mayorship_prob{0.0, 1.0};
    Bounds<std::uint32_t> deal_count{0, 1};
    std::vector<std::string> venue_types;
    std::uint32_t deal_type_count = 0;
    /// Deal attached to honeypots that end up with deal_count > 0.
    Deal deal{3, Money{500}};

    void validate() const;
    bool operator==(const FeatureBounds&) const = default;
};

struct DesignOptions {
    enum class OnZeroModel { Error, Random };
    /// Relative jitter applied to numeric features; 0 disables it.
    double jitter = 0.1;
    OnZeroModel on_zero = OnZeroModel::Error;

    bool operator==(const DesignOptions&) const = default;
};

/// Honeypots whose features maximize attractiveness under the estimate within the
/// bounds (upper bound where the weight is positive, lower bound otherwise, argmax
/// category for the type), then jittered. Ids are left at 0 for the caller to assign.
std::vector<Venue> design_honeypots(std::uint32_t count, const BehaviorWeights& estimate,
                                    const FeatureBounds& bounds, const DesignOptions& options, Rng& rng);

/// 1-based honeypot positions for UniformInterleave: round(j * delta / (h + 1)),
/// j = 1..h, with collisions moved to the next free slot.
std::vector<std::uint32_t> interleave_positions(std::uint32_t list_length, std::uint32_t hv_count);

/// 1-based honeypot positions for any placement.
std::vector<std::uint32_t> honeypot_positions(Placement placement, std::uint32_t list_length, std::uint32_t hv_count);

/// hv_count, or min(lambda, round(hv_count * (1 + level / threshold))) when personalized;
/// never more than the list length or lambda.
std::uint32_t effective_hv_count(const PresentationPolicy& policy, std::uint32_t lambda, double level,
                                 double threshold);

/// Ordered list of delta venue ids. Real slots are drawn without replacement from the
/// user's locality (topped up from the remaining real venues if it is too small),
/// honeypot slots from all honeypots. Throws when the world has too few real venues.
std::vector<VenueId> present_venues(const User& user, const WorldState& world, const PresentationPolicy& policy,
                                    double user_level, double threshold, Rng& rng);

} // namespace honeytrap
