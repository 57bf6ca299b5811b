#pragma once

#include "honeytrap/money.hpp"
#include "honeytrap/rng.hpp"

#include <nlohmann/json.hpp>

#include <compare>
#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace honeytrap {

struct SimConfig;

struct VenueId {
    std::uint32_t value = 0;
    friend constexpr auto operator<=>(VenueId, VenueId) = default;
};

struct UserId {
    std::uint32_t value = 0;
    friend constexpr auto operator<=>(UserId, UserId) = default;
};

using Round = std::uint32_t;

/// The feature set a choice model reads: points (n), mayorship probability (m),
/// venue type (g), deal count (x) and the binary deal-type vector (y).
struct VenueFeatures {
    std::uint32_t points_new = 3;
    std::uint32_t points_repeat = 1;
    double mayorship_prob = 0.0;
    std::string venue_type;
    std::uint32_t deal_count = 0;
    std::vector<std::uint8_t> deal_types;

    [[nodiscard]] std::uint32_t points(bool first_visit) const { return first_visit ? points_new : points_repeat; }

    bool operator==(const VenueFeatures&) const = default;
};

struct Deal {
    std::uint32_t required_checkins = 3;
    Money offer_cost{};

    bool operator==(const Deal&) const = default;
};

struct ChallengeSpec {
    std::uint32_t menu_size = 4;
    std::uint32_t pool_size = 10;
    std::uint32_t rotation_period = 7;
    bool owner_maintains = true;

    bool operator==(const ChallengeSpec&) const = default;
};

struct Venue {
    VenueId id;
    VenueFeatures features;
    bool is_honeypot = false;
    std::optional<Deal> deal;
    std::optional<ChallengeSpec> challenge;

    [[nodiscard]] bool offers_deal() const { return features.deal_count > 0; }

    bool operator==(const Venue&) const = default;
};

enum class UserClass { Honest, GamerCheater, UniformCheater, MonetaryCheater, AdaptiveCheater };

inline constexpr bool is_cheater(UserClass c) { return c != UserClass::Honest; }

std::string_view to_string(UserClass c);
UserClass user_class_from_string(std::string_view s);

struct User {
    UserId id;
    UserClass cls = UserClass::Honest;
    std::set<VenueId> visited;
    Money avg_spend{};
    /// Real venues the user moves among, with the static preference weight of each.
    std::vector<VenueId> locality;
    std::vector<double> preference;

    bool operator==(const User&) const = default;
};

enum class ChallengeResult { NotIssued, Passed, Failed };

std::string_view to_string(ChallengeResult r);
ChallengeResult challenge_result_from_string(std::string_view s);

struct CheckInEvent {
    Round round = 0;
    UserId user;
    VenueId venue;
    bool is_fake = false;
    bool hit_honeypot = false;
    ChallengeResult challenge_result = ChallengeResult::NotIssued;
    /// Ordered list shown to the user. Empty means the whole world was the candidate set.
    std::vector<VenueId> presented;

    bool operator==(const CheckInEvent&) const = default;
};

struct WorldState {
    std::vector<Venue> venues;
    std::vector<User> users;
    std::uint32_t lambda = 0;
    std::uint32_t phi = 0;
    std::uint32_t deal_type_count = 0;
    std::vector<std::string> venue_types;

    [[nodiscard]] const Venue& venue(VenueId id) const { return venues.at(id.value); }
    [[nodiscard]] Venue& venue(VenueId id) { return venues.at(id.value); }
    [[nodiscard]] const User& user(UserId id) const { return users.at(id.value); }
    [[nodiscard]] User& user(UserId id) { return users.at(id.value); }

    bool operator==(const WorldState&) const = default;
};

struct VenueCounts {
    std::uint32_t lambda = 0;
    std::uint32_t phi = 0;
    bool operator==(const VenueCounts&) const = default;
};

/// Builds the static world. Real venues take ids [0, phi), honeypots [phi, phi + lambda),
/// users are ordered by class (honest, gamer, uniform, monetary, adaptive).
WorldState build_world(const SimConfig& config, Rng& rng);

VenueCounts venue_counts(const WorldState& world);

/// Appends honeypots (ids are reassigned to follow the existing venues).
void add_honeypots(WorldState& world, std::vector<Venue> honeypots);

/// Throws std::logic_error naming the violated invariant.
void check_invariants(const VenueFeatures& f, std::uint32_t deal_type_count);
void check_invariants(const WorldState& world);

nlohmann::ordered_json to_json(const VenueFeatures& f);
VenueFeatures venue_features_from_json(const nlohmann::ordered_json& j);
nlohmann::ordered_json to_json(const Venue& v);
Venue venue_from_json(const nlohmann::ordered_json& j);
nlohmann::ordered_json to_json(const WorldState& world);
WorldState world_from_json(const nlohmann::ordered_json& j);

nlohmann::ordered_json to_json(const CheckInEvent& e);
CheckInEvent event_from_json(const nlohmann::ordered_json& j);

/// One JSON document per line, stable field order.
std::string event_log_to_jsonl(std::span<const CheckInEvent> events);
std::vector<CheckInEvent> event_log_from_jsonl(std::string_view text);

inline constexpr int kSchemaVersion = 1;

} // namespace honeytrap
