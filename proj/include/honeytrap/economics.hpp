#pragma once

#include "honeytrap/money.hpp"
#include "honeytrap/world.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace honeytrap {

/// Offer cost c, required check-ins R and average spend s of one deal.
struct DealEconomics {
    Money offer_cost{};
    std::uint32_t required_checkins = 1;
    Money avg_spend{};

    void validate() const;
};

struct HonestRedemption {
    ExactMoney per_visit_gain_reduction;  // c / R
    ExactMoney customer_cost_per_visit;   // s - c / R
};

struct CheatingRedemption {
    ExactMoney venue_gain_reduction_per_real_visit; // c / (R - k)
    ExactMoney cheater_cost;                        // (R - k) * s - c
};

HonestRedemption honest_redemption(const DealEconomics& e);

/// k fake check-ins within one redemption cycle. Throws std::invalid_argument when k >= R.
CheatingRedemption cheating_redemption(const DealEconomics& e, std::uint32_t fake_checkins);

/// Loss beyond the honest target for one redemption with k fakes: c * k / R.
ExactMoney excess_loss(Money offer_cost, std::uint32_t required_checkins, std::uint32_t fake_checkins);

struct VenueLoss {
    VenueId venue;
    std::uint64_t redemptions = 0;
    std::uint64_t fake_assisted = 0;
    Money total_gain_reduction{};
    ExactMoney excess_loss{0};

    bool operator==(const VenueLoss&) const = default;
};

/// Per real deal venue, ordered by id. Each user keeps a rolling counter per venue;
/// a check-in counts unless its challenge failed, and every R-th counted check-in
/// unlocks the deal. The deal is redeemed only when the unlocking check-in is physical.
std::vector<VenueLoss> run_loss_report(std::span<const CheckInEvent> events, const WorldState& world);

ExactMoney total_excess_loss(std::span<const VenueLoss> losses);

nlohmann::ordered_json to_json(const VenueLoss& l);
VenueLoss venue_loss_from_json(const nlohmann::ordered_json& j);

/// CSV header: venue,redemptions,fake_assisted,excess_loss_minor_units
std::string loss_report_csv(std::span<const VenueLoss> losses);

} // namespace honeytrap
