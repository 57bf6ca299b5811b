#include "honeytrap/economics.hpp"

#include <map>
#include <sstream>
#include <stdexcept>

namespace honeytrap {

using json = nlohmann::ordered_json;

void DealEconomics::validate() const
{
    if (offer_cost.cents < 0) {
        throw std::invalid_argument("deal offer cost must be >= 0");
    }
    if (required_checkins < 1) {
        throw std::invalid_argument("deal required check-ins must be >= 1");
    }
    if (avg_spend.cents < 0) {
        throw std::invalid_argument("average spend must be >= 0");
    }
}

HonestRedemption honest_redemption(const DealEconomics& e)
{
    e.validate();
    const ExactMoney per_visit = exact(e.offer_cost) / static_cast<std::int64_t>(e.required_checkins);
    return {per_visit, exact(e.avg_spend) - per_visit};
}

CheatingRedemption cheating_redemption(const DealEconomics& e, std::uint32_t fake_checkins)
{
    e.validate();
    if (fake_checkins >= e.required_checkins) {
        throw std::invalid_argument("cheating_redemption: fake check-ins must be fewer than required check-ins");
    }
    const auto real = static_cast<std::int64_t>(e.required_checkins - fake_checkins);
    return {exact(e.offer_cost) / real, exact(e.avg_spend) * real - exact(e.offer_cost)};
}

ExactMoney excess_loss(Money offer_cost, std::uint32_t required_checkins, std::uint32_t fake_checkins)
{
    if (required_checkins < 1) {
        throw std::invalid_argument("excess_loss: required check-ins must be >= 1");
    }
    if (fake_checkins > required_checkins) {
        throw std::invalid_argument("excess_loss: more fakes than check-ins in the cycle");
    }
    const auto r = static_cast<std::int64_t>(required_checkins);
    const auto real = static_cast<std::int64_t>(required_checkins - fake_checkins);
    return exact(offer_cost) - exact(offer_cost) * ExactMoney(real, r);
}

std::vector<VenueLoss> run_loss_report(std::span<const CheckInEvent> events, const WorldState& world)
{
    std::map<VenueId, VenueLoss> by_venue;
    for (const auto& v : world.venues) {
        if (!v.is_honeypot && v.deal && v.offers_deal()) {
            by_venue[v.id].venue = v.id;
        }
    }

    struct Cycle {
        std::uint64_t counted = 0;
        std::uint32_t fakes = 0;
    };
    std::map<std::pair<std::uint32_t, std::uint32_t>, Cycle> cycles;

    for (const auto& e : events) {
        auto it = by_venue.find(e.venue);
        if (it == by_venue.end() || e.challenge_result == ChallengeResult::Failed) {
            continue;
        }
        const auto& deal = *world.venue(e.venue).deal;
        auto& cycle = cycles[{e.user.value, e.venue.value}];
        ++cycle.counted;
        if (e.is_fake) {
            ++cycle.fakes;
        }
        if (cycle.counted % deal.required_checkins != 0) {
            continue;
        }
        if (!e.is_fake) {
            auto& loss = it->second;
            ++loss.redemptions;
            loss.total_gain_reduction += deal.offer_cost;
            if (cycle.fakes > 0) {
                ++loss.fake_assisted;
                loss.excess_loss += excess_loss(deal.offer_cost, deal.required_checkins, cycle.fakes);
            }
        }
        cycle.fakes = 0;
    }

    std::vector<VenueLoss> out;
    out.reserve(by_venue.size());
    for (auto& [_, loss] : by_venue) {
        out.push_back(loss);
    }
    return out;
}

ExactMoney total_excess_loss(std::span<const VenueLoss> losses)
{
    ExactMoney total(0);
    for (const auto& l : losses) {
        total += l.excess_loss;
    }
    return total;
}

json to_json(const VenueLoss& l)
{
    return json{{"venue", l.venue.value},
                {"redemptions", l.redemptions},
                {"fake_assisted", l.fake_assisted},
                {"total_gain_reduction_cents", l.total_gain_reduction.cents},
                {"excess_loss", {{"numerator", l.excess_loss.numerator()}, {"denominator", l.excess_loss.denominator()}}}};
}

VenueLoss venue_loss_from_json(const json& j)
{
    VenueLoss l;
    l.venue = VenueId{j.at("venue").get<std::uint32_t>()};
    l.redemptions = j.at("redemptions").get<std::uint64_t>();
    l.fake_assisted = j.at("fake_assisted").get<std::uint64_t>();
    l.total_gain_reduction = Money{j.at("total_gain_reduction_cents").get<std::int64_t>()};
    const auto& x = j.at("excess_loss");
    const auto den = x.at("denominator").get<std::int64_t>();
    if (den <= 0) {
        throw std::invalid_argument("excess_loss.denominator must be positive");
    }
    l.excess_loss = ExactMoney(x.at("numerator").get<std::int64_t>(), den);
    return l;
}

std::string loss_report_csv(std::span<const VenueLoss> losses)
{
    std::ostringstream out;
    out << "venue,redemptions,fake_assisted,excess_loss_minor_units\n";
    for (const auto& l : losses) {
        out << l.venue.value << ',' << l.redemptions << ',' << l.fake_assisted << ','
            << format_minor_units(l.excess_loss) << '\n';
    }
    return out.str();
}

} // namespace honeytrap
