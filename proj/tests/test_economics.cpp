#include "honeytrap/detector.hpp"
#include "honeytrap/economics.hpp"

#include <doctest.h>

#include <cmath>

using namespace honeytrap;

namespace {

DealEconomics example(std::int64_t cost_dollars = 5, std::uint32_t r = 3, std::int64_t spend_dollars = 20)
{
    return DealEconomics{dollars(cost_dollars), r, dollars(spend_dollars)};
}

ExactMoney in_dollars(std::int64_t num, std::int64_t den = 1)
{
    return ExactMoney(num * 100, den);
}

double to_dollars(const ExactMoney& m)
{
    return boost::rational_cast<double>(m) / 100.0;
}

/// Real venue 0 (plain), deal venues 1 and 2, honeypot 3 that also advertises a deal.
WorldState deal_world(std::uint32_t required = 3)
{
    WorldState w;
    w.phi = 3;
    w.lambda = 1;
    w.deal_type_count = 1;
    w.venue_types = {"cafe"};
    for (std::uint32_t i = 0; i < 4; ++i) {
        Venue v;
        v.id = VenueId{i};
        v.features.venue_type = "cafe";
        v.features.deal_types = {0};
        if (i > 0) {
            v.features.deal_count = 1;
            v.features.deal_types = {1};
            v.deal = Deal{required, dollars(5)};
            v.challenge = ChallengeSpec{4, 10, 7, true};
        }
        v.is_honeypot = i == 3;
        w.venues.push_back(v);
    }
    return w;
}

CheckInEvent visit(std::uint32_t user, std::uint32_t venue, bool fake,
                   ChallengeResult result = ChallengeResult::NotIssued)
{
    CheckInEvent e;
    e.user = UserId{user};
    e.venue = VenueId{venue};
    e.is_fake = fake;
    e.challenge_result = result;
    return e;
}

/// Manual cycle enumeration: counts every R-th non-failed check-in per (user, venue).
ExactMoney enumerate_excess(const std::vector<CheckInEvent>& events, std::uint32_t r, Money c)
{
    std::map<std::pair<std::uint32_t, std::uint32_t>, std::vector<bool>> cycles;
    ExactMoney total(0);
    for (const auto& e : events) {
        if (e.venue.value == 0 || e.venue.value == 3 || e.challenge_result == ChallengeResult::Failed) {
            continue;
        }
        auto& cycle = cycles[{e.user.value, e.venue.value}];
        cycle.push_back(e.is_fake);
        if (cycle.size() == r) {
            std::uint32_t fakes = 0;
            for (bool f : cycle) {
                fakes += f ? 1 : 0;
            }
            if (!cycle.back() && fakes > 0) {
                // The venue paid c while only r - fakes visits brought revenue.
                total += exact(c) - exact(c) * ExactMoney(r - fakes, r);
            }
            cycle.clear();
        }
    }
    return total;
}

} // namespace

TEST_CASE("honest redemption worked example")
{
    const auto h = honest_redemption(example());
    CHECK(h.per_visit_gain_reduction == in_dollars(5, 3));
    CHECK(h.customer_cost_per_visit == in_dollars(55, 3));
    CHECK(format_dollars(h.per_visit_gain_reduction) == "$1.67");
    CHECK(format_dollars(h.customer_cost_per_visit) == "$18.33");
    // The published figures are rounded to $1.6 and $18.4.
    CHECK(std::abs(to_dollars(h.per_visit_gain_reduction) - 1.6) <= 0.07);
    CHECK(std::abs(to_dollars(h.customer_cost_per_visit) - 18.4) <= 0.07);
}

TEST_CASE("honest redemption edge cases")
{
    const auto free_offer = honest_redemption(example(0));
    CHECK(free_offer.per_visit_gain_reduction == ExactMoney(0));
    CHECK(free_offer.customer_cost_per_visit == in_dollars(20));
    const auto single = honest_redemption(example(5, 1));
    CHECK(single.per_visit_gain_reduction == in_dollars(5));
    CHECK(single.customer_cost_per_visit == in_dollars(15));
    CHECK_THROWS(honest_redemption(DealEconomics{dollars(5), 0, dollars(20)}));
    CHECK_THROWS(honest_redemption(DealEconomics{Money{-1}, 3, dollars(20)}));
}

TEST_CASE("cheating redemption worked examples")
{
    const auto two = cheating_redemption(example(), 2);
    CHECK(two.venue_gain_reduction_per_real_visit == in_dollars(5));
    CHECK(two.cheater_cost == in_dollars(15));

    const auto one = cheating_redemption(example(), 1);
    CHECK(one.venue_gain_reduction_per_real_visit == in_dollars(5, 2));
    CHECK(one.cheater_cost == in_dollars(35));
    // Enumerating the two real visits: $20 each, minus the $5 offer.
    CHECK(one.cheater_cost == exact(dollars(20)) + exact(dollars(20)) - exact(dollars(5)));

    CHECK_THROWS_AS(cheating_redemption(example(), 3), std::invalid_argument);
}

TEST_CASE("conservation and the no-fake case over random deals")
{
    Rng rng(1);
    for (int trial = 0; trial < 2000; ++trial) {
        const DealEconomics e{Money{static_cast<std::int64_t>(rng.below(10000))},
                              static_cast<std::uint32_t>(1 + rng.below(10)),
                              Money{static_cast<std::int64_t>(rng.below(100000))}};
        const auto h = honest_redemption(e);
        REQUIRE(h.per_visit_gain_reduction + h.customer_cost_per_visit == exact(e.avg_spend));
        const auto c0 = cheating_redemption(e, 0);
        REQUIRE(c0.venue_gain_reduction_per_real_visit == h.per_visit_gain_reduction);
        REQUIRE(c0.cheater_cost == h.customer_cost_per_visit * static_cast<std::int64_t>(e.required_checkins));
        ExactMoney previous(0);
        for (std::uint32_t k = 0; k < e.required_checkins; ++k) {
            const auto x = excess_loss(e.offer_cost, e.required_checkins, k);
            REQUIRE(x >= ExactMoney(0));
            REQUIRE(x >= previous);
            REQUIRE(x == exact(e.offer_cost) * ExactMoney(k, e.required_checkins));
            previous = x;
        }
    }
}

TEST_CASE("excess loss of one cheated cycle")
{
    CHECK(excess_loss(dollars(5), 3, 2) == in_dollars(10, 3));
    CHECK(excess_loss(dollars(5), 3, 0) == ExactMoney(0));
    CHECK(format_dollars(excess_loss(dollars(5), 3, 2)) == "$3.33");
}

TEST_CASE("loss report for a single cheated redemption")
{
    const auto world = deal_world();
    const std::vector<CheckInEvent> events{visit(7, 1, true), visit(7, 1, true), visit(7, 1, false)};
    const auto report = run_loss_report(events, world);
    REQUIRE(report.size() == 2);
    CHECK(report[0].venue == VenueId{1});
    CHECK(report[0].redemptions == 1);
    CHECK(report[0].fake_assisted == 1);
    CHECK(report[0].excess_loss == in_dollars(10, 3));
    CHECK(report[0].total_gain_reduction == dollars(5));
    CHECK(report[1].redemptions == 0);
    CHECK(total_excess_loss(report) == in_dollars(10, 3));
    CHECK(loss_report_csv(report) == "venue,redemptions,fake_assisted,excess_loss_minor_units\n"
                                     "1,1,1,333.33\n"
                                     "2,0,0,0.00\n");
}

TEST_CASE("loss report cycle rules")
{
    const auto world = deal_world();
    SUBCASE("a fake unlock is not redeemed")
    {
        const std::vector<CheckInEvent> events{visit(7, 1, false), visit(7, 1, true), visit(7, 1, true)};
        CHECK(run_loss_report(events, world)[0].redemptions == 0);
    }
    SUBCASE("failed challenges do not count")
    {
        const std::vector<CheckInEvent> events{visit(7, 1, true, ChallengeResult::Failed), visit(7, 1, true),
                                               visit(7, 1, false)};
        CHECK(run_loss_report(events, world)[0].redemptions == 0);
    }
    SUBCASE("counters roll over per user and venue")
    {
        std::vector<CheckInEvent> events;
        for (int i = 0; i < 6; ++i) {
            events.push_back(visit(1, 1, false));
            events.push_back(visit(2, 2, i % 3 != 2));
        }
        const auto report = run_loss_report(events, world);
        CHECK(report[0].redemptions == 2);
        CHECK(report[0].fake_assisted == 0);
        CHECK(report[1].redemptions == 2);
        CHECK(report[1].fake_assisted == 2);
        CHECK(report[1].excess_loss == in_dollars(20, 3));
    }
    SUBCASE("honeypots and plain venues carry no loss")
    {
        const std::vector<CheckInEvent> events{visit(7, 3, true), visit(7, 3, true), visit(7, 3, false),
                                               visit(7, 0, false)};
        CHECK(total_excess_loss(run_loss_report(events, world)) == ExactMoney(0));
    }
}

TEST_CASE("loss report agrees with manual cycle enumeration")
{
    Rng rng(2);
    for (int trial = 0; trial < 300; ++trial) {
        const auto r = static_cast<std::uint32_t>(1 + rng.below(5));
        const auto world = deal_world(r);
        std::vector<CheckInEvent> events;
        for (int i = 0; i < 200; ++i) {
            auto result = ChallengeResult::NotIssued;
            if (rng.bernoulli(0.5)) {
                result = rng.bernoulli(0.2) ? ChallengeResult::Failed : ChallengeResult::Passed;
            }
            events.push_back(visit(static_cast<std::uint32_t>(rng.below(3)), static_cast<std::uint32_t>(rng.below(4)),
                                   rng.bernoulli(0.6), result));
        }
        REQUIRE(total_excess_loss(run_loss_report(events, world)) == enumerate_excess(events, r, dollars(5)));
    }
}

TEST_CASE("honest-only logs lose nothing beyond the offer")
{
    const auto world = deal_world();
    std::vector<CheckInEvent> events;
    for (int i = 0; i < 30; ++i) {
        events.push_back(visit(static_cast<std::uint32_t>(i % 4), 1 + static_cast<std::uint32_t>(i % 2), false));
    }
    for (const auto& l : run_loss_report(events, world)) {
        CHECK(l.excess_loss == ExactMoney(0));
        CHECK(l.fake_assisted == 0);
    }
}

TEST_CASE("challenges scale expected excess loss by the fake pass probability")
{
    auto world = deal_world();
    const auto& venue = world.venues[1];
    DetectorConfig detector;
    Rng rng(3);
    const int trials = 40000;
    const std::uint32_t k = 2;
    std::vector<CheckInEvent> events;
    for (int t = 0; t < trials; ++t) {
        const auto user = static_cast<std::uint32_t>(t);
        for (std::uint32_t f = 0; f < k; ++f) {
            // A fresh memory per draw keeps every challenge unanswered before.
            ChallengeMemory memory;
            const auto o = issue_challenge(venue, UserId{user}, 0, true, memory, detector, rng);
            events.push_back(
                visit(user, 1, true, o.passed ? ChallengeResult::Passed : ChallengeResult::Failed));
        }
        // The closing physical visit; honest error is irrelevant to the closed form.
        events.push_back(visit(user, 1, false, ChallengeResult::Passed));
    }
    const double observed = to_dollars(total_excess_loss(run_loss_report(events, world))) / trials;
    const double expected = to_dollars(excess_loss(dollars(5), 3, k)) * std::pow(0.25, k);
    const double p = std::pow(0.25, k);
    const double tolerance = 4.0 * to_dollars(excess_loss(dollars(5), 3, k)) * std::sqrt(p * (1 - p) / trials);
    CHECK(std::abs(observed - expected) <= tolerance);
}

TEST_CASE("venue loss JSON")
{
    VenueLoss l;
    l.venue = VenueId{4};
    l.redemptions = 3;
    l.fake_assisted = 1;
    l.total_gain_reduction = dollars(15);
    l.excess_loss = in_dollars(10, 3);
    CHECK(venue_loss_from_json(nlohmann::ordered_json::parse(to_json(l).dump())) == l);
}
