#include "honeytrap/behavior.hpp"
#include "honeytrap/errors.hpp"
#include "honeytrap/honeypots.hpp"

#include <doctest.h>

#include <cmath>
#include <numeric>

using namespace honeytrap;

namespace {

Venue make_venue(std::uint32_t id, std::uint32_t n_new, std::uint32_t n_repeat, double m, bool honeypot = false)
{
    Venue v;
    v.id = VenueId{id};
    v.features.points_new = n_new;
    v.features.points_repeat = n_repeat;
    v.features.mayorship_prob = m;
    v.features.venue_type = "cafe";
    v.is_honeypot = honeypot;
    return v;
}

BehaviorWeights random_weights(Rng& rng)
{
    BehaviorWeights w;
    w.w_points = rng.uniform();
    w.w_mayor = rng.uniform();
    w.w_type["cafe"] = rng.uniform();
    w.w_type["bar"] = rng.uniform();
    w.w_deal_count = rng.uniform();
    w.w_deal_types = {rng.uniform(), rng.uniform()};
    return w;
}

std::vector<Venue> random_venues(std::size_t k, Rng& rng)
{
    std::vector<Venue> out;
    for (std::size_t i = 0; i < k; ++i) {
        Venue v = make_venue(static_cast<std::uint32_t>(i), 1 + static_cast<std::uint32_t>(rng.below(3)), 1,
                             rng.uniform(), rng.bernoulli(0.3));
        v.features.venue_type = rng.bernoulli(0.5) ? "cafe" : "bar";
        v.features.deal_types = {0, 0};
        if (rng.bernoulli(0.3)) {
            v.features.deal_count = 1;
            v.features.deal_types[rng.below(2)] = 1;
        }
        out.push_back(v);
    }
    return out;
}

std::vector<Candidate> candidates_of(const std::vector<Venue>& venues, Rng& rng)
{
    std::vector<Candidate> c;
    for (const auto& v : venues) {
        c.push_back(Candidate{&v, rng.bernoulli(0.5)});
    }
    return c;
}

} // namespace

TEST_CASE("attractiveness of the two-feature model")
{
    const auto w = BehaviorWeights::two_feature();
    CHECK(attractiveness(make_venue(0, 3, 1, 0.5).features, true, w) == 1.75);
    CHECK(attractiveness(make_venue(0, 1, 1, 0.5).features, true, w) == 0.75);
    CHECK(attractiveness(make_venue(0, 0, 0, 0.0).features, true, w) == 0.0);
    CHECK(attractiveness(make_venue(0, 3, 1, 0.5).features, false, w) == 0.75);
}

TEST_CASE("attractiveness with extension weights")
{
    BehaviorWeights w;
    w.w_type["bar"] = 2.0;
    w.w_deal_count = 3.0;
    w.w_deal_types = {0.5, 4.0};
    VenueFeatures f;
    f.venue_type = "bar";
    f.deal_count = 1;
    f.deal_types = {0, 1};
    CHECK(attractiveness(f, true, w) == 2.0 + 3.0 + 4.0);
    f.venue_type = "gym";
    CHECK(attractiveness(f, true, w) == 7.0);
}

TEST_CASE("two-venue worked example")
{
    const auto a = make_venue(0, 3, 1, 0.5, true);
    const auto b = make_venue(1, 1, 1, 0.5);
    const std::vector<Candidate> c{{&a, true}, {&b, true}};
    const auto d = choice_distribution(c, BehaviorWeights::two_feature());
    // Hand arithmetic: 1.75 / 2.5 and 0.75 / 2.5.
    CHECK(std::abs(d.probs[0] - 0.7) <= 1e-12);
    CHECK(std::abs(d.probs[1] - 0.3) <= 1e-12);
    CHECK(std::abs(d.honeypot_mass - 0.7) <= 1e-12);
}

TEST_CASE("identical venues are equally likely")
{
    std::vector<Venue> venues;
    for (std::uint32_t i = 0; i < 7; ++i) {
        venues.push_back(make_venue(i, 2, 1, 0.25));
    }
    std::vector<Candidate> c;
    for (const auto& v : venues) {
        c.push_back({&v, true});
    }
    const auto d = choice_distribution(c, BehaviorWeights::two_feature());
    for (double p : d.probs) {
        CHECK(p == doctest::Approx(1.0 / 7).epsilon(1e-12));
    }
}

TEST_CASE("all-zero attractiveness falls back to uniform")
{
    const auto a = make_venue(0, 0, 0, 0.0);
    const auto b = make_venue(1, 0, 0, 0.0, true);
    const std::vector<Candidate> c{{&a, true}, {&b, true}};
    const auto d = choice_distribution(c, BehaviorWeights::two_feature());
    CHECK(d.probs[0] == 0.5);
    CHECK(d.honeypot_mass == 0.5);
    CHECK_THROWS_AS(choice_distribution(std::vector<Candidate>{}, BehaviorWeights::two_feature()),
                    std::invalid_argument);
}

TEST_CASE("uniform honeypot mass")
{
    CHECK(uniform_honeypot_mass(3, 7) == doctest::Approx(0.3).epsilon(1e-15));
    CHECK(uniform_honeypot_mass(0, 10) == 0.0);
    CHECK(uniform_honeypot_mass(5, 0) == 1.0);
    CHECK_THROWS_AS(uniform_honeypot_mass(0, 0), std::invalid_argument);
}

TEST_CASE("uniform mass equals the choice model over identical venues")
{
    BehaviorWeights w;
    w.w_points = 1.0;
    for (std::uint32_t lambda : {0u, 1u, 3u, 10u, 50u}) {
        for (std::uint32_t phi : {1u, 7u, 100u, 1000u}) {
            std::vector<Venue> venues;
            for (std::uint32_t i = 0; i < lambda + phi; ++i) {
                venues.push_back(make_venue(i, 1, 1, 0.0, i >= phi));
            }
            std::vector<Candidate> c;
            for (const auto& v : venues) {
                c.push_back({&v, true});
            }
            CHECK(choice_distribution(c, w).honeypot_mass == uniform_honeypot_mass(lambda, phi));
        }
    }
}

TEST_CASE("probabilities sum to one and ignore the weight scale")
{
    Rng rng(101);
    for (int trial = 0; trial < 1000; ++trial) {
        const auto venues = random_venues(1 + rng.below(12), rng);
        const auto c = candidates_of(venues, rng);
        const auto w = random_weights(rng);
        const double scale = std::exp(8.0 * rng.uniform() - 4.0);
        const auto base = choice_distribution(c, w);
        const auto scaled = choice_distribution(c, w.scaled(scale));
        double sum = 0.0;
        for (std::size_t i = 0; i < c.size(); ++i) {
            REQUIRE(std::abs(base.probs[i] - scaled.probs[i]) <= 1e-12);
            REQUIRE(base.probs[i] >= 0.0);
            REQUIRE(base.probs[i] <= 1.0);
            sum += base.probs[i];
        }
        REQUIRE(std::abs(sum - 1.0) <= 1e-12);
        REQUIRE(std::abs(base.honeypot_mass - scaled.honeypot_mass) <= 1e-12);
    }
}

TEST_CASE("raising one venue's feature never lowers its probability")
{
    Rng rng(202);
    for (int trial = 0; trial < 500; ++trial) {
        auto venues = random_venues(2 + rng.below(8), rng);
        std::vector<Candidate> c;
        for (const auto& v : venues) {
            c.push_back({&v, true});
        }
        auto w = random_weights(rng);
        w.w_points += 0.01;
        w.w_mayor += 0.01;
        const auto before = choice_distribution(c, w);
        const auto i = rng.below(venues.size());
        if (rng.bernoulli(0.5)) {
            venues[i].features.points_new += 1;
        }
        else {
            venues[i].features.mayorship_prob = std::min(1.0, venues[i].features.mayorship_prob + 0.1);
        }
        const auto after = choice_distribution(c, w);
        REQUIRE(after.probs[i] >= before.probs[i] - 1e-12);
        for (std::size_t j = 0; j < venues.size(); ++j) {
            if (j != i) {
                REQUIRE(after.probs[j] <= before.probs[j] + 1e-12);
            }
        }
    }
}

TEST_CASE("uniform cheater over a small world hits honeypots at the uniform rate")
{
    std::vector<Venue> venues;
    for (std::uint32_t i = 0; i < 10; ++i) {
        venues.push_back(make_venue(i, 3, 1, 0.5, i >= 7));
    }
    std::vector<const Venue*> list;
    for (const auto& v : venues) {
        list.push_back(&v);
    }
    User u;
    u.cls = UserClass::UniformCheater;
    Rng rng(7);
    const auto bias = PositionBias::uniform(list.size());
    int hits = 0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        hits += venues[pick_venue(u, list, ClassModels{}, bias, rng).value].is_honeypot ? 1 : 0;
    }
    CHECK(std::abs(hits / static_cast<double>(n) - 0.3) <= 0.01);
}

TEST_CASE("gamer picks follow the choice distribution")
{
    const auto a = make_venue(0, 3, 1, 0.5);
    const auto b = make_venue(1, 1, 1, 0.5);
    const std::vector<const Venue*> list{&a, &b};
    User u;
    u.cls = UserClass::GamerCheater;
    Rng rng(8);
    const auto bias = PositionBias::uniform(2);
    int first = 0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        first += pick_venue(u, list, ClassModels{}, bias, rng).value == 0 ? 1 : 0;
    }
    CHECK(std::abs(first / static_cast<double>(n) - 0.7) <= 0.01);
}

TEST_CASE("empirical frequencies converge per venue")
{
    Rng rng(303);
    const auto venues = random_venues(8, rng);
    std::vector<const Venue*> list;
    std::vector<Candidate> c;
    for (const auto& v : venues) {
        list.push_back(&v);
        c.push_back({&v, true});
    }
    User u;
    u.cls = UserClass::GamerCheater;
    ClassModels models;
    models.gamer = random_weights(rng);
    const auto expected = choice_distribution(c, models.gamer);
    const auto bias = PositionBias::uniform(list.size());
    std::vector<int> counts(list.size(), 0);
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        ++counts[pick_venue(u, list, models, bias, rng).value];
    }
    for (std::size_t i = 0; i < list.size(); ++i) {
        const double p = expected.probs[i];
        CHECK(std::abs(counts[i] / static_cast<double>(n) - p) < 3.0 * std::sqrt(p * (1 - p) / n) + 1e-12);
    }
}

TEST_CASE("position bias reweights a flat choice")
{
    const auto bias = PositionBias::harmonic(4);
    const std::vector<double> flat(4, 1.0);
    Rng rng(4);
    std::vector<int> counts(4, 0);
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        ++counts[sample_biased(flat, bias, rng)];
    }
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(std::abs(counts[i] / static_cast<double>(n) - bias.attention[i]) < 0.01);
    }
}

TEST_CASE("honest users and accidents")
{
    std::vector<Venue> venues;
    for (std::uint32_t i = 0; i < 5; ++i) {
        venues.push_back(make_venue(i, 3, 1, 0.5, i == 4));
    }
    std::vector<const Venue*> list;
    for (const auto& v : venues) {
        list.push_back(&v);
    }
    User u;
    u.locality = {VenueId{0}, VenueId{1}, VenueId{2}, VenueId{3}};
    u.preference = {0.1, 0.2, 0.3, 0.4};
    Rng rng(5);

    for (int i = 0; i < 10000; ++i) {
        REQUIRE(honest_pick(u, list, 0.0, rng).value != 4);
    }
    CHECK(honest_pick(u, list, 1.0, rng).value == 4);

    const int n = 1000000;
    int accidents = 0;
    for (int i = 0; i < n; ++i) {
        accidents += honest_pick(u, list, 0.001, rng).value == 4 ? 1 : 0;
    }
    CHECK(std::abs(accidents / static_cast<double>(n) - 0.001) <= 0.0002);

    const std::vector<const Venue*> only_hv{&venues[4]};
    CHECK_THROWS_AS(honest_pick(u, only_hv, 0.0, rng), std::invalid_argument);
}

TEST_CASE("honest picks follow the preference profile")
{
    std::vector<Venue> venues;
    for (std::uint32_t i = 0; i < 3; ++i) {
        venues.push_back(make_venue(i, 3, 1, 0.5));
    }
    const std::vector<const Venue*> list{&venues[0], &venues[1], &venues[2]};
    User u;
    u.locality = {VenueId{2}, VenueId{0}};
    u.preference = {0.75, 0.25};
    Rng rng(6);
    std::vector<int> counts(3, 0);
    for (int i = 0; i < 40000; ++i) {
        ++counts[honest_pick(u, list, 0.0, rng).value];
    }
    CHECK(counts[1] == 0);
    CHECK(counts[2] / 40000.0 == doctest::Approx(0.75).epsilon(0.02));
}

TEST_CASE("monetary cheaters stick to deals and visited venues")
{
    std::vector<Venue> venues;
    for (std::uint32_t i = 0; i < 6; ++i) {
        venues.push_back(make_venue(i, 3, 1, 0.5));
        venues.back().features.deal_types = {0, 0, 0};
    }
    venues[2].features.deal_count = 1;
    venues[2].features.deal_types = {1, 0, 0};
    venues[2].deal = Deal{3, dollars(5)};
    std::vector<const Venue*> list;
    for (const auto& v : venues) {
        list.push_back(&v);
    }
    User u;
    u.cls = UserClass::MonetaryCheater;
    u.visited = {VenueId{4}};
    CHECK(monetary_candidates(u, list) == std::vector<std::size_t>{2, 4});

    ClassModels models;
    models.monetary = ClassModels::default_monetary(3);
    Rng rng(9);
    const auto bias = PositionBias::uniform(list.size());
    int deal = 0;
    for (int i = 0; i < 20000; ++i) {
        const auto id = pick_venue(u, list, models, bias, rng).value;
        REQUIRE((id == 2 || id == 4));
        deal += id == 2 ? 1 : 0;
    }
    // 0.5 * 3 + 0.5 * 0.5 + 10 + 10 against 0.5 * 1 + 0.5 * 0.5.
    CHECK(deal / 20000.0 == doctest::Approx(21.75 / 22.5).epsilon(0.01));
}

TEST_CASE("adaptive budget worked example")
{
    DetectorConfig d;
    const auto b = adaptive_budget(d, 0.3, 0.75, 1000);
    REQUIRE(b.has_value());
    CHECK(*b == 3);
}

TEST_CASE("adaptive budget agrees with an exhaustive search")
{
    auto expected = [](double w_q, double w_r, double p, std::uint64_t lambda, double limit) {
        std::uint64_t best = 0;
        for (std::uint64_t b = 0;; ++b) {
            const double hits = static_cast<double>(b) * p;
            const double l = w_q * hits + w_r * std::min(hits, static_cast<double>(lambda));
            if (l <= limit) {
                best = b;
            }
            else {
                break;
            }
        }
        return best;
    };
    Rng rng(12);
    for (int trial = 0; trial < 2000; ++trial) {
        DetectorConfig d;
        d.w_q = 0.1 + 2.0 * rng.uniform();
        d.w_r = 3.0 * rng.uniform();
        d.threshold = 0.5 + 10.0 * rng.uniform();
        const double p = 0.01 + 0.99 * rng.uniform();
        const double margin = 0.05 + 0.9 * rng.uniform();
        const std::uint64_t lambda = 1 + rng.below(20);
        const auto b = adaptive_budget(d, p, margin, lambda);
        REQUIRE(b.has_value());
        REQUIRE(*b == expected(d.w_q, d.w_r, p, lambda, margin * d.threshold));
    }
}

TEST_CASE("adaptive budget edge cases")
{
    DetectorConfig d;
    CHECK_FALSE(adaptive_budget(d, 0.0, 0.75, 10).has_value());
    d.threshold = 1e-9;
    CHECK(adaptive_budget(d, 0.3, 0.75, 10) == std::optional<std::uint64_t>(0));
    d.threshold = 4.0;
    CHECK_THROWS_AS(adaptive_budget(d, 1.5, 0.75, 10), std::invalid_argument);
    CHECK_THROWS_AS(adaptive_budget(d, 0.3, 1.0, 10), std::invalid_argument);
    DetectorConfig blind;
    blind.w_q = 0.0;
    blind.w_r = 0.0;
    CHECK_FALSE(adaptive_budget(blind, 0.3, 0.75, 10).has_value());
}

TEST_CASE("weights JSON")
{
    BehaviorWeights w = BehaviorWeights::two_feature(0.3, 0.7);
    w.w_type["bar"] = 0.25;
    w.w_deal_types = {0.0, 1.0};
    const auto j = nlohmann::ordered_json::parse(to_json(w).dump());
    CHECK(behavior_weights_from_json(j) == w);

    auto typo = j;
    typo["w_pionts"] = 1.0;
    try {
        behavior_weights_from_json(typo, "behavior.gamer");
        FAIL("expected rejection");
    }
    catch (const ConfigError& e) {
        CHECK(e.path() == "behavior.gamer.w_pionts");
    }
    auto negative = j;
    negative["w_mayor"] = -1.0;
    CHECK_THROWS_AS(behavior_weights_from_json(negative), ConfigError);
    CHECK_THROWS_AS(behavior_weights_from_json(nlohmann::ordered_json::parse(R"({"w_points": 0})")), ConfigError);
}

TEST_CASE("normalization keeps the direction")
{
    const auto w = BehaviorWeights::two_feature(2.0, 6.0).normalized();
    CHECK(w.w_points == 0.25);
    CHECK(w.w_mayor == 0.75);
    CHECK(w.total() == 1.0);
    CHECK_THROWS((void)BehaviorWeights{}.normalized());
}
