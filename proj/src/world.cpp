#include "honeytrap/world.hpp"

#include "honeytrap/config.hpp"
#include "honeytrap/errors.hpp"
#include "honeytrap/honeypots.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace honeytrap {

using json = nlohmann::ordered_json;

std::string_view to_string(UserClass c)
{
    switch (c) {
    case UserClass::Honest:
        return "honest";
    case UserClass::GamerCheater:
        return "gamer";
    case UserClass::UniformCheater:
        return "uniform";
    case UserClass::MonetaryCheater:
        return "monetary";
    case UserClass::AdaptiveCheater:
        return "adaptive";
    }
    return "?";
}

UserClass user_class_from_string(std::string_view s)
{
    for (auto c : {UserClass::Honest, UserClass::GamerCheater, UserClass::UniformCheater, UserClass::MonetaryCheater,
                   UserClass::AdaptiveCheater}) {
        if (to_string(c) == s) {
            return c;
        }
    }
    throw std::invalid_argument("unknown user class '" + std::string(s) + "'");
}

std::string_view to_string(ChallengeResult r)
{
    switch (r) {
    case ChallengeResult::NotIssued:
        return "not_issued";
    case ChallengeResult::Passed:
        return "passed";
    case ChallengeResult::Failed:
        return "failed";
    }
    return "?";
}

ChallengeResult challenge_result_from_string(std::string_view s)
{
    for (auto r : {ChallengeResult::NotIssued, ChallengeResult::Passed, ChallengeResult::Failed}) {
        if (to_string(r) == s) {
            return r;
        }
    }
    throw std::invalid_argument("unknown challenge result '" + std::string(s) + "'");
}

namespace {

template <class T>
T uniform_in(const Bounds<T>& b, Rng& rng)
{
    if constexpr (std::is_floating_point_v<T>) {
        return b.lo + (b.hi - b.lo) * rng.uniform();
    }
    else {
        const auto span = static_cast<std::uint64_t>(b.hi - b.lo) + 1;
        return static_cast<T>(b.lo + static_cast<T>(rng.below(span)));
    }
}

std::vector<VenueId> make_locality(std::uint32_t phi, std::uint32_t size, const std::vector<VenueId>& must_include,
                                   Rng& rng)
{
    std::vector<VenueId> locality = must_include;
    const auto target = std::min(size, phi);
    if (locality.size() >= target) {
        return locality;
    }
    const auto extra = std::min<std::uint32_t>(phi, target + static_cast<std::uint32_t>(must_include.size()));
    for (auto idx : sample_without_replacement(phi, extra, rng)) {
        if (locality.size() >= target) {
            break;
        }
        const VenueId id{idx};
        if (std::find(locality.begin(), locality.end(), id) == locality.end()) {
            locality.push_back(id);
        }
    }
    return locality;
}

} // namespace

WorldState build_world(const SimConfig& config, Rng& rng)
{
    if (config.phi == 0 && config.lambda == 0) {
        throw std::invalid_argument("build_world: empty world (lambda = phi = 0)");
    }
    const auto& vc = config.venues;
    if (!(vc.deal_fraction >= 0.0 && vc.deal_fraction <= 1.0)) {
        throw ConfigError("venues.deal_fraction", "must lie in [0, 1]");
    }

    WorldState world;
    world.deal_type_count = vc.deal_types;
    world.venue_types = vc.venue_types;
    world.venues.reserve(static_cast<std::size_t>(config.phi) + config.lambda);

    for (std::uint32_t i = 0; i < config.phi; ++i) {
        Venue v;
        v.id = VenueId{i};
        v.features.points_new = vc.points_new;
        v.features.points_repeat = vc.points_repeat;
        v.features.mayorship_prob = uniform_in(vc.mayorship_prob, rng);
        v.features.venue_type = vc.venue_types[rng.below(vc.venue_types.size())];
        v.features.deal_types.assign(vc.deal_types, 0);
        world.venues.push_back(std::move(v));
    }

    const auto n_deals = static_cast<std::uint32_t>(std::llround(vc.deal_fraction * config.phi));
    auto deal_idx = sample_without_replacement(config.phi, n_deals, rng);
    std::sort(deal_idx.begin(), deal_idx.end());
    std::vector<VenueId> deal_venues;
    for (auto idx : deal_idx) {
        auto& v = world.venues[idx];
        v.features.deal_count = 1;
        v.features.deal_types[rng.below(vc.deal_types)] = 1;
        v.deal = Deal{uniform_in(vc.required_checkins, rng), Money{uniform_in(vc.offer_cost_cents, rng)}};
        if (vc.challenges.enabled) {
            v.challenge = ChallengeSpec{vc.challenges.menu_size, vc.challenges.pool_size, vc.challenges.rotation_period,
                                        rng.bernoulli(vc.challenges.owner_maintain_prob)};
        }
        deal_venues.push_back(v.id);
    }
    world.phi = config.phi;

    if (config.lambda > 0) {
        auto honeypots = design_honeypots(config.lambda, config.honeypots.initial_estimate, config.feature_bounds(),
                                          config.honeypots.design, rng);
        add_honeypots(world, std::move(honeypots));
    }

    const std::pair<UserClass, std::uint32_t> classes[] = {
        {UserClass::Honest, config.users.honest},
        {UserClass::GamerCheater, config.users.gamer},
        {UserClass::UniformCheater, config.users.uniform},
        {UserClass::MonetaryCheater, config.users.monetary},
        {UserClass::AdaptiveCheater, config.users.adaptive},
    };
    for (const auto& [cls, count] : classes) {
        for (std::uint32_t k = 0; k < count; ++k) {
            User u;
            u.id = UserId{static_cast<std::uint32_t>(world.users.size())};
            u.cls = cls;
            u.avg_spend = Money{uniform_in(config.avg_spend_cents, rng)};
            std::vector<VenueId> known;
            if (cls == UserClass::MonetaryCheater && !deal_venues.empty()) {
                const auto n_known =
                    std::min<std::uint32_t>(config.behavior.monetary_known_deals, static_cast<std::uint32_t>(deal_venues.size()));
                for (auto idx : sample_without_replacement(static_cast<std::uint32_t>(deal_venues.size()), n_known, rng)) {
                    known.push_back(deal_venues[idx]);
                }
            }
            if (config.phi > 0) {
                u.locality = make_locality(config.phi, config.honest.locality_size, known, rng);
                u.preference = sample_dirichlet(u.locality.size(), config.honest.dirichlet_concentration, rng);
            }
            world.users.push_back(std::move(u));
        }
    }
    return world;
}

VenueCounts venue_counts(const WorldState& world)
{
    VenueCounts c;
    for (const auto& v : world.venues) {
        if (v.is_honeypot) {
            ++c.lambda;
        }
        else {
            ++c.phi;
        }
    }
    return c;
}

void add_honeypots(WorldState& world, std::vector<Venue> honeypots)
{
    for (auto& v : honeypots) {
        v.id = VenueId{static_cast<std::uint32_t>(world.venues.size())};
        v.is_honeypot = true;
        world.venues.push_back(std::move(v));
        ++world.lambda;
    }
}

void check_invariants(const VenueFeatures& f, std::uint32_t deal_type_count)
{
    if (!(f.mayorship_prob >= 0.0 && f.mayorship_prob <= 1.0)) {
        throw std::logic_error("mayorship_prob outside [0, 1]");
    }
    if (f.deal_types.size() != deal_type_count) {
        throw std::logic_error("deal_types length differs from the world's deal type count");
    }
    const bool any_type = std::any_of(f.deal_types.begin(), f.deal_types.end(), [](auto y) { return y != 0; });
    if ((f.deal_count == 0) == any_type) {
        throw std::logic_error("deal_count = 0 must coincide with an all-zero deal_types vector");
    }
    if (std::any_of(f.deal_types.begin(), f.deal_types.end(), [](auto y) { return y > 1; })) {
        throw std::logic_error("deal_types must be binary");
    }
}

void check_invariants(const WorldState& world)
{
    const auto counts = venue_counts(world);
    if (counts.lambda != world.lambda || counts.phi != world.phi) {
        throw std::logic_error("stored venue counts disagree with the venue collection");
    }
    for (std::size_t i = 0; i < world.venues.size(); ++i) {
        const auto& v = world.venues[i];
        if (v.id.value != i) {
            throw std::logic_error("venue id differs from its index");
        }
        check_invariants(v.features, world.deal_type_count);
        if (v.deal && v.features.deal_count < 1) {
            throw std::logic_error("venue with a deal has deal_count 0");
        }
        if (v.deal && v.deal->required_checkins < 1) {
            throw std::logic_error("deal requires zero check-ins");
        }
        if (v.challenge && !v.deal) {
            throw std::logic_error("challenge without a deal");
        }
        if (v.challenge && (v.challenge->menu_size < 2 || v.challenge->pool_size < 1)) {
            throw std::logic_error("challenge menu_size < 2 or pool_size < 1");
        }
    }
}

json to_json(const VenueFeatures& f)
{
    return json{{"points_new", f.points_new},
                {"points_repeat", f.points_repeat},
                {"mayorship_prob", f.mayorship_prob},
                {"venue_type", f.venue_type},
                {"deal_count", f.deal_count},
                {"deal_types", f.deal_types}};
}

VenueFeatures venue_features_from_json(const json& j)
{
    VenueFeatures f;
    f.points_new = j.at("points_new").get<std::uint32_t>();
    f.points_repeat = j.at("points_repeat").get<std::uint32_t>();
    f.mayorship_prob = j.at("mayorship_prob").get<double>();
    f.venue_type = j.at("venue_type").get<std::string>();
    f.deal_count = j.at("deal_count").get<std::uint32_t>();
    f.deal_types = j.at("deal_types").get<std::vector<std::uint8_t>>();
    return f;
}

namespace {

json deal_json(const std::optional<Deal>& d)
{
    if (!d) {
        return nullptr;
    }
    return json{{"required_checkins", d->required_checkins}, {"offer_cost_cents", d->offer_cost.cents}};
}

std::optional<Deal> deal_from(const json& j)
{
    if (j.is_null()) {
        return std::nullopt;
    }
    return Deal{j.at("required_checkins").get<std::uint32_t>(), Money{j.at("offer_cost_cents").get<std::int64_t>()}};
}

std::vector<std::uint32_t> raw_ids(const std::vector<VenueId>& ids)
{
    std::vector<std::uint32_t> out;
    out.reserve(ids.size());
    for (auto id : ids) {
        out.push_back(id.value);
    }
    return out;
}

std::vector<VenueId> venue_ids(const json& j)
{
    std::vector<VenueId> out;
    for (const auto& x : j) {
        out.push_back(VenueId{x.get<std::uint32_t>()});
    }
    return out;
}

} // namespace

json to_json(const Venue& v)
{
    json challenge = nullptr;
    if (v.challenge) {
        challenge = json{{"menu_size", v.challenge->menu_size},
                         {"pool_size", v.challenge->pool_size},
                         {"rotation_period", v.challenge->rotation_period},
                         {"owner_maintains", v.challenge->owner_maintains}};
    }
    return json{{"id", v.id.value},
                {"is_honeypot", v.is_honeypot},
                {"features", to_json(v.features)},
                {"deal", deal_json(v.deal)},
                {"challenge", challenge}};
}

Venue venue_from_json(const json& j)
{
    Venue v;
    v.id = VenueId{j.at("id").get<std::uint32_t>()};
    v.is_honeypot = j.at("is_honeypot").get<bool>();
    v.features = venue_features_from_json(j.at("features"));
    v.deal = deal_from(j.at("deal"));
    const auto& c = j.at("challenge");
    if (!c.is_null()) {
        v.challenge = ChallengeSpec{c.at("menu_size").get<std::uint32_t>(), c.at("pool_size").get<std::uint32_t>(),
                                    c.at("rotation_period").get<std::uint32_t>(), c.at("owner_maintains").get<bool>()};
    }
    return v;
}

json to_json(const WorldState& world)
{
    json venues = json::array();
    for (const auto& v : world.venues) {
        venues.push_back(to_json(v));
    }
    json users = json::array();
    for (const auto& u : world.users) {
        users.push_back(json{{"id", u.id.value},
                             {"class", to_string(u.cls)},
                             {"avg_spend_cents", u.avg_spend.cents},
                             {"locality", raw_ids(u.locality)},
                             {"preference", u.preference},
                             {"visited", raw_ids(std::vector<VenueId>(u.visited.begin(), u.visited.end()))}});
    }
    return json{{"schema_version", kSchemaVersion},
                {"lambda", world.lambda},
                {"phi", world.phi},
                {"deal_type_count", world.deal_type_count},
                {"venue_types", world.venue_types},
                {"venues", std::move(venues)},
                {"users", std::move(users)}};
}

WorldState world_from_json(const json& j)
{
    if (j.at("schema_version").get<int>() != kSchemaVersion) {
        throw std::runtime_error("world: unsupported schema_version");
    }
    WorldState w;
    w.lambda = j.at("lambda").get<std::uint32_t>();
    w.phi = j.at("phi").get<std::uint32_t>();
    w.deal_type_count = j.at("deal_type_count").get<std::uint32_t>();
    w.venue_types = j.at("venue_types").get<std::vector<std::string>>();
    for (const auto& v : j.at("venues")) {
        w.venues.push_back(venue_from_json(v));
    }
    for (const auto& uj : j.at("users")) {
        User u;
        u.id = UserId{uj.at("id").get<std::uint32_t>()};
        u.cls = user_class_from_string(uj.at("class").get<std::string>());
        u.avg_spend = Money{uj.at("avg_spend_cents").get<std::int64_t>()};
        u.locality = venue_ids(uj.at("locality"));
        u.preference = uj.at("preference").get<std::vector<double>>();
        for (auto id : venue_ids(uj.at("visited"))) {
            u.visited.insert(id);
        }
        w.users.push_back(std::move(u));
    }
    return w;
}

json to_json(const CheckInEvent& e)
{
    return json{{"schema_version", kSchemaVersion},
                {"round", e.round},
                {"user", e.user.value},
                {"venue", e.venue.value},
                {"is_fake", e.is_fake},
                {"hit_honeypot", e.hit_honeypot},
                {"challenge", to_string(e.challenge_result)},
                {"presented", raw_ids(e.presented)}};
}

CheckInEvent event_from_json(const json& j)
{
    if (j.at("schema_version").get<int>() != kSchemaVersion) {
        throw std::runtime_error("event: unsupported schema_version");
    }
    CheckInEvent e;
    e.round = j.at("round").get<Round>();
    e.user = UserId{j.at("user").get<std::uint32_t>()};
    e.venue = VenueId{j.at("venue").get<std::uint32_t>()};
    e.is_fake = j.at("is_fake").get<bool>();
    e.hit_honeypot = j.at("hit_honeypot").get<bool>();
    e.challenge_result = challenge_result_from_string(j.at("challenge").get<std::string>());
    e.presented = venue_ids(j.at("presented"));
    return e;
}

std::string event_log_to_jsonl(std::span<const CheckInEvent> events)
{
    std::string out;
    for (const auto& e : events) {
        out += to_json(e).dump();
        out += '\n';
    }
    return out;
}

std::vector<CheckInEvent> event_log_from_jsonl(std::string_view text)
{
    std::vector<CheckInEvent> events;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        auto end = text.find('\n', pos);
        if (end == std::string_view::npos) {
            end = text.size();
        }
        ++line_no;
        const auto line = text.substr(pos, end - pos);
        pos = end + 1;
        if (line.find_first_not_of(" \t\r") == std::string_view::npos) {
            continue;
        }
        try {
            events.push_back(event_from_json(json::parse(line)));
        }
        catch (const std::exception& ex) {
            throw std::runtime_error("event log line " + std::to_string(line_no) + ": " + ex.what());
        }
    }
    return events;
}

} // namespace honeytrap
