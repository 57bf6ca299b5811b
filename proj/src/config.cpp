#include "honeytrap/config.hpp"

#include "honeytrap/errors.hpp"
#include "honeytrap/json_reader.hpp"
#include "honeytrap/learner.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace honeytrap {

using json = nlohmann::ordered_json;

std::uint32_t UserCounts::of(UserClass c) const
{
    switch (c) {
    case UserClass::Honest:
        return honest;
    case UserClass::GamerCheater:
        return gamer;
    case UserClass::UniformCheater:
        return uniform;
    case UserClass::MonetaryCheater:
        return monetary;
    case UserClass::AdaptiveCheater:
        return adaptive;
    }
    return 0;
}

namespace {

void require(bool ok, const std::string& path, const std::string& reason)
{
    if (!ok) {
        throw ConfigError(path, reason);
    }
}

bool is_probability(double p)
{
    return p >= 0.0 && p <= 1.0;
}

template <class T>
json bounds_json(const Bounds<T>& b)
{
    if (b.lo == b.hi) {
        return json(b.lo);
    }
    return json::array({b.lo, b.hi});
}

/// A bound is either a scalar (fixed value) or a two-element [lo, hi] array.
template <class T>
void read_bounds(ObjectReader& r, std::string_view key, Bounds<T>& out)
{
    const json* v = r.take(key);
    if (v == nullptr) {
        return;
    }
    const auto path = r.path_of(key);
    auto scalar = [&](const json& x) {
        json wrapper = json::object();
        wrapper["v"] = x;
        ObjectReader tmp(wrapper, "");
        T value{};
        try {
            tmp.read("v", value);
        }
        catch (const ConfigError& e) {
            const std::string what = e.what();
            throw ConfigError(path, what.substr(what.find(": ") + 2));
        }
        return value;
    };
    if (v->is_array()) {
        require(v->size() == 2, path, "expected a value or a [lo, hi] pair");
        out = Bounds<T>{scalar((*v)[0]), scalar((*v)[1])};
    }
    else {
        const T value = scalar(*v);
        out = Bounds<T>{value, value};
    }
}

void validate_weights(const BehaviorWeights& w, const std::string& path)
{
    try {
        w.validate();
    }
    catch (const std::invalid_argument& e) {
        throw ConfigError(path, e.what());
    }
}

void validate_feature_list(const std::vector<std::string>& features, std::uint32_t deal_types)
{
    require(!features.empty(), "learner.features", "must not be empty");
    std::set<std::string> seen;
    for (const auto& f : features) {
        try {
            validate_feature_name(f, deal_types);
        }
        catch (const std::invalid_argument& e) {
            throw ConfigError("learner.features", e.what());
        }
        require(seen.insert(f).second, "learner.features", "duplicate feature '" + f + "'");
    }
}

json thresholds_json(const std::vector<double>& ts)
{
    json out = json::array();
    for (double t : ts) {
        out.push_back(threshold_to_json(t));
    }
    return out;
}

std::string_view to_string(CandidateScope s)
{
    return s == CandidateScope::World ? "world" : "presented";
}

std::string_view to_string(BiasShape b)
{
    return b == BiasShape::Uniform ? "uniform" : "harmonic";
}

std::string_view to_string(DesignOptions::OnZeroModel z)
{
    return z == DesignOptions::OnZeroModel::Random ? "random" : "error";
}

} // namespace

void SimConfig::validate() const
{
    require(rounds >= 1, "rounds", "must be >= 1");
    require(std::isfinite(checkin_rate) && checkin_rate >= 0.0, "checkin_rate", "must be finite and >= 0");
    require(static_cast<std::uint64_t>(lambda) + phi > 0, "phi", "lambda and phi cannot both be 0");
    require(phi > 0 || users.total() == 0, "phi", "users need at least one real venue");

    require(venues.points_new >= venues.points_repeat, "venues.points_new", "must be >= points_repeat");
    require(is_probability(venues.mayorship_prob.lo) && is_probability(venues.mayorship_prob.hi) &&
                venues.mayorship_prob.lo <= venues.mayorship_prob.hi,
            "venues.mayorship_prob", "must be a probability or a range within [0, 1]");
    require(!venues.venue_types.empty(), "venues.venue_types", "must not be empty");
    require(is_probability(venues.deal_fraction), "venues.deal_fraction", "must lie in [0, 1]");
    require(venues.deal_fraction == 0.0 || venues.deal_types >= 1, "venues.deal_types",
            "deals need at least one deal type");
    require(venues.required_checkins.lo >= 1 && venues.required_checkins.lo <= venues.required_checkins.hi,
            "venues.deal.required_checkins", "must be >= 1 and a non-empty range");
    require(venues.offer_cost_cents.lo >= 0 && venues.offer_cost_cents.lo <= venues.offer_cost_cents.hi,
            "venues.deal.offer_cost_cents", "must be >= 0 and a non-empty range");
    const auto& ch = venues.challenges;
    require(ch.menu_size >= 2, "venues.challenges.menu_size", "must be >= 2");
    require(ch.pool_size >= 1, "venues.challenges.pool_size", "must be >= 1");
    require(ch.rotation_period >= 1, "venues.challenges.rotation_period", "must be >= 1");
    require(is_probability(ch.owner_maintain_prob), "venues.challenges.owner_maintain_prob", "must lie in [0, 1]");

    require(avg_spend_cents.lo >= 0 && avg_spend_cents.lo <= avg_spend_cents.hi, "avg_spend_cents",
            "must be >= 0 and a non-empty range");

    require(is_probability(honest.hv_accident_prob), "honest.hv_accident_prob", "must lie in [0, 1]");
    require(std::isfinite(honest.dirichlet_concentration) && honest.dirichlet_concentration > 0.0,
            "honest.dirichlet_concentration", "must be positive");
    require(honest.locality_size >= 1, "honest.locality_size", "must be >= 1");

    validate_weights(behavior.gamer, "behavior.gamer");
    validate_weights(behavior.monetary, "behavior.monetary");
    require(behavior.adaptive_safety_margin > 0.0 && behavior.adaptive_safety_margin < 1.0,
            "behavior.adaptive_safety_margin", "must lie in (0, 1)");

    presentation.validate();
    require(presentation.list_length > presentation.hv_count || users.total() == 0 ||
                behavior.candidate_scope == CandidateScope::World,
            "presentation.hv_count", "must leave at least one real slot");

    validate_weights(honeypots.initial_estimate, "honeypots.initial_estimate");
    require(honeypots.design.jitter >= 0.0 && honeypots.design.jitter < 1.0, "honeypots.jitter",
            "must lie in [0, 1)");
    feature_bounds().validate();

    detector.validate();

    require(learner.refit_every >= 1, "learner.refit_every", "must be >= 1");
    require(learner.blend >= 0.0 && learner.blend <= 1.0, "learner.blend", "must lie in [0, 1]");
    const double k = 1.0 / learner.grid_step;
    require(learner.grid_step > 0.0 && learner.grid_step <= 0.5 && std::abs(k - std::round(k)) <= 1e-6 * k,
            "learner.grid_step", "must lie in (0, 0.5] with 1/grid_step an integer");
    validate_feature_list(learner.features, venues.deal_types);

    require(!report_thresholds.empty(), "report.thresholds", "must not be empty");
    for (double t : report_thresholds) {
        require(!std::isnan(t) && t >= 0.0, "report.thresholds", "entries must be >= 0");
    }
}

FeatureBounds SimConfig::feature_bounds() const
{
    FeatureBounds b;
    b.points_new = honeypots.points_new;
    b.points_repeat = honeypots.points_repeat;
    b.mayorship_prob = honeypots.mayorship_prob;
    b.deal_count = honeypots.deal_count;
    b.venue_types = venues.venue_types;
    b.deal_type_count = venues.deal_types;
    b.deal = Deal{venues.required_checkins.hi, Money{venues.offer_cost_cents.hi}};
    return b;
}

ClassModels SimConfig::class_models() const
{
    ClassModels m;
    m.gamer = behavior.gamer;
    m.monetary = behavior.monetary;
    m.hv_accident_prob = honest.hv_accident_prob;
    return m;
}

PositionBias SimConfig::bias() const
{
    const std::size_t n = std::max<std::size_t>(presentation.list_length, 1);
    return position_bias == BiasShape::Uniform ? PositionBias::uniform(n) : PositionBias::harmonic(n);
}

json to_json(const SimConfig& c)
{
    const auto& v = c.venues;
    return json{
        {"seed", c.seed},
        {"rounds", c.rounds},
        {"checkin_rate", c.checkin_rate},
        {"lambda", c.lambda},
        {"phi", c.phi},
        {"users",
         {{"honest", c.users.honest},
          {"gamer", c.users.gamer},
          {"uniform", c.users.uniform},
          {"monetary", c.users.monetary},
          {"adaptive", c.users.adaptive}}},
        {"venues",
         {{"points_new", v.points_new},
          {"points_repeat", v.points_repeat},
          {"mayorship_prob", bounds_json(v.mayorship_prob)},
          {"venue_types", v.venue_types},
          {"deal_types", v.deal_types},
          {"deal_fraction", v.deal_fraction},
          {"deal",
           {{"required_checkins", bounds_json(v.required_checkins)},
            {"offer_cost_cents", bounds_json(v.offer_cost_cents)}}},
          {"challenges",
           {{"enabled", v.challenges.enabled},
            {"menu_size", v.challenges.menu_size},
            {"pool_size", v.challenges.pool_size},
            {"rotation_period", v.challenges.rotation_period},
            {"owner_maintain_prob", v.challenges.owner_maintain_prob}}}}},
        {"avg_spend_cents", bounds_json(c.avg_spend_cents)},
        {"honest",
         {{"hv_accident_prob", c.honest.hv_accident_prob},
          {"dirichlet_concentration", c.honest.dirichlet_concentration},
          {"locality_size", c.honest.locality_size}}},
        {"behavior",
         {{"candidate_scope", to_string(c.behavior.candidate_scope)},
          {"gamer", to_json(c.behavior.gamer)},
          {"monetary", to_json(c.behavior.monetary)},
          {"monetary_known_deals", c.behavior.monetary_known_deals},
          {"adaptive_safety_margin", c.behavior.adaptive_safety_margin}}},
        {"presentation", to_json(c.presentation)},
        {"position_bias", to_string(c.position_bias)},
        {"honeypots",
         {{"initial_estimate", to_json(c.honeypots.initial_estimate)},
          {"bounds",
           {{"points_new", bounds_json(c.honeypots.points_new)},
            {"points_repeat", bounds_json(c.honeypots.points_repeat)},
            {"mayorship_prob", bounds_json(c.honeypots.mayorship_prob)},
            {"deal_count", bounds_json(c.honeypots.deal_count)}}},
          {"jitter", c.honeypots.design.jitter},
          {"design_on_zero", to_string(c.honeypots.design.on_zero)}}},
        {"detector", to_json(c.detector)},
        {"learner",
         {{"enabled", c.learner.enabled},
          {"refit_every", c.learner.refit_every},
          {"blend", c.learner.blend},
          {"grid_step", c.learner.grid_step},
          {"history_window", c.learner.history_window},
          {"features", c.learner.features}}},
        {"report", {{"thresholds", thresholds_json(c.report_thresholds)}}},
    };
}

SimConfig sim_config_from_json(const json& j)
{
    SimConfig c;
    ObjectReader r(j, "");
    r.read("seed", c.seed);
    r.read("rounds", c.rounds);
    r.read("checkin_rate", c.checkin_rate);
    r.read("lambda", c.lambda);
    r.read("phi", c.phi);

    {
        auto u = r.child("users");
        u.read("honest", c.users.honest);
        u.read("gamer", c.users.gamer);
        u.read("uniform", c.users.uniform);
        u.read("monetary", c.users.monetary);
        u.read("adaptive", c.users.adaptive);
        u.finish();
    }
    {
        auto v = r.child("venues");
        auto& vc = c.venues;
        v.read("points_new", vc.points_new);
        v.read("points_repeat", vc.points_repeat);
        read_bounds(v, "mayorship_prob", vc.mayorship_prob);
        v.read("venue_types", vc.venue_types);
        v.read("deal_types", vc.deal_types);
        v.read("deal_fraction", vc.deal_fraction);
        {
            auto d = v.child("deal");
            read_bounds(d, "required_checkins", vc.required_checkins);
            read_bounds(d, "offer_cost_cents", vc.offer_cost_cents);
            d.finish();
        }
        {
            auto ch = v.child("challenges");
            ch.read("enabled", vc.challenges.enabled);
            ch.read("menu_size", vc.challenges.menu_size);
            ch.read("pool_size", vc.challenges.pool_size);
            ch.read("rotation_period", vc.challenges.rotation_period);
            ch.read("owner_maintain_prob", vc.challenges.owner_maintain_prob);
            ch.finish();
        }
        v.finish();
    }
    read_bounds(r, "avg_spend_cents", c.avg_spend_cents);
    {
        auto h = r.child("honest");
        h.read("hv_accident_prob", c.honest.hv_accident_prob);
        h.read("dirichlet_concentration", c.honest.dirichlet_concentration);
        h.read("locality_size", c.honest.locality_size);
        h.finish();
    }
    bool monetary_given = false;
    {
        auto b = r.child("behavior");
        std::string scope(to_string(c.behavior.candidate_scope));
        b.read("candidate_scope", scope);
        if (scope == "presented") {
            c.behavior.candidate_scope = CandidateScope::Presented;
        }
        else if (scope == "world") {
            c.behavior.candidate_scope = CandidateScope::World;
        }
        else {
            throw ConfigError(b.path_of("candidate_scope"), "expected presented or world");
        }
        if (const auto* g = b.take("gamer")) {
            c.behavior.gamer = behavior_weights_from_json(*g, b.path_of("gamer"));
        }
        if (const auto* m = b.take("monetary")) {
            c.behavior.monetary = behavior_weights_from_json(*m, b.path_of("monetary"));
            monetary_given = true;
        }
        b.read("monetary_known_deals", c.behavior.monetary_known_deals);
        b.read("adaptive_safety_margin", c.behavior.adaptive_safety_margin);
        b.finish();
    }
    if (!monetary_given) {
        c.behavior.monetary = ClassModels::default_monetary(c.venues.deal_types);
    }
    if (const auto* p = r.take("presentation")) {
        c.presentation = presentation_policy_from_json(*p, r.path_of("presentation"));
    }
    {
        std::string shape(to_string(c.position_bias));
        r.read("position_bias", shape);
        if (shape == "harmonic") {
            c.position_bias = BiasShape::Harmonic;
        }
        else if (shape == "uniform") {
            c.position_bias = BiasShape::Uniform;
        }
        else {
            throw ConfigError("position_bias", "expected harmonic or uniform");
        }
    }
    {
        auto h = r.child("honeypots");
        if (const auto* e = h.take("initial_estimate")) {
            c.honeypots.initial_estimate = behavior_weights_from_json(*e, h.path_of("initial_estimate"));
        }
        {
            auto b = h.child("bounds");
            read_bounds(b, "points_new", c.honeypots.points_new);
            read_bounds(b, "points_repeat", c.honeypots.points_repeat);
            read_bounds(b, "mayorship_prob", c.honeypots.mayorship_prob);
            read_bounds(b, "deal_count", c.honeypots.deal_count);
            b.finish();
        }
        h.read("jitter", c.honeypots.design.jitter);
        std::string on_zero(to_string(c.honeypots.design.on_zero));
        h.read("design_on_zero", on_zero);
        if (on_zero == "error") {
            c.honeypots.design.on_zero = DesignOptions::OnZeroModel::Error;
        }
        else if (on_zero == "random") {
            c.honeypots.design.on_zero = DesignOptions::OnZeroModel::Random;
        }
        else {
            throw ConfigError(h.path_of("design_on_zero"), "expected error or random");
        }
        h.finish();
    }
    if (const auto* d = r.take("detector")) {
        c.detector = detector_config_from_json(*d, r.path_of("detector"));
    }
    {
        auto l = r.child("learner");
        l.read("enabled", c.learner.enabled);
        l.read("refit_every", c.learner.refit_every);
        l.read("blend", c.learner.blend);
        l.read("grid_step", c.learner.grid_step);
        l.read("history_window", c.learner.history_window);
        l.read("features", c.learner.features);
        l.finish();
    }
    {
        auto rep = r.child("report");
        if (const auto* t = rep.take("thresholds")) {
            require(t->is_array(), rep.path_of("thresholds"), "expected an array");
            c.report_thresholds.clear();
            for (const auto& x : *t) {
                c.report_thresholds.push_back(threshold_from_json(x, rep.path_of("thresholds")));
            }
        }
        rep.finish();
    }
    r.finish();
    c.validate();
    return c;
}

SimConfig load_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ConfigError(path.string(), "cannot open config file");
    }
    std::ostringstream text;
    text << in.rdbuf();
    json j;
    try {
        j = json::parse(text.str());
    }
    catch (const nlohmann::json::parse_error& e) {
        std::string what = e.what();
        throw ConfigError(path.string(), "invalid JSON: " + what.substr(what.find(' ') + 1));
    }
    return sim_config_from_json(j);
}

} // namespace honeytrap
