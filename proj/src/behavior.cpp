#include "honeytrap/behavior.hpp"

#include "honeytrap/errors.hpp"
#include "honeytrap/honeypots.hpp"
#include "honeytrap/json_reader.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace honeytrap {

using json = nlohmann::ordered_json;

double BehaviorWeights::total() const
{
    double t = w_points + w_mayor + w_deal_count;
    for (const auto& [_, w] : w_type) {
        t += w;
    }
    for (double w : w_deal_types) {
        t += w;
    }
    return t;
}

void BehaviorWeights::validate() const
{
    auto check = [](double w, const std::string& name) {
        if (!std::isfinite(w) || w < 0.0) {
            throw std::invalid_argument("behavior weight " + name + " must be finite and >= 0");
        }
    };
    check(w_points, "w_points");
    check(w_mayor, "w_mayor");
    check(w_deal_count, "w_deal_count");
    for (const auto& [k, w] : w_type) {
        check(w, "w_type." + k);
    }
    for (std::size_t i = 0; i < w_deal_types.size(); ++i) {
        check(w_deal_types[i], "w_deal_types[" + std::to_string(i) + "]");
    }
    if (!(total() > 0.0)) {
        throw std::invalid_argument("behavior weights are all zero");
    }
}

BehaviorWeights BehaviorWeights::scaled(double c) const
{
    BehaviorWeights out = *this;
    out.w_points *= c;
    out.w_mayor *= c;
    out.w_deal_count *= c;
    for (auto& [_, w] : out.w_type) {
        w *= c;
    }
    for (auto& w : out.w_deal_types) {
        w *= c;
    }
    return out;
}

BehaviorWeights BehaviorWeights::normalized() const
{
    const double t = total();
    if (!(t > 0.0)) {
        throw std::invalid_argument("cannot normalize all-zero behavior weights");
    }
    return scaled(1.0 / t);
}

double BehaviorWeights::type_weight(const std::string& venue_type) const
{
    auto it = w_type.find(venue_type);
    return it == w_type.end() ? 0.0 : it->second;
}

BehaviorWeights BehaviorWeights::two_feature(double alpha, double beta)
{
    BehaviorWeights w;
    w.w_points = alpha;
    w.w_mayor = beta;
    return w;
}

json to_json(const BehaviorWeights& w)
{
    json types = json::object();
    for (const auto& [k, v] : w.w_type) {
        types[k] = v;
    }
    return json{{"w_points", w.w_points},
                {"w_mayor", w.w_mayor},
                {"w_type", std::move(types)},
                {"w_deal_count", w.w_deal_count},
                {"w_deal_types", w.w_deal_types}};
}

BehaviorWeights behavior_weights_from_json(const json& j, const std::string& path)
{
    ObjectReader r(j, path);
    BehaviorWeights w;
    r.read("w_points", w.w_points);
    r.read("w_mayor", w.w_mayor);
    if (const auto* t = r.take("w_type")) {
        ObjectReader tr(*t, r.path_of("w_type"));
        for (auto it = t->begin(); it != t->end(); ++it) {
            double v = 0.0;
            tr.read(it.key(), v);
            w.w_type[it.key()] = v;
        }
        tr.finish();
    }
    r.read("w_deal_count", w.w_deal_count);
    r.read("w_deal_types", w.w_deal_types);
    r.finish();
    try {
        w.validate();
    }
    catch (const std::invalid_argument& e) {
        throw ConfigError(path, e.what());
    }
    return w;
}

BehaviorWeights ClassModels::default_monetary(std::uint32_t deal_type_count)
{
    BehaviorWeights w = BehaviorWeights::two_feature();
    w.w_deal_count = 10.0;
    w.w_deal_types.assign(deal_type_count, 10.0);
    return w;
}

double attractiveness(const VenueFeatures& f, bool first_visit, const BehaviorWeights& w)
{
    double a = w.w_points * static_cast<double>(f.points(first_visit)) + w.w_mayor * f.mayorship_prob;
    if (!w.w_type.empty()) {
        a += w.type_weight(f.venue_type);
    }
    a += w.w_deal_count * static_cast<double>(f.deal_count);
    const auto n = std::min(w.w_deal_types.size(), f.deal_types.size());
    for (std::size_t i = 0; i < n; ++i) {
        a += w.w_deal_types[i] * static_cast<double>(f.deal_types[i]);
    }
    return a;
}

ChoiceDistribution choice_from_attractiveness(std::span<const double> attr, std::span<const std::uint8_t> is_honeypot)
{
    if (attr.empty()) {
        throw std::invalid_argument("choice_distribution: empty candidate list");
    }
    ChoiceDistribution d;
    d.probs.resize(attr.size());
    double total = 0.0;
    for (double a : attr) {
        total += a;
    }
    if (total > 0.0) {
        for (std::size_t i = 0; i < attr.size(); ++i) {
            d.probs[i] = attr[i] / total;
        }
    }
    else {
        std::fill(d.probs.begin(), d.probs.end(), 1.0 / static_cast<double>(attr.size()));
    }
    // Summing numerators before dividing keeps identical-venue cases exact.
    double hv_attr = 0.0;
    std::size_t hv_count = 0;
    for (std::size_t i = 0; i < attr.size() && i < is_honeypot.size(); ++i) {
        if (is_honeypot[i] != 0) {
            hv_attr += attr[i];
            ++hv_count;
        }
    }
    d.honeypot_mass = total > 0.0 ? hv_attr / total
                                  : static_cast<double>(hv_count) / static_cast<double>(attr.size());
    return d;
}

ChoiceDistribution choice_distribution(std::span<const Candidate> candidates, const BehaviorWeights& weights)
{
    if (candidates.empty()) {
        throw std::invalid_argument("choice_distribution: empty candidate list");
    }
    std::vector<double> attr;
    std::vector<std::uint8_t> hv;
    attr.reserve(candidates.size());
    hv.reserve(candidates.size());
    for (const auto& c : candidates) {
        attr.push_back(attractiveness(c.venue->features, c.first_visit, weights));
        hv.push_back(c.venue->is_honeypot ? 1 : 0);
    }
    return choice_from_attractiveness(attr, hv);
}

double uniform_honeypot_mass(std::uint64_t lambda, std::uint64_t phi)
{
    if (lambda + phi == 0) {
        throw std::invalid_argument("uniform_honeypot_mass: no venues");
    }
    return static_cast<double>(lambda) / static_cast<double>(lambda + phi);
}

std::size_t sample_biased(std::span<const double> choice_weights, const PositionBias& bias, Rng& rng)
{
    std::vector<double> w(choice_weights.begin(), choice_weights.end());
    double total = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        w[i] *= bias.at(i);
        total += w[i];
    }
    if (!(total > 0.0)) {
        // Degenerate model: fall back to attention alone.
        for (std::size_t i = 0; i < w.size(); ++i) {
            w[i] = bias.at(i);
        }
    }
    return sample_weighted(w, rng);
}

std::vector<std::size_t> monetary_candidates(const User& user, std::span<const Venue* const> presented)
{
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < presented.size(); ++i) {
        const auto* v = presented[i];
        if (v->offers_deal() || user.visited.contains(v->id)) {
            idx.push_back(i);
        }
    }
    return idx;
}

VenueId honest_pick(const User& user, std::span<const Venue* const> presented, double hv_accident_prob, Rng& rng)
{
    std::vector<std::size_t> real;
    std::vector<std::size_t> honeypots;
    for (std::size_t i = 0; i < presented.size(); ++i) {
        (presented[i]->is_honeypot ? honeypots : real).push_back(i);
    }
    if (real.empty()) {
        throw std::invalid_argument("honest_pick: no real venue presented");
    }
    const bool accident = rng.uniform() < hv_accident_prob;
    if (accident && !honeypots.empty()) {
        return presented[honeypots[rng.below(honeypots.size())]]->id;
    }
    std::vector<double> w;
    w.reserve(real.size());
    for (auto i : real) {
        const auto id = presented[i]->id;
        double p = 0.0;
        for (std::size_t k = 0; k < user.locality.size(); ++k) {
            if (user.locality[k] == id) {
                p = k < user.preference.size() ? user.preference[k] : 0.0;
                break;
            }
        }
        w.push_back(p);
    }
    return presented[real[sample_weighted(w, rng)]]->id;
}

VenueId pick_venue(const User& user, std::span<const Venue* const> presented, const ClassModels& models,
                   const PositionBias& bias, Rng& rng)
{
    if (presented.empty()) {
        throw std::invalid_argument("pick_venue: empty presented list");
    }
    switch (user.cls) {
    case UserClass::Honest:
        return honest_pick(user, presented, models.hv_accident_prob, rng);
    case UserClass::UniformCheater:
    case UserClass::AdaptiveCheater: {
        const std::vector<double> flat(presented.size(), 1.0);
        return presented[sample_biased(flat, bias, rng)]->id;
    }
    case UserClass::GamerCheater: {
        std::vector<double> attr;
        attr.reserve(presented.size());
        for (const auto* v : presented) {
            attr.push_back(attractiveness(v->features, !user.visited.contains(v->id), models.gamer));
        }
        return presented[sample_biased(attr, bias, rng)]->id;
    }
    case UserClass::MonetaryCheater: {
        auto idx = monetary_candidates(user, presented);
        std::vector<double> attr(presented.size(), 0.0);
        if (idx.empty()) {
            idx.resize(presented.size());
            for (std::size_t i = 0; i < idx.size(); ++i) {
                idx[i] = i;
            }
        }
        for (auto i : idx) {
            const auto* v = presented[i];
            attr[i] = attractiveness(v->features, !user.visited.contains(v->id), models.monetary);
        }
        bool any = std::any_of(attr.begin(), attr.end(), [](double a) { return a > 0.0; });
        if (!any) {
            for (auto i : idx) {
                attr[i] = 1.0;
            }
        }
        return presented[sample_biased(attr, bias, rng)]->id;
    }
    }
    throw std::logic_error("pick_venue: unknown user class");
}

std::optional<std::uint64_t> adaptive_budget(const DetectorConfig& detector, double honeypot_mass,
                                             double safety_margin, std::uint64_t lambda)
{
    if (honeypot_mass < 0.0 || honeypot_mass > 1.0) {
        throw std::invalid_argument("adaptive_budget: honeypot mass outside [0, 1]");
    }
    if (!(detector.threshold > 0.0)) {
        throw std::invalid_argument("adaptive_budget: threshold must be positive");
    }
    if (!(safety_margin > 0.0 && safety_margin < 1.0)) {
        throw std::invalid_argument("adaptive_budget: safety_margin must lie in (0, 1)");
    }
    if (honeypot_mass == 0.0) {
        return std::nullopt;
    }
    const double limit = safety_margin * detector.threshold;
    const auto lam = static_cast<double>(lambda);
    auto expected = [&](double b) {
        const double hits = b * honeypot_mass;
        return suspicion_level(hits, std::min(hits, lam), detector);
    };
    // Slope of E[l] in B once the distinct-honeypot term saturates at lambda.
    const double tail_slope = detector.w_q * honeypot_mass;
    const double head_slope = (detector.w_q + detector.w_r) * honeypot_mass;
    if (head_slope <= 0.0) {
        return std::nullopt;
    }
    double estimate = std::floor(limit / head_slope);
    if (estimate * honeypot_mass > lam) {
        if (tail_slope <= 0.0) {
            // E[l] saturates at w_r * lambda, which is already within the limit.
            return std::nullopt;
        }
        estimate = std::floor((limit - detector.w_r * lam) / tail_slope);
    }
    if (!(estimate < 9.0e18)) {
        return std::nullopt;
    }
    auto b = static_cast<std::uint64_t>(std::max(0.0, estimate));
    // Settle floating-point edge cases against the exact comparison.
    while (b > 0 && expected(static_cast<double>(b)) > limit) {
        --b;
    }
    while (expected(static_cast<double>(b + 1)) <= limit) {
        ++b;
    }
    return b;
}

} // namespace honeytrap
