#include "honeytrap/honeypots.hpp"

#include "honeytrap/errors.hpp"
#include "honeytrap/json_reader.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace honeytrap {

using json = nlohmann::ordered_json;

std::string_view to_string(Placement p)
{
    switch (p) {
    case Placement::Top:
        return "top";
    case Placement::Bottom:
        return "bottom";
    case Placement::UniformInterleave:
        return "uniform_interleave";
    }
    return "?";
}

void PresentationPolicy::validate() const
{
    if (list_length == 0) {
        throw ConfigError("presentation.delta", "must be positive");
    }
    if (hv_count > list_length) {
        throw ConfigError("presentation.hv_count", "must not exceed delta");
    }
}

json to_json(const PresentationPolicy& p)
{
    return json{{"delta", p.list_length},
                {"hv_count", p.hv_count},
                {"placement", to_string(p.placement)},
                {"personalize", p.personalize}};
}

PresentationPolicy presentation_policy_from_json(const json& j, const std::string& path)
{
    ObjectReader r(j, path);
    PresentationPolicy p;
    r.read("delta", p.list_length);
    r.read("hv_count", p.hv_count);
    std::string placement(to_string(p.placement));
    r.read("placement", placement);
    if (placement == "top") {
        p.placement = Placement::Top;
    }
    else if (placement == "bottom") {
        p.placement = Placement::Bottom;
    }
    else if (placement == "uniform_interleave") {
        p.placement = Placement::UniformInterleave;
    }
    else {
        throw ConfigError(r.path_of("placement"), "expected top, bottom or uniform_interleave");
    }
    r.read("personalize", p.personalize);
    r.finish();
    p.validate();
    return p;
}

PositionBias PositionBias::harmonic(std::size_t length)
{
    PositionBias b;
    b.attention.resize(length);
    double total = 0.0;
    for (std::size_t i = 0; i < length; ++i) {
        b.attention[i] = 1.0 / static_cast<double>(i + 1);
        total += b.attention[i];
    }
    for (auto& a : b.attention) {
        a /= total;
    }
    return b;
}

PositionBias PositionBias::uniform(std::size_t length)
{
    PositionBias b;
    b.attention.assign(length, length == 0 ? 0.0 : 1.0 / static_cast<double>(length));
    return b;
}

double PositionBias::at(std::size_t position) const
{
    if (attention.empty()) {
        return 1.0;
    }
    return position < attention.size() ? attention[position] : attention.back();
}

void PositionBias::validate() const
{
    if (attention.empty() || !(attention.front() > 0.0)) {
        throw std::invalid_argument("position bias: first entry must be positive");
    }
    for (std::size_t i = 0; i < attention.size(); ++i) {
        if (!(attention[i] >= 0.0 && attention[i] <= 1.0)) {
            throw std::invalid_argument("position bias: entries must lie in [0, 1]");
        }
        if (i > 0 && attention[i] > attention[i - 1]) {
            throw std::invalid_argument("position bias: entries must be non-increasing");
        }
    }
}

void FeatureBounds::validate() const
{
    if (points_new.lo > points_new.hi) {
        throw ConfigError("honeypots.bounds.points_new", "empty range");
    }
    if (points_repeat.lo > points_repeat.hi) {
        throw ConfigError("honeypots.bounds.points_repeat", "empty range");
    }
    if (!(mayorship_prob.lo >= 0.0 && mayorship_prob.hi <= 1.0 && mayorship_prob.lo <= mayorship_prob.hi)) {
        throw ConfigError("honeypots.bounds.mayorship_prob", "must be a non-empty range within [0, 1]");
    }
    if (deal_count.lo > deal_count.hi) {
        throw ConfigError("honeypots.bounds.deal_count", "empty range");
    }
    if (deal_count.hi > 0 && deal_type_count == 0) {
        throw ConfigError("honeypots.bounds.deal_count", "deals need at least one deal type");
    }
    if (venue_types.empty()) {
        throw ConfigError("venues.venue_types", "must not be empty");
    }
}

namespace {

template <class T>
T corner(const Bounds<T>& b, double weight)
{
    return weight > 0.0 ? b.hi : b.lo;
}

std::uint32_t jitter_count(std::uint32_t value, const Bounds<std::uint32_t>& b, double jitter, Rng& rng)
{
    const double factor = 1.0 + jitter * (2.0 * rng.uniform() - 1.0);
    const auto v = std::llround(static_cast<double>(value) * factor);
    return static_cast<std::uint32_t>(std::clamp<long long>(v, b.lo, b.hi));
}

double jitter_real(double value, const Bounds<double>& b, double jitter, Rng& rng)
{
    const double factor = 1.0 + jitter * (2.0 * rng.uniform() - 1.0);
    return std::clamp(value * factor, b.lo, b.hi);
}

template <class T>
T random_in(const Bounds<T>& b, Rng& rng)
{
    if constexpr (std::is_floating_point_v<T>) {
        return b.lo + (b.hi - b.lo) * rng.uniform();
    }
    else {
        return static_cast<T>(b.lo + rng.below(static_cast<std::uint64_t>(b.hi - b.lo) + 1));
    }
}

// Keeps deal_count = 0 exactly when no deal type is set.
void settle_deal_types(VenueFeatures& f, const BehaviorWeights& w, std::uint32_t deal_type_count, Rng* rng)
{
    f.deal_types.assign(deal_type_count, 0);
    if (f.deal_count == 0) {
        return;
    }
    bool any = false;
    for (std::uint32_t i = 0; i < deal_type_count; ++i) {
        const double wi = i < w.w_deal_types.size() ? w.w_deal_types[i] : 0.0;
        if (rng != nullptr) {
            f.deal_types[i] = rng->bernoulli(0.5) ? 1 : 0;
        }
        else if (wi > 0.0) {
            f.deal_types[i] = 1;
        }
        any = any || f.deal_types[i] != 0;
    }
    if (!any) {
        std::uint32_t best = 0;
        for (std::uint32_t i = 1; i < deal_type_count; ++i) {
            const double wi = i < w.w_deal_types.size() ? w.w_deal_types[i] : 0.0;
            const double wb = best < w.w_deal_types.size() ? w.w_deal_types[best] : 0.0;
            if (wi > wb) {
                best = i;
            }
        }
        f.deal_types[best] = 1;
    }
}

} // namespace

std::vector<Venue> design_honeypots(std::uint32_t count, const BehaviorWeights& estimate, const FeatureBounds& bounds,
                                    const DesignOptions& options, Rng& rng)
{
    bounds.validate();
    if (!(options.jitter >= 0.0 && options.jitter < 1.0)) {
        throw std::invalid_argument("design_honeypots: jitter must lie in [0, 1)");
    }
    const bool zero_model = !(estimate.total() > 0.0);
    if (zero_model && options.on_zero == DesignOptions::OnZeroModel::Error) {
        throw std::invalid_argument("design_honeypots: all-zero model estimate");
    }

    VenueFeatures best;
    if (!zero_model) {
        best.points_new = corner(bounds.points_new, estimate.w_points);
        best.points_repeat = corner(bounds.points_repeat, estimate.w_points);
        best.mayorship_prob = corner(bounds.mayorship_prob, estimate.w_mayor);
        double any_deal_type = 0.0;
        for (double w : estimate.w_deal_types) {
            any_deal_type = std::max(any_deal_type, w);
        }
        best.deal_count = corner(bounds.deal_count, std::max(estimate.w_deal_count, any_deal_type));
        best.venue_type = bounds.venue_types.front();
        double best_type = estimate.type_weight(best.venue_type);
        for (const auto& t : bounds.venue_types) {
            if (estimate.type_weight(t) > best_type) {
                best_type = estimate.type_weight(t);
                best.venue_type = t;
            }
        }
        settle_deal_types(best, estimate, bounds.deal_type_count, nullptr);
    }

    std::vector<Venue> out;
    out.reserve(count);
    for (std::uint32_t i = 0; i < count; ++i) {
        Venue v;
        v.is_honeypot = true;
        if (zero_model) {
            v.features.points_new = random_in(bounds.points_new, rng);
            v.features.points_repeat = random_in(bounds.points_repeat, rng);
            v.features.mayorship_prob = random_in(bounds.mayorship_prob, rng);
            v.features.deal_count = random_in(bounds.deal_count, rng);
            v.features.venue_type = bounds.venue_types[rng.below(bounds.venue_types.size())];
            settle_deal_types(v.features, estimate, bounds.deal_type_count, &rng);
        }
        else {
            v.features = best;
            if (options.jitter > 0.0) {
                v.features.points_new = jitter_count(best.points_new, bounds.points_new, options.jitter, rng);
                v.features.points_repeat = jitter_count(best.points_repeat, bounds.points_repeat, options.jitter, rng);
                v.features.mayorship_prob = jitter_real(best.mayorship_prob, bounds.mayorship_prob, options.jitter, rng);
                v.features.deal_count = jitter_count(best.deal_count, bounds.deal_count, options.jitter, rng);
                settle_deal_types(v.features, estimate, bounds.deal_type_count, nullptr);
            }
        }
        if (v.features.deal_count > 0) {
            v.deal = bounds.deal;
        }
        out.push_back(std::move(v));
    }
    return out;
}

std::vector<std::uint32_t> interleave_positions(std::uint32_t list_length, std::uint32_t hv_count)
{
    if (hv_count > list_length) {
        throw std::invalid_argument("interleave_positions: more honeypots than slots");
    }
    std::vector<bool> taken(list_length + 1, false);
    std::vector<std::uint32_t> out;
    out.reserve(hv_count);
    for (std::uint32_t j = 1; j <= hv_count; ++j) {
        const double ideal = static_cast<double>(j) * list_length / static_cast<double>(hv_count + 1);
        auto pos = static_cast<std::uint32_t>(std::clamp<long long>(std::llround(ideal), 1, list_length));
        while (taken[pos]) {
            pos = pos == list_length ? 1 : pos + 1;
        }
        taken[pos] = true;
        out.push_back(pos);
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<std::uint32_t> honeypot_positions(Placement placement, std::uint32_t list_length, std::uint32_t hv_count)
{
    if (hv_count > list_length) {
        throw std::invalid_argument("honeypot_positions: more honeypots than slots");
    }
    std::vector<std::uint32_t> out;
    switch (placement) {
    case Placement::Top:
        for (std::uint32_t i = 1; i <= hv_count; ++i) {
            out.push_back(i);
        }
        break;
    case Placement::Bottom:
        for (std::uint32_t i = list_length - hv_count + 1; i <= list_length; ++i) {
            out.push_back(i);
        }
        break;
    case Placement::UniformInterleave:
        out = interleave_positions(list_length, hv_count);
        break;
    }
    return out;
}

std::uint32_t effective_hv_count(const PresentationPolicy& policy, std::uint32_t lambda, double level, double threshold)
{
    std::uint64_t n = policy.hv_count;
    if (policy.personalize && threshold > 0.0) {
        n = static_cast<std::uint64_t>(std::llround(policy.hv_count * (1.0 + level / threshold)));
    }
    n = std::min<std::uint64_t>(n, lambda);
    n = std::min<std::uint64_t>(n, policy.list_length);
    return static_cast<std::uint32_t>(n);
}

std::vector<VenueId> present_venues(const User& user, const WorldState& world, const PresentationPolicy& policy,
                                    double user_level, double threshold, Rng& rng)
{
    const auto delta = policy.list_length;
    const auto n_hv = effective_hv_count(policy, world.lambda, user_level, threshold);
    const auto n_real = delta - n_hv;
    if (world.phi < n_real) {
        throw std::invalid_argument("present_venues: world has fewer real venues than the list needs");
    }

    std::vector<VenueId> real;
    real.reserve(n_real);
    const auto from_locality = std::min<std::uint32_t>(n_real, static_cast<std::uint32_t>(user.locality.size()));
    for (auto idx : sample_without_replacement(static_cast<std::uint32_t>(user.locality.size()), from_locality, rng)) {
        real.push_back(user.locality[idx]);
    }
    if (real.size() < n_real) {
        // Locality too small: top up from the other real venues.
        std::vector<VenueId> rest;
        for (std::uint32_t i = 0; i < world.phi; ++i) {
            if (std::find(real.begin(), real.end(), VenueId{i}) == real.end()) {
                rest.push_back(VenueId{i});
            }
        }
        const auto need = static_cast<std::uint32_t>(n_real - real.size());
        for (auto idx : sample_without_replacement(static_cast<std::uint32_t>(rest.size()), need, rng)) {
            real.push_back(rest[idx]);
        }
    }

    std::vector<VenueId> honeypots;
    honeypots.reserve(n_hv);
    for (auto idx : sample_without_replacement(world.lambda, n_hv, rng)) {
        honeypots.push_back(VenueId{world.phi + idx});
    }

    const auto positions = honeypot_positions(policy.placement, delta, n_hv);
    std::vector<VenueId> list(delta);
    std::vector<bool> is_hv_slot(delta, false);
    for (std::size_t k = 0; k < positions.size(); ++k) {
        is_hv_slot[positions[k] - 1] = true;
        list[positions[k] - 1] = honeypots[k];
    }
    std::size_t next_real = 0;
    for (std::uint32_t slot = 0; slot < delta; ++slot) {
        if (!is_hv_slot[slot]) {
            list[slot] = real[next_real++];
        }
    }
    return list;
}

} // namespace honeytrap
