#include "honeytrap/learner.hpp"

#include "honeytrap/errors.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <set>
#include <stdexcept>

namespace honeytrap {

using json = nlohmann::ordered_json;

json to_json(const HoneypotRevision& r)
{
    json deal = nullptr;
    if (r.deal) {
        deal = json{{"required_checkins", r.deal->required_checkins}, {"offer_cost_cents", r.deal->offer_cost.cents}};
    }
    return json{{"effective_round", r.effective_round},
                {"venue", r.venue.value},
                {"features", to_json(r.features)},
                {"deal", deal}};
}

HoneypotRevision honeypot_revision_from_json(const json& j)
{
    HoneypotRevision r;
    r.effective_round = j.at("effective_round").get<Round>();
    r.venue = VenueId{j.at("venue").get<std::uint32_t>()};
    r.features = venue_features_from_json(j.at("features"));
    const auto& d = j.at("deal");
    if (!d.is_null()) {
        r.deal = Deal{d.at("required_checkins").get<std::uint32_t>(), Money{d.at("offer_cost_cents").get<std::int64_t>()}};
    }
    return r;
}

FeatureTimeline::FeatureTimeline(const WorldState& world, std::span<const HoneypotRevision> revisions)
{
    rows_.reserve(world.venues.size() + revisions.size());
    versions_.resize(world.venues.size());
    for (const auto& v : world.venues) {
        versions_[v.id.value].push_back({0, static_cast<std::uint32_t>(rows_.size())});
        rows_.push_back(v.features);
    }
    std::vector<const HoneypotRevision*> ordered;
    for (const auto& r : revisions) {
        ordered.push_back(&r);
    }
    std::stable_sort(ordered.begin(), ordered.end(),
                     [](const auto* a, const auto* b) { return a->effective_round < b->effective_round; });
    for (const auto* r : ordered) {
        auto& list = versions_.at(r->venue.value);
        const auto row = static_cast<std::uint32_t>(rows_.size());
        rows_.push_back(r->features);
        if (!list.empty() && list.back().from == r->effective_round) {
            list.back().row = row;
        }
        else {
            list.push_back({r->effective_round, row});
        }
    }
}

std::uint32_t FeatureTimeline::row(VenueId venue, Round round) const
{
    const auto& list = versions_.at(venue.value);
    auto it = std::upper_bound(list.begin(), list.end(), round,
                               [](Round r, const Version& v) { return r < v.from; });
    return it == list.begin() ? list.front().row : std::prev(it)->row;
}

const VenueFeatures& FeatureTimeline::at(VenueId venue, Round round) const
{
    return rows_[row(venue, round)];
}

namespace {

struct Column {
    enum class Kind { Points, Mayor, DealCount, Type, DealType };
    Kind kind = Kind::Points;
    std::string type;
    std::uint32_t index = 0;
};

Column parse_column(const std::string& name)
{
    Column c;
    if (name == "points") {
        c.kind = Column::Kind::Points;
    }
    else if (name == "mayor") {
        c.kind = Column::Kind::Mayor;
    }
    else if (name == "deal_count") {
        c.kind = Column::Kind::DealCount;
    }
    else if (name.rfind("type:", 0) == 0 && name.size() > 5) {
        c.kind = Column::Kind::Type;
        c.type = name.substr(5);
    }
    else if (name.rfind("deal_type:", 0) == 0 && name.size() > 10) {
        c.kind = Column::Kind::DealType;
        std::size_t used = 0;
        const auto digits = name.substr(10);
        unsigned long idx = 0;
        try {
            idx = std::stoul(digits, &used);
        }
        catch (const std::exception&) {
            used = 0;
        }
        if (used != digits.size()) {
            throw std::invalid_argument("unknown feature '" + name + "'");
        }
        c.index = static_cast<std::uint32_t>(idx);
    }
    else {
        throw std::invalid_argument("unknown feature '" + name + "'");
    }
    return c;
}

double column_value(const Column& c, const VenueFeatures& f, bool first_visit)
{
    switch (c.kind) {
    case Column::Kind::Points:
        return static_cast<double>(f.points(first_visit));
    case Column::Kind::Mayor:
        return f.mayorship_prob;
    case Column::Kind::DealCount:
        return static_cast<double>(f.deal_count);
    case Column::Kind::Type:
        return f.venue_type == c.type ? 1.0 : 0.0;
    case Column::Kind::DealType:
        return c.index < f.deal_types.size() ? static_cast<double>(f.deal_types[c.index]) : 0.0;
    }
    return 0.0;
}

void set_weight(BehaviorWeights& w, const Column& c, double value, std::uint32_t deal_type_count)
{
    switch (c.kind) {
    case Column::Kind::Points:
        w.w_points = value;
        break;
    case Column::Kind::Mayor:
        w.w_mayor = value;
        break;
    case Column::Kind::DealCount:
        w.w_deal_count = value;
        break;
    case Column::Kind::Type:
        w.w_type[c.type] = value;
        break;
    case Column::Kind::DealType:
        if (w.w_deal_types.size() < std::max(deal_type_count, c.index + 1)) {
            w.w_deal_types.resize(std::max(deal_type_count, c.index + 1), 0.0);
        }
        w.w_deal_types[c.index] = value;
        break;
    }
}

/// Per observation: chosen feature vector, attention-weighted candidate sum and the
/// attention share of the chosen slot. Since the model is linear in w,
/// log p = log(share) + log(w.chosen) - log(w.sum / total attention).
struct Sufficient {
    std::size_t dim = 0;
    std::vector<double> chosen;
    std::vector<double> sum;
    std::vector<double> log_share;
    bool all_flat = true;
};

Sufficient summarize(const CalibrationDataset& data, const std::vector<Column>& cols)
{
    Sufficient s;
    s.dim = cols.size();
    const auto n = data.observations.size();
    s.chosen.assign(n * s.dim, 0.0);
    s.sum.assign(n * s.dim, 0.0);
    s.log_share.assign(n, 0.0);
    std::vector<double> first(s.dim);
    std::vector<double> value(s.dim);
    for (std::size_t o = 0; o < n; ++o) {
        const auto& obs = data.observations[o];
        const auto k_count = obs.candidate_rows.size();
        if (k_count == 0 || obs.chosen >= k_count || obs.first_visit.size() != k_count ||
            (!obs.attention.empty() && obs.attention.size() != k_count)) {
            throw std::invalid_argument("calibration observation is malformed");
        }
        double attention_total = 0.0;
        for (std::size_t k = 0; k < k_count; ++k) {
            attention_total += obs.attention.empty() ? 1.0 : obs.attention[k];
        }
        if (!(attention_total > 0.0)) {
            throw std::invalid_argument("calibration observation has no attention mass");
        }
        bool flat = true;
        for (std::size_t k = 0; k < k_count; ++k) {
            const auto& f = data.features.at(obs.candidate_rows[k]);
            const double b = (obs.attention.empty() ? 1.0 : obs.attention[k]) / attention_total;
            for (std::size_t d = 0; d < s.dim; ++d) {
                value[d] = column_value(cols[d], f, obs.first_visit[k]);
                s.sum[o * s.dim + d] += b * value[d];
                if (k == obs.chosen) {
                    s.chosen[o * s.dim + d] = value[d];
                }
            }
            if (k == 0) {
                first = value;
            }
            else if (value != first) {
                flat = false;
            }
        }
        s.log_share[o] = std::log((obs.attention.empty() ? 1.0 : obs.attention[obs.chosen]) / attention_total);
        s.all_flat = s.all_flat && flat;
    }
    return s;
}

double evaluate(const Sufficient& s, std::span<const double> w)
{
    double ll = 0.0;
    const auto n = s.log_share.size();
    for (std::size_t o = 0; o < n; ++o) {
        double sc = 0.0;
        double ss = 0.0;
        for (std::size_t d = 0; d < s.dim; ++d) {
            sc += w[d] * s.chosen[o * s.dim + d];
            ss += w[d] * s.sum[o * s.dim + d];
        }
        ll += s.log_share[o];
        if (!(ss > 0.0)) {
            // Every candidate has zero attractiveness: the choice follows attention alone.
            continue;
        }
        if (!(sc > 0.0)) {
            return -std::numeric_limits<double>::infinity();
        }
        ll += std::log(sc) - std::log(ss);
    }
    return ll;
}

std::vector<Column> parse_columns(const std::vector<std::string>& features, std::uint32_t deal_type_count)
{
    if (features.empty()) {
        throw std::invalid_argument("fit: no features selected");
    }
    std::set<std::string> seen;
    std::vector<Column> cols;
    for (const auto& f : features) {
        validate_feature_name(f, deal_type_count);
        if (!seen.insert(f).second) {
            throw std::invalid_argument("fit: duplicate feature '" + f + "'");
        }
        cols.push_back(parse_column(f));
    }
    return cols;
}

std::uint32_t grid_divisions(double grid_step)
{
    if (!(grid_step > 0.0 && grid_step <= 0.5)) {
        throw std::invalid_argument("fit_weights: grid_step must lie in (0, 0.5]");
    }
    const double k = 1.0 / grid_step;
    const auto rounded = std::llround(k);
    if (std::abs(k - static_cast<double>(rounded)) > 1e-6 * k) {
        throw std::invalid_argument("fit_weights: 1/grid_step must be an integer");
    }
    return static_cast<std::uint32_t>(rounded);
}

} // namespace

void validate_feature_name(const std::string& name, std::uint32_t deal_type_count)
{
    const auto c = parse_column(name);
    if (c.kind == Column::Kind::DealType && c.index >= deal_type_count) {
        throw std::invalid_argument("feature '" + name + "' exceeds the deal type count");
    }
}

double feature_value(const VenueFeatures& features, bool first_visit, const std::string& name)
{
    return column_value(parse_column(name), features, first_visit);
}

json to_json(const FitResult& f)
{
    return json{{"schema_version", kSchemaVersion},
                {"weights", to_json(f.weights)},
                {"log_likelihood", f.log_likelihood},
                {"grid_step", f.grid_step},
                {"n_observations", f.n_observations},
                {"features", f.features}};
}

FitResult fit_result_from_json(const json& j)
{
    FitResult f;
    f.weights = behavior_weights_from_json(j.at("weights"), "weights");
    f.log_likelihood = j.at("log_likelihood").get<double>();
    f.grid_step = j.at("grid_step").get<double>();
    f.n_observations = j.at("n_observations").get<std::uint64_t>();
    f.features = j.at("features").get<std::vector<std::string>>();
    return f;
}

CalibrationDataset collect_flagged_histories(std::span<const CheckInEvent> events,
                                             const std::map<UserId, SuspicionRecord>& records,
                                             const WorldState& world, std::span<const HoneypotRevision> revisions,
                                             Round since_round, const PositionBias* list_bias)
{
    std::set<UserId> flagged;
    for (const auto& [user, rec] : records) {
        if (rec.flagged) {
            flagged.insert(user);
        }
    }
    if (flagged.empty()) {
        throw EmptyDataset("no flagged users");
    }

    const FeatureTimeline timeline(world, revisions);
    CalibrationDataset data;
    data.venue_types = world.venue_types;
    data.deal_type_count = world.deal_type_count;

    std::map<UserId, std::set<VenueId>> visited;
    for (const auto& e : events) {
        if (!flagged.contains(e.user)) {
            continue;
        }
        auto& seen = visited[e.user];
        if (e.round >= since_round) {
            Observation obs;
            auto add = [&](VenueId id) {
                obs.candidate_rows.push_back(timeline.row(id, e.round));
                obs.first_visit.push_back(!seen.contains(id));
            };
            bool found = false;
            if (e.presented.empty()) {
                for (const auto& v : world.venues) {
                    add(v.id);
                }
                obs.chosen = e.venue.value;
                found = e.venue.value < world.venues.size();
            }
            else {
                for (std::size_t k = 0; k < e.presented.size(); ++k) {
                    add(e.presented[k]);
                    if (list_bias != nullptr) {
                        obs.attention.push_back(list_bias->at(k));
                    }
                    if (e.presented[k] == e.venue) {
                        obs.chosen = static_cast<std::uint32_t>(k);
                        found = true;
                    }
                }
            }
            if (!found) {
                throw std::runtime_error("event log: chosen venue missing from its presented list");
            }
            data.observations.push_back(std::move(obs));
        }
        seen.insert(e.venue);
    }
    if (data.observations.empty()) {
        throw EmptyDataset("flagged users have no check-ins in the history window");
    }
    data.features = timeline.rows();
    return data;
}

double log_likelihood(const CalibrationDataset& data, const std::vector<std::string>& features,
                      std::span<const double> weights)
{
    const auto cols = parse_columns(features, data.deal_type_count);
    if (weights.size() != cols.size()) {
        throw std::invalid_argument("log_likelihood: weight count differs from feature count");
    }
    return evaluate(summarize(data, cols), weights);
}

FitResult fit_weights(const CalibrationDataset& data, double grid_step, const std::vector<std::string>& features)
{
    if (data.observations.empty()) {
        throw EmptyDataset("no observations to fit");
    }
    const auto divisions = grid_divisions(grid_step);
    const auto cols = parse_columns(features, data.deal_type_count);
    const auto stats = summarize(data, cols);
    if (stats.all_flat) {
        throw NonIdentifiable("every observation offers identical candidates; the likelihood is flat");
    }

    const auto dim = cols.size();
    std::vector<std::uint32_t> parts(dim, 0);
    std::vector<double> w(dim, 0.0);
    std::vector<std::uint32_t> best_parts;
    double best = -std::numeric_limits<double>::infinity();
    double lowest = std::numeric_limits<double>::infinity();

    // Compositions of `divisions` into dim parts, in lexicographic order.
    std::function<void(std::size_t, std::uint32_t)> walk = [&](std::size_t d, std::uint32_t remaining) {
        if (d + 1 == dim) {
            parts[d] = remaining;
            for (std::size_t i = 0; i < dim; ++i) {
                w[i] = static_cast<double>(parts[i]) / divisions;
            }
            const double ll = evaluate(stats, w);
            lowest = std::min(lowest, ll);
            // Differences at rounding level count as ties so the lexicographic rule decides.
            const bool better = std::isfinite(best) ? ll > best + 1e-12 * std::max(1.0, std::abs(best)) : ll > best;
            if (best_parts.empty() || better) {
                best = ll;
                best_parts = parts;
            }
            return;
        }
        for (std::uint32_t p = 0; p <= remaining; ++p) {
            parts[d] = p;
            walk(d + 1, remaining - p);
        }
    };
    walk(0, divisions);

    if (std::isfinite(best) && std::isfinite(lowest) && best - lowest <= 1e-9 * std::max(1.0, std::abs(best))) {
        throw NonIdentifiable("the likelihood is flat over the weight simplex");
    }
    if (!std::isfinite(best)) {
        throw NonIdentifiable("no weight vector gives every chosen venue positive probability");
    }

    FitResult result;
    for (std::size_t i = 0; i < dim; ++i) {
        set_weight(result.weights, cols[i], static_cast<double>(best_parts[i]) / divisions, data.deal_type_count);
    }
    result.log_likelihood = best;
    result.grid_step = grid_step;
    result.n_observations = data.observations.size();
    result.features = features;
    return result;
}

namespace {

BehaviorWeights combine(const BehaviorWeights& a, double wa, const BehaviorWeights& b, double wb)
{
    BehaviorWeights out;
    out.w_points = wa * a.w_points + wb * b.w_points;
    out.w_mayor = wa * a.w_mayor + wb * b.w_mayor;
    out.w_deal_count = wa * a.w_deal_count + wb * b.w_deal_count;
    for (const auto& [k, _] : a.w_type) {
        out.w_type[k] = wa * a.type_weight(k) + wb * b.type_weight(k);
    }
    for (const auto& [k, _] : b.w_type) {
        out.w_type[k] = wa * a.type_weight(k) + wb * b.type_weight(k);
    }
    const auto n = std::max(a.w_deal_types.size(), b.w_deal_types.size());
    out.w_deal_types.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double x = i < a.w_deal_types.size() ? a.w_deal_types[i] : 0.0;
        const double y = i < b.w_deal_types.size() ? b.w_deal_types[i] : 0.0;
        out.w_deal_types[i] = wa * x + wb * y;
    }
    return out;
}

} // namespace

BehaviorWeights refine_loop(const BehaviorWeights& current, const FitResult& fit, double blend)
{
    if (!(blend >= 0.0 && blend <= 1.0)) {
        throw std::invalid_argument("refine_loop: blend must lie in [0, 1]");
    }
    return combine(fit.weights.normalized(), blend, current.normalized(), 1.0 - blend).normalized();
}

std::vector<FeatureGain> extend_feature_set(const CalibrationDataset& data, const std::vector<std::string>& candidates,
                                            const std::vector<std::string>& base_features, double grid_step,
                                            double threshold)
{
    std::vector<FeatureGain> report;
    if (candidates.empty()) {
        return report;
    }
    const auto base = fit_weights(data, grid_step, base_features);
    for (const auto& name : candidates) {
        FeatureGain g;
        g.feature = name;
        g.base_log_likelihood = base.log_likelihood;
        if (std::find(base_features.begin(), base_features.end(), name) != base_features.end()) {
            g.extended_log_likelihood = base.log_likelihood;
        }
        else {
            auto extended = base_features;
            extended.push_back(name);
            g.extended_log_likelihood = fit_weights(data, grid_step, extended).log_likelihood;
        }
        g.gain = g.extended_log_likelihood - g.base_log_likelihood;
        g.recommended = 2.0 * g.gain > threshold;
        report.push_back(g);
    }
    return report;
}

} // namespace honeytrap
