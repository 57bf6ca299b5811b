#include "honeytrap/sim.hpp"

#include "honeytrap/behavior.hpp"
#include "honeytrap/economics.hpp"
#include "honeytrap/errors.hpp"
#include "honeytrap/honeypots.hpp"
#include "honeytrap/metrics.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <atomic>
#include <exception>
#include <thread>

namespace honeytrap {

namespace {

/// Honeypot mass an adaptive cheater expects from one feature-blind pick.
double expected_honeypot_mass(const SimConfig& config)
{
    if (config.lambda == 0) {
        return 0.0;
    }
    if (config.behavior.candidate_scope == CandidateScope::World) {
        return uniform_honeypot_mass(config.lambda, config.phi);
    }
    const auto n_hv = effective_hv_count(config.presentation, config.lambda, 0.0, config.detector.threshold);
    const auto positions = honeypot_positions(config.presentation.placement, config.presentation.list_length, n_hv);
    const auto bias = config.bias();
    double total = 0.0;
    for (std::size_t i = 0; i < config.presentation.list_length; ++i) {
        total += bias.at(i);
    }
    double hv = 0.0;
    for (auto p : positions) {
        hv += bias.at(p - 1);
    }
    return hv / total;
}

struct Engine {
    const SimConfig& config;
    WorldState live;
    ClassModels models;
    PositionBias list_bias;
    PositionBias world_bias;
    std::vector<const Venue*> all_venues;
    std::vector<Rng> user_rngs;
    ChallengeMemory memory;
    std::map<UserId, SuspicionRecord> records;
    std::vector<CheckInEvent> events;
    std::vector<std::uint64_t> fakes_issued;
    std::map<std::pair<std::uint32_t, std::uint32_t>, std::uint64_t> deal_progress;
    std::optional<std::uint64_t> budget;

    Engine(const SimConfig& cfg, const WorldState& world, const Rng& root)
        : config(cfg), live(world), models(cfg.class_models()), list_bias(cfg.bias())
    {
        world_bias = PositionBias::uniform(std::max<std::size_t>(live.venues.size(), 1));
        for (const auto& v : live.venues) {
            all_venues.push_back(&v);
        }
        user_rngs.reserve(live.users.size());
        for (const auto& u : live.users) {
            user_rngs.push_back(root.derive(stream::kUser, u.id.value));
            records[u.id].user = u.id;
        }
        fakes_issued.assign(live.users.size(), 0);
        if (cfg.users.adaptive > 0) {
            budget = adaptive_budget(cfg.detector, expected_honeypot_mass(cfg), cfg.behavior.adaptive_safety_margin,
                                     cfg.lambda);
        }
    }

    bool label_fake(const User& user, const Venue& venue)
    {
        switch (user.cls) {
        case UserClass::Honest:
            return false;
        case UserClass::MonetaryCheater:
            if (!venue.is_honeypot && venue.deal) {
                // The visit that completes a redemption cycle is made in person.
                const auto counted = deal_progress[{user.id.value, venue.id.value}];
                return counted % venue.deal->required_checkins != venue.deal->required_checkins - 1;
            }
            return true;
        default:
            return true;
        }
    }

    void check_in(User& user, Round round, Rng& rng)
    {
        auto& record = records[user.id];
        const bool world_scope =
            is_cheater(user.cls) && config.behavior.candidate_scope == CandidateScope::World;

        CheckInEvent event;
        event.round = round;
        event.user = user.id;

        std::vector<const Venue*> shown;
        const PositionBias* bias = &list_bias;
        if (world_scope) {
            bias = &world_bias;
        }
        else {
            event.presented =
                present_venues(user, live, config.presentation, record.level, config.detector.threshold, rng);
            shown.reserve(event.presented.size());
            for (auto id : event.presented) {
                shown.push_back(&live.venue(id));
            }
        }
        const std::span<const Venue* const> candidates = world_scope ? std::span<const Venue* const>(all_venues)
                                                                     : std::span<const Venue* const>(shown);
        event.venue = pick_venue(user, candidates, models, *bias, rng);

        const Venue& venue = live.venue(event.venue);
        event.is_fake = label_fake(user, venue);
        event.hit_honeypot = venue.is_honeypot;
        if (config.venues.challenges.enabled && !venue.is_honeypot && venue.deal && venue.challenge) {
            const auto outcome = issue_challenge(venue, user.id, round, event.is_fake, memory, config.detector, rng);
            event.challenge_result = outcome.passed ? ChallengeResult::Passed : ChallengeResult::Failed;
        }

        const auto before = record.flagged;
        record = observe_checkin(std::move(record), event, config.detector);
        if (!before && record.flagged) {
            spdlog::debug("round {}: user {} ({}) flagged at level {}", round, user.id.value, to_string(user.cls),
                          record.level);
        }

        user.visited.insert(event.venue);
        if (event.is_fake) {
            ++fakes_issued[user.id.value];
        }
        if (user.cls == UserClass::MonetaryCheater && !venue.is_honeypot && venue.deal &&
            event.challenge_result != ChallengeResult::Failed) {
            ++deal_progress[{user.id.value, venue.id.value}];
        }
        events.push_back(std::move(event));
    }

    void play_round(Round round)
    {
        for (auto& user : live.users) {
            auto& rng = user_rngs[user.id.value];
            const auto n = rng.poisson(config.checkin_rate);
            for (std::uint64_t k = 0; k < n; ++k) {
                if (user.cls == UserClass::AdaptiveCheater && budget && fakes_issued[user.id.value] >= *budget) {
                    break;
                }
                check_in(user, round, rng);
            }
        }
    }
};

} // namespace

std::vector<SimConfig> with_seeds(const SimConfig& base, const std::vector<std::uint64_t>& seeds)
{
    std::vector<SimConfig> out;
    out.reserve(seeds.size());
    for (auto s : seeds) {
        out.push_back(base);
        out.back().seed = s;
    }
    return out;
}

RunResult run(const SimConfig& config)
{
    config.validate();
    const Rng root(config.seed);
    auto world_rng = root.derive(stream::kWorld);

    RunResult result;
    result.world = build_world(config, world_rng);
    check_invariants(result.world);

    Engine engine(config, result.world, root);
    BehaviorWeights estimate = config.honeypots.initial_estimate.normalized();
    std::vector<FitRecord> trajectory;
    trajectory.push_back(FitRecord{0, std::nullopt, estimate, "initial estimate"});

    std::uint64_t refits = 0;
    for (Round round = 0; round < config.rounds; ++round) {
        engine.play_round(round);

        const bool refit_due = config.learner.enabled && config.lambda > 0 &&
                               (round + 1) % config.learner.refit_every == 0 && round + 1 < config.rounds;
        if (!refit_due) {
            continue;
        }
        const Round next = round + 1;
        FitRecord record{next, std::nullopt, estimate, ""};
        try {
            const Round since = config.learner.history_window == 0 || next <= config.learner.history_window
                                    ? 0
                                    : next - config.learner.history_window;
            const auto data =
                collect_flagged_histories(engine.events, engine.records, result.world, result.revisions, since,
                                          &engine.list_bias);
            auto fit = fit_weights(data, config.learner.grid_step, config.learner.features);
            estimate = refine_loop(estimate, fit, config.learner.blend);
            record.fit = std::move(fit);
            record.estimate = estimate;

            auto design_rng = root.derive(stream::kDesign, refits);
            auto redesigned = design_honeypots(config.lambda, estimate, config.feature_bounds(), config.honeypots.design,
                                               design_rng);
            for (std::uint32_t i = 0; i < redesigned.size(); ++i) {
                Venue& hv = engine.live.venue(VenueId{config.phi + i});
                hv.features = redesigned[i].features;
                hv.deal = redesigned[i].deal;
                result.revisions.push_back(HoneypotRevision{next, hv.id, hv.features, hv.deal});
            }
        }
        catch (const EmptyDataset& e) {
            record.note = e.what();
        }
        catch (const NonIdentifiable& e) {
            record.note = e.what();
        }
        spdlog::info("round {}: refit {}{}", next, refits, record.note.empty() ? "" : " skipped: " + record.note);
        ++refits;
        trajectory.push_back(std::move(record));
    }

    result.events = std::move(engine.events);
    result.records = std::move(engine.records);
    result.report = build_report(config, result.world, result.events, result.records, std::move(trajectory),
                                 engine.budget);
    return result;
}

RunReport build_report(const SimConfig& config, const WorldState& world, std::span<const CheckInEvent> events,
                       const std::map<UserId, SuspicionRecord>& records, std::vector<FitRecord> trajectory,
                       std::optional<std::uint64_t> adaptive_budget)
{
    RunReport report;
    report.rng_algorithm = std::string(Rng::kAlgorithm);
    report.config = config;
    report.adaptive_budget = adaptive_budget;
    report.weights_trajectory = std::move(trajectory);

    auto flagged = [&](UserId id) {
        auto it = records.find(id);
        return it != records.end() && it->second.flagged;
    };

    std::vector<std::uint64_t> fakes(world.users.size(), 0);
    for (const auto& e : events) {
        ++report.total_checkins;
        if (e.is_fake) {
            ++report.total_fakes;
            ++fakes.at(e.user.value);
        }
    }

    std::uint64_t honest = 0;
    std::uint64_t false_positives = 0;
    std::vector<double> times;
    for (const auto& u : world.users) {
        auto& stats = report.per_class[std::string(to_string(u.cls))];
        ++stats.users;
        stats.fake_checkins += fakes[u.id.value];
        const bool f = flagged(u.id);
        if (f) {
            ++stats.flagged;
        }
        else {
            report.residual_fakes += fakes[u.id.value];
        }
        if (is_cheater(u.cls)) {
            ++report.time_to_detection.cheaters;
            if (f) {
                ++report.time_to_detection.detected;
                times.push_back(static_cast<double>(*records.at(u.id).flagged_round));
            }
        }
        else {
            ++honest;
            if (f) {
                ++false_positives;
            }
        }
    }
    for (auto& [_, stats] : report.per_class) {
        stats.detection_rate = stats.users == 0 ? 0.0 : static_cast<double>(stats.flagged) / stats.users;
    }
    const auto cheaters = report.time_to_detection.cheaters;
    report.detection_rate =
        cheaters == 0 ? 0.0 : static_cast<double>(report.time_to_detection.detected) / static_cast<double>(cheaters);
    report.false_positive_rate = honest == 0 ? 0.0 : static_cast<double>(false_positives) / static_cast<double>(honest);
    report.time_to_detection.median = median(times);
    report.time_to_detection.p90 = percentile(times, 0.9);

    report.economics.venues = run_loss_report(events, world);
    for (const auto& v : report.economics.venues) {
        report.economics.redemptions += v.redemptions;
        report.economics.fake_assisted += v.fake_assisted;
    }
    report.economics.excess_loss = total_excess_loss(report.economics.venues);

    if (!events.empty()) {
        report.threshold_sweep = roc_sweep(events, truth_labels(world), config.detector, config.report_thresholds);
    }
    return report;
}

void parallel_for_each(std::size_t n, unsigned parallelism, const std::function<void(std::size_t)>& fn)
{
    std::vector<std::exception_ptr> errors(n);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (auto i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
            try {
                fn(i);
            }
            catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const auto n_threads = std::clamp<std::size_t>(parallelism, 1, std::max<std::size_t>(n, 1));
    if (n_threads == 1) {
        worker();
    }
    else {
        std::vector<std::jthread> pool;
        pool.reserve(n_threads);
        for (std::size_t t = 0; t < n_threads; ++t) {
            pool.emplace_back(worker);
        }
    }
    for (const auto& e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }
}

std::vector<RunReport> run_batch(const std::vector<SimConfig>& configs, unsigned parallelism)
{
    std::vector<RunReport> reports(configs.size());
    parallel_for_each(configs.size(), parallelism, [&](std::size_t i) { reports[i] = run(configs[i]).report; });
    return reports;
}

} // namespace honeytrap
