#include "honeytrap/behavior.hpp"
#include "honeytrap/cli.hpp"
#include "honeytrap/detector.hpp"
#include "honeytrap/economics.hpp"
#include "honeytrap/errors.hpp"
#include "honeytrap/io.hpp"
#include "honeytrap/learner.hpp"
#include "honeytrap/metrics.hpp"
#include "honeytrap/sim.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <thread>

using namespace honeytrap;
namespace fs = std::filesystem;

namespace {

struct Verdict {
    bool pass = false;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start)
{
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(double v, int precision = 4)
{
    std::ostringstream out;
    out.precision(precision);
    out << v;
    return out.str();
}

Venue venue(std::uint32_t id, std::uint32_t n, double m, bool honeypot = false)
{
    Venue v;
    v.id = VenueId{id};
    v.features.points_new = n;
    v.features.points_repeat = 1;
    v.features.mayorship_prob = m;
    v.features.venue_type = "cafe";
    v.is_honeypot = honeypot;
    return v;
}

// 1. Uniform cheaters over the whole (3, 7) world hit honeypots at 3 / 10.
Verdict honeypot_mass_uniform()
{
    const auto start = Clock::now();
    SimConfig c;
    c.seed = 1;
    c.lambda = 3;
    c.phi = 7;
    c.rounds = 1100;
    c.checkin_rate = 1.0;
    c.users = UserCounts{0, 0, 100, 0, 0};
    c.behavior.candidate_scope = CandidateScope::World;
    c.presentation.list_length = 5;
    c.presentation.hv_count = 1;
    c.honest.locality_size = 5;
    c.learner.enabled = false;
    const auto r = run(c);
    const std::size_t n = 100000;
    if (r.events.size() < n) {
        return {false, "only " + std::to_string(r.events.size()) + " check-ins"};
    }
    std::size_t hits = 0;
    for (std::size_t i = 0; i < n; ++i) {
        hits += r.events[i].hit_honeypot ? 1 : 0;
    }
    const double freq = static_cast<double>(hits) / n;
    const double elapsed = seconds_since(start);
    return {std::abs(freq - 0.3) <= 0.01 && elapsed < 5.0,
            "frequency " + fmt(freq) + " (target 0.30 +/- 0.01), " + fmt(elapsed, 3) + " s (limit 5 s)"};
}

// 2. The two-venue example: closed form and Monte Carlo.
Verdict two_venue_example()
{
    const auto a = venue(0, 3, 0.5);
    const auto b = venue(1, 1, 0.5);
    const std::vector<Candidate> cands{{&a, true}, {&b, true}};
    const auto d = choice_distribution(cands, BehaviorWeights::two_feature());
    const double err = std::max(std::abs(d.probs[0] - 1.75 / 2.5), std::abs(d.probs[1] - 0.75 / 2.5));

    User gamer;
    gamer.cls = UserClass::GamerCheater;
    const std::vector<const Venue*> list{&a, &b};
    const auto bias = PositionBias::uniform(2);
    Rng rng(2);
    const int n = 100000;
    int first = 0;
    for (int i = 0; i < n; ++i) {
        first += pick_venue(gamer, list, ClassModels{}, bias, rng).value == 0 ? 1 : 0;
    }
    const double fa = first / static_cast<double>(n);
    const double fb = 1.0 - fa;
    const bool ok = err <= 1e-12 && std::abs(fa - 0.7) <= 0.01 && std::abs(fb - 0.3) <= 0.01;
    return {ok, "closed-form error " + fmt(err, 3) + " (limit 1e-12), empirical " + fmt(fa) + "/" + fmt(fb) +
                    " (target 0.70/0.30 +/- 0.01)"};
}

// 3. Multiplying every weight by c leaves the probabilities unchanged.
Verdict scale_invariance()
{
    Rng rng(3);
    double worst = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        std::vector<Venue> venues;
        const auto k = 1 + rng.below(15);
        for (std::uint32_t i = 0; i < k; ++i) {
            auto v = venue(i, static_cast<std::uint32_t>(rng.below(4)), rng.uniform(), rng.bernoulli(0.2));
            v.features.venue_type = rng.bernoulli(0.5) ? "cafe" : "bar";
            v.features.deal_types = {0, 0};
            if (rng.bernoulli(0.3)) {
                v.features.deal_count = 1;
                v.features.deal_types[rng.below(2)] = 1;
            }
            venues.push_back(v);
        }
        std::vector<Candidate> cands;
        for (const auto& v : venues) {
            cands.push_back({&v, rng.bernoulli(0.5)});
        }
        BehaviorWeights w;
        w.w_points = rng.uniform();
        w.w_mayor = rng.uniform();
        w.w_type["bar"] = rng.uniform();
        w.w_deal_count = rng.uniform();
        w.w_deal_types = {rng.uniform(), rng.uniform()};
        const double c = std::exp(20.0 * rng.uniform() - 10.0);
        const auto base = choice_distribution(cands, w);
        const auto scaled = choice_distribution(cands, w.scaled(c));
        for (std::size_t i = 0; i < cands.size(); ++i) {
            worst = std::max(worst, std::abs(base.probs[i] - scaled.probs[i]));
        }
    }
    return {worst <= 1e-12, "max elementwise difference " + fmt(worst, 3) + " over 1000 instances (limit 1e-12)"};
}

// 4. The flagging rule against brute force, and threshold set containment.
Verdict decision_rule()
{
    int mismatches = 0;
    int cases = 0;
    for (std::uint32_t q = 0; q <= 10; ++q) {
        for (std::uint32_t r = 0; r <= q; ++r) {
            if (q > 0 && r == 0) {
                continue;
            }
            for (int l = 1; l <= 10; ++l) {
                DetectorConfig c;
                c.threshold = l;
                // r distinct honeypots first, then repeats of the first one.
                SuspicionRecord rec;
                bool expect_flag = false;
                for (std::uint32_t i = 0; i < q; ++i) {
                    CheckInEvent e;
                    e.round = i;
                    e.hit_honeypot = true;
                    e.venue = VenueId{100 + (i < r ? i : 0)};
                    rec = observe_checkin(rec, e, c);
                    const std::uint32_t qi = i + 1;
                    const std::uint32_t ri = std::min(qi, r);
                    expect_flag = expect_flag || (1.0 * qi + 2.0 * ri > l);
                }
                ++cases;
                const double h = 1.0 * q + 2.0 * r;
                if (rec.flagged != expect_flag || rec.level != h || rec.flagged != (h > l)) {
                    ++mismatches;
                }
            }
        }
    }

    Rng rng(4);
    int violations = 0;
    for (int log_index = 0; log_index < 100; ++log_index) {
        std::vector<CheckInEvent> events;
        for (int i = 0; i < 300; ++i) {
            CheckInEvent e;
            e.round = static_cast<Round>(i / 10);
            e.user = UserId{static_cast<std::uint32_t>(rng.below(15))};
            e.hit_honeypot = rng.bernoulli(0.15);
            e.venue = VenueId{static_cast<std::uint32_t>(e.hit_honeypot ? 1000 + rng.below(6) : rng.below(1000))};
            if (!e.hit_honeypot && rng.bernoulli(0.05)) {
                e.challenge_result = ChallengeResult::Failed;
            }
            events.push_back(e);
        }
        DetectorConfig c;
        const double l1 = 12.0 * rng.uniform();
        const double l2 = l1 + 12.0 * rng.uniform() + 1e-9;
        c.threshold = l1;
        const auto low = replay(events, c);
        c.threshold = l2;
        for (const auto& [user, rec] : replay(events, c)) {
            if (rec.flagged && !low.at(user).flagged) {
                ++violations;
            }
        }
    }
    return {mismatches == 0 && violations == 0, std::to_string(cases) + " (q, r, L) cases, " +
                                                    std::to_string(mismatches) + " mismatches; " +
                                                    std::to_string(violations) + " containment violations on 100 logs"};
}

CalibrationDataset synthetic(const BehaviorWeights& truth, std::size_t n, std::uint64_t seed)
{
    Rng rng(seed);
    CalibrationDataset data;
    for (std::size_t o = 0; o < n; ++o) {
        Observation obs;
        std::vector<double> a;
        for (int k = 0; k < 5; ++k) {
            VenueFeatures f;
            f.points_new = static_cast<std::uint32_t>(1 + rng.below(3));
            f.mayorship_prob = rng.uniform();
            obs.candidate_rows.push_back(static_cast<std::uint32_t>(data.features.size()));
            obs.first_visit.push_back(true);
            a.push_back(attractiveness(f, true, truth));
            data.features.push_back(f);
        }
        obs.chosen = static_cast<std::uint32_t>(sample_weighted(a, rng));
        data.observations.push_back(std::move(obs));
    }
    return data;
}

// 5. Maximum-likelihood recovery of (0.3, 0.7).
Verdict learner_recovery()
{
    const auto start = Clock::now();
    const auto data = synthetic(BehaviorWeights::two_feature(0.3, 0.7), 10000, 5);
    const auto coarse = fit_weights(data, 0.01);
    const auto fine = fit_weights(data, 0.001);
    bool flat_detected = false;
    CalibrationDataset identical;
    VenueFeatures f;
    f.points_new = 3;
    f.mayorship_prob = 0.5;
    identical.features = {f};
    for (std::uint32_t i = 0; i < 100; ++i) {
        identical.observations.push_back(Observation{{0, 0, 0}, {true, true, true}, i % 3, {}});
    }
    try {
        fit_weights(identical, 0.01);
    }
    catch (const NonIdentifiable&) {
        flat_detected = true;
    }
    const double elapsed = seconds_since(start);
    const double alpha = coarse.weights.w_points;
    const bool ok = std::abs(alpha - 0.3) <= 0.05 && fine.log_likelihood >= coarse.log_likelihood && flat_detected &&
                    elapsed < 30.0;
    return {ok, "alpha " + fmt(alpha) + " (target 0.30 +/- 0.05), fine-grid log-likelihood " +
                    fmt(fine.log_likelihood, 10) + " >= " + fmt(coarse.log_likelihood, 10) +
                    ", identical candidates " + (flat_detected ? "rejected" : "accepted") + ", " + fmt(elapsed, 3) +
                    " s (limit 30 s)"};
}

// 6. Challenge pass rates.
Verdict challenge_rates()
{
    DetectorConfig c;
    Rng rng(6);
    const int n = 100000;
    bool ok = true;
    std::string detail;
    for (std::uint32_t menu : {2u, 4u, 8u}) {
        Venue v = venue(0, 3, 0.5);
        v.features.deal_count = 1;
        v.deal = Deal{3, dollars(5)};
        v.challenge = ChallengeSpec{menu, 10, 7, true};
        int passed = 0;
        for (int i = 0; i < n; ++i) {
            ChallengeMemory fresh;
            passed += issue_challenge(v, UserId{0}, 0, true, fresh, c, rng).passed ? 1 : 0;
        }
        const double rate = passed / static_cast<double>(n);
        ok = ok && std::abs(rate - 1.0 / menu) <= 0.01;
        detail += "M=" + std::to_string(menu) + " fake " + fmt(rate) + ", ";
    }
    Venue v = venue(0, 3, 0.5);
    v.features.deal_count = 1;
    v.deal = Deal{3, dollars(5)};
    v.challenge = ChallengeSpec{};
    ChallengeMemory memory;
    int passed = 0;
    for (int i = 0; i < n; ++i) {
        passed += issue_challenge(v, UserId{1}, static_cast<Round>(i), false, memory, c, rng).passed ? 1 : 0;
    }
    const double honest = passed / static_cast<double>(n);
    ok = ok && std::abs(honest - (1.0 - c.challenge_honest_error)) <= 0.005;
    return {ok, detail + "honest " + fmt(honest) + " (target 0.98 +/- 0.005)"};
}

// 7. Monetary-loss arithmetic.
Verdict monetary_losses()
{
    const DealEconomics e{dollars(5), 3, dollars(20)};
    const auto h = honest_redemption(e);
    const auto cheat = cheating_redemption(e, 2);
    const bool exact_ok = h.per_visit_gain_reduction == ExactMoney(500, 3) &&
                          h.customer_cost_per_visit == ExactMoney(5500, 3) &&
                          cheat.venue_gain_reduction_per_real_visit == ExactMoney(500) &&
                          cheat.cheater_cost == ExactMoney(1500);
    const double reduction = boost::rational_cast<double>(h.per_visit_gain_reduction) / 100.0;
    const double cost = boost::rational_cast<double>(h.customer_cost_per_visit) / 100.0;
    const bool rounded_ok = std::abs(reduction - 1.6) <= 0.07 && std::abs(cost - 18.4) <= 0.07;
    return {exact_ok && rounded_ok, "honest " + format_dollars(h.per_visit_gain_reduction) + "/visit and " +
                                        format_dollars(h.customer_cost_per_visit) + "/visit, cheating " +
                                        format_dollars(cheat.venue_gain_reduction_per_real_visit) + "/visit and " +
                                        format_dollars(cheat.cheater_cost) + " spend; exact " +
                                        (exact_ok ? "equal" : "different") + ", published figures within $0.07: " +
                                        (rounded_ok ? "yes" : "no")};
}

// 8. More honeypots detect uniform cheaters sooner.
Verdict detection_time()
{
    const auto start = Clock::now();
    auto base = [](std::uint32_t lambda, std::uint64_t seed) {
        SimConfig c;
        c.seed = seed;
        c.lambda = lambda;
        c.phi = 1000;
        c.rounds = 400;
        c.checkin_rate = 1.0;
        c.users = UserCounts{50, 0, 40, 0, 0};
        c.behavior.candidate_scope = CandidateScope::World;
        c.learner.enabled = false;
        return c;
    };
    std::vector<SimConfig> configs;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        configs.push_back(base(100, seed));
        configs.push_back(base(10, seed));
    }
    const auto reports = run_batch(configs, std::max(1u, std::thread::hardware_concurrency()));
    int wins = 0;
    for (std::size_t i = 0; i < 20; ++i) {
        const auto& many = reports[2 * i].time_to_detection.median;
        const auto& few = reports[2 * i + 1].time_to_detection.median;
        if (many && (!few || *many < *few)) {
            ++wins;
        }
    }
    const double elapsed = seconds_since(start);
    return {wins >= 18 && elapsed < 120.0, std::to_string(wins) + "/20 pairs faster at lambda=100 (need 18), " +
                                               fmt(elapsed, 3) + " s (limit 120 s)"};
}

// 9. Honest users are rarely flagged.
Verdict false_positives()
{
    SimConfig c;
    c.seed = 9;
    c.users = UserCounts{1000, 50, 0, 10, 0};
    c.honest.hv_accident_prob = 0.001;
    c.rounds = 200;
    const auto r = run(c);
    return {r.report.false_positive_rate < 0.01,
            "false-positive rate " + fmt(r.report.false_positive_rate) + " over 1000 honest users (limit 0.01)"};
}

// 10. Adaptive cheaters are contained, and rarely cross the threshold.
Verdict adaptive_containment()
{
    SimConfig c;
    c.seed = 10;
    c.users = UserCounts{200, 0, 0, 0, 1000};
    c.rounds = 200;
    c.learner.enabled = false;
    const auto with = run(c);
    auto baseline = c;
    baseline.lambda = 0;
    baseline.presentation.hv_count = 0;
    const auto without = run(baseline);
    const double ratio = containment_ratio(with.report, without.report);
    const auto& stats = with.report.per_class.at("adaptive");
    const double exceed = static_cast<double>(stats.flagged) / static_cast<double>(stats.users);
    const auto budget = with.report.adaptive_budget;
    return {ratio < 1.0 && exceed <= 0.05,
            "containment ratio " + fmt(ratio) + " (need < 1), budget " +
                (budget ? std::to_string(*budget) : std::string("none")) + " fakes, l(u) > L in " + fmt(exceed) +
                " of 1000 horizons (limit 0.05)"};
}

// 11. Byte-identical outputs, and batch isolation.
Verdict determinism()
{
    const auto dir = fs::temp_directory_path() / "honeytrap_acceptance";
    fs::remove_all(dir);
    fs::create_directories(dir);
    write_file_atomic(dir / "config.json", R"({"rounds": 60, "users": {"honest": 300, "gamer": 20, "monetary": 5}})");
    const std::string cli = HONEYTRAP_CLI;
    auto simulate = [&](const std::string& out) {
        const std::string cmd = "\"" + cli + "\" simulate --config \"" + (dir / "config.json").string() +
                                "\" --seed 7 --out \"" + (dir / out).string() + "\"";
        return std::system(cmd.c_str());
    };
    const int a = simulate("a");
    const int b = simulate("b");
    bool same = a == 0 && b == 0;
    for (const char* f : {"events.jsonl", "report.json"}) {
        same = same && read_text_file(dir / "a" / f) == read_text_file(dir / "b" / f);
    }
    fs::remove_all(dir);

    SimConfig base;
    base.rounds = 40;
    base.users = UserCounts{200, 20, 5, 5, 5};
    const auto configs = with_seeds(base, {1, 2, 3, 4});
    const auto sequential = run_batch(configs, 1);
    const auto parallel = run_batch(configs, 4);
    bool batch_same = sequential.size() == parallel.size();
    for (std::size_t i = 0; batch_same && i < sequential.size(); ++i) {
        batch_same = to_json(sequential[i]).dump() == to_json(parallel[i]).dump();
    }
    return {same && batch_same, std::string("simulate outputs ") + (same ? "identical" : "differ") +
                                    ", parallel batch " + (batch_same ? "equals" : "differs from") + " sequential"};
}

} // namespace

int main()
{
    configure_logging();
    const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
        {"uniform honeypot mass", honeypot_mass_uniform},
        {"two-venue choice example", two_venue_example},
        {"scale invariance", scale_invariance},
        {"flagging rule", decision_rule},
        {"learner recovery", learner_recovery},
        {"challenge pass rates", challenge_rates},
        {"monetary losses", monetary_losses},
        {"detection time vs honeypot count", detection_time},
        {"false-positive control", false_positives},
        {"adaptive containment", adaptive_containment},
        {"determinism", determinism},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Verdict v;
        try {
            v = criteria[i].second();
        }
        catch (const std::exception& e) {
            v = {false, std::string("threw: ") + e.what()};
        }
        failed += v.pass ? 0 : 1;
        std::cout << (v.pass ? "PASS" : "FAIL") << " criterion " << (i + 1) << " (" << criteria[i].first
                  << "): " << v.detail << std::endl;
    }
    return failed == 0 ? 0 : 1;
}
