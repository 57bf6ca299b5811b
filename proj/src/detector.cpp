#include "honeytrap/detector.hpp"

#include "honeytrap/errors.hpp"
#include "honeytrap/json_reader.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace honeytrap {

using json = nlohmann::ordered_json;

void DetectorConfig::validate() const
{
    auto nonneg = [](double v, const char* field) {
        if (!std::isfinite(v) || v < 0.0) {
            throw ConfigError(std::string("detector.") + field, "must be finite and >= 0");
        }
    };
    auto prob = [](double v, const char* field) {
        if (!(v >= 0.0 && v <= 1.0)) {
            throw ConfigError(std::string("detector.") + field, "must lie in [0, 1]");
        }
    };
    nonneg(w_q, "w_q");
    nonneg(w_r, "w_r");
    if (!(threshold > 0.0)) {
        throw ConfigError("detector.threshold", "must be positive");
    }
    prob(challenge_honest_error, "challenge_honest_error");
    prob(stale_leak_prob, "stale_leak_prob");
    if (fail_policy.kind == ChallengeFailPolicy::Kind::SuspicionIncrement &&
        (!std::isfinite(fail_policy.amount) || fail_policy.amount < 0.0)) {
        throw ConfigError("detector.challenge_fail_policy.amount", "must be finite and >= 0");
    }
}

double suspiciousness(std::uint64_t q, std::uint64_t r, const DetectorConfig& config)
{
    if (r > q) {
        throw std::invalid_argument("suspiciousness: distinct honeypots exceed honeypot check-ins");
    }
    return suspicion_level(static_cast<double>(q), static_cast<double>(r), config);
}

SuspicionRecord observe_checkin(SuspicionRecord record, const CheckInEvent& event, const DetectorConfig& config)
{
    bool force_flag = false;
    if (event.hit_honeypot) {
        ++record.hv_checkins;
        if (record.honeypots_seen.insert(event.venue).second) {
            ++record.distinct_hvs;
        }
    }
    if (event.challenge_result == ChallengeResult::Failed) {
        ++record.failed_challenges;
        switch (config.fail_policy.kind) {
        case ChallengeFailPolicy::Kind::CountAsHvHit:
            ++record.hv_checkins;
            break;
        case ChallengeFailPolicy::Kind::SuspicionIncrement:
            record.challenge_penalty += config.fail_policy.amount;
            break;
        case ChallengeFailPolicy::Kind::FlagImmediately:
            force_flag = true;
            break;
        }
    }
    record.level = suspiciousness(record.hv_checkins, record.distinct_hvs, config) + record.challenge_penalty;
    if (!record.flagged && (force_flag || record.level > config.threshold)) {
        record.flagged = true;
        record.flagged_round = event.round;
    }
    return record;
}

std::map<UserId, SuspicionRecord> replay(std::span<const CheckInEvent> events, const DetectorConfig& config)
{
    std::map<UserId, SuspicionRecord> records;
    for (const auto& e : events) {
        auto [it, inserted] = records.try_emplace(e.user);
        if (inserted) {
            it->second.user = e.user;
        }
        it->second = observe_checkin(std::move(it->second), e, config);
    }
    return records;
}

bool ChallengeMemory::knows(UserId user, VenueId venue, std::uint64_t epoch, std::uint32_t question) const
{
    auto it = entries_.find({user.value, venue.value});
    return it != entries_.end() && it->second.epoch == epoch && it->second.questions.contains(question);
}

void ChallengeMemory::learn(UserId user, VenueId venue, std::uint64_t epoch, std::uint32_t question)
{
    auto& entry = entries_[{user.value, venue.value}];
    if (entry.epoch != epoch) {
        entry.epoch = epoch;
        entry.questions.clear();
    }
    entry.questions.insert(question);
}

std::uint64_t challenge_epoch(const ChallengeSpec& spec, Round round)
{
    return spec.rotation_period == 0 ? 0 : round / spec.rotation_period;
}

ChallengeOutcome issue_challenge(const Venue& venue, UserId user, Round round, bool is_fake, ChallengeMemory& memory,
                                 const DetectorConfig& config, Rng& rng)
{
    if (!venue.deal || !venue.challenge) {
        throw std::invalid_argument("issue_challenge: venue has no deal or no challenge");
    }
    const auto& spec = *venue.challenge;
    ChallengeOutcome out;
    out.issued = true;
    out.venue = venue.id;
    out.round = round;
    out.question = static_cast<std::uint32_t>(rng.below(spec.pool_size));
    const auto epoch = challenge_epoch(spec, round);
    const double u = rng.uniform();
    if (!is_fake) {
        out.passed = u >= config.challenge_honest_error;
    }
    else {
        out.stale = !spec.owner_maintains || memory.knows(user, venue.id, epoch, out.question);
        const double pass_prob = out.stale ? config.stale_leak_prob : 1.0 / static_cast<double>(spec.menu_size);
        out.passed = u < pass_prob;
    }
    if (out.passed) {
        memory.learn(user, venue.id, epoch, out.question);
    }
    return out;
}

TruthLabels truth_labels(const WorldState& world)
{
    TruthLabels labels;
    for (const auto& u : world.users) {
        labels.emplace(u.id, u.cls);
    }
    return labels;
}

std::optional<double> median(std::vector<double> values)
{
    if (values.empty()) {
        return std::nullopt;
    }
    std::sort(values.begin(), values.end());
    const auto n = values.size();
    if (n % 2 == 1) {
        return values[n / 2];
    }
    return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

std::optional<double> percentile(std::vector<double> values, double q)
{
    if (values.empty()) {
        return std::nullopt;
    }
    if (!(q > 0.0 && q <= 1.0)) {
        throw std::invalid_argument("percentile: q must lie in (0, 1]");
    }
    std::sort(values.begin(), values.end());
    auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(values.size())));
    rank = std::clamp<std::size_t>(rank, 1, values.size());
    return values[rank - 1];
}

std::vector<SweepRow> sweep_threshold(std::span<const CheckInEvent> events, const TruthLabels& truth,
                                      const DetectorConfig& config, std::span<const double> thresholds)
{
    if (events.empty()) {
        throw std::invalid_argument("sweep_threshold: empty event log");
    }
    std::vector<SweepRow> rows;
    rows.reserve(thresholds.size());
    for (double threshold : thresholds) {
        DetectorConfig cfg = config;
        cfg.threshold = threshold;
        const auto records = replay(events, cfg);
        SweepRow row;
        row.threshold = threshold;
        std::vector<double> times;
        for (const auto& [user, cls] : truth) {
            auto it = records.find(user);
            const bool flagged = it != records.end() && it->second.flagged;
            if (is_cheater(cls)) {
                ++row.cheaters;
                if (flagged) {
                    ++row.detected;
                    times.push_back(static_cast<double>(*it->second.flagged_round));
                }
            }
            else {
                ++row.honest;
                if (flagged) {
                    ++row.false_positives;
                }
            }
        }
        row.detection_rate = row.cheaters == 0 ? 0.0 : static_cast<double>(row.detected) / row.cheaters;
        row.false_positive_rate = row.honest == 0 ? 0.0 : static_cast<double>(row.false_positives) / row.honest;
        row.median_time_to_detection = median(std::move(times));
        rows.push_back(row);
    }
    return rows;
}

json to_json(const DetectorConfig& c)
{
    json policy;
    switch (c.fail_policy.kind) {
    case ChallengeFailPolicy::Kind::CountAsHvHit:
        policy = json{{"kind", "count_as_hv_hit"}, {"amount", c.fail_policy.amount}};
        break;
    case ChallengeFailPolicy::Kind::SuspicionIncrement:
        policy = json{{"kind", "suspicion_increment"}, {"amount", c.fail_policy.amount}};
        break;
    case ChallengeFailPolicy::Kind::FlagImmediately:
        policy = json{{"kind", "flag_immediately"}, {"amount", c.fail_policy.amount}};
        break;
    }
    return json{{"w_q", c.w_q},
                {"w_r", c.w_r},
                {"threshold", c.threshold},
                {"challenge_honest_error", c.challenge_honest_error},
                {"stale_leak_prob", c.stale_leak_prob},
                {"challenge_fail_policy", policy}};
}

DetectorConfig detector_config_from_json(const json& j, const std::string& path)
{
    ObjectReader r(j, path);
    DetectorConfig c;
    r.read("w_q", c.w_q);
    r.read("w_r", c.w_r);
    r.read("threshold", c.threshold);
    r.read("challenge_honest_error", c.challenge_honest_error);
    r.read("stale_leak_prob", c.stale_leak_prob);
    bool amount_given = false;
    if (r.has("challenge_fail_policy")) {
        auto pr = r.child("challenge_fail_policy");
        std::string kind = "suspicion_increment";
        pr.read("kind", kind);
        amount_given = pr.has("amount");
        pr.read("amount", c.fail_policy.amount);
        if (kind == "count_as_hv_hit") {
            c.fail_policy.kind = ChallengeFailPolicy::Kind::CountAsHvHit;
        }
        else if (kind == "suspicion_increment") {
            c.fail_policy.kind = ChallengeFailPolicy::Kind::SuspicionIncrement;
        }
        else if (kind == "flag_immediately") {
            c.fail_policy.kind = ChallengeFailPolicy::Kind::FlagImmediately;
        }
        else {
            throw ConfigError(pr.path_of("kind"), "expected count_as_hv_hit, suspicion_increment or flag_immediately");
        }
        pr.finish();
    }
    r.finish();
    if (!amount_given) {
        // A failed challenge weighs like one honeypot check-in unless stated otherwise.
        c.fail_policy.amount = c.w_q;
    }
    c.validate();
    return c;
}

std::string suspicion_records_csv(const std::map<UserId, SuspicionRecord>& records, const TruthLabels& truth)
{
    std::ostringstream out;
    out.precision(17);
    out << "user,class_truth,q,r,l,flagged,flagged_round\n";
    for (const auto& [user, cls] : truth) {
        SuspicionRecord rec;
        rec.user = user;
        if (auto it = records.find(user); it != records.end()) {
            rec = it->second;
        }
        out << user.value << ',' << to_string(cls) << ',' << rec.hv_checkins << ',' << rec.distinct_hvs << ','
            << rec.level << ',' << (rec.flagged ? "true" : "false") << ',';
        if (rec.flagged_round) {
            out << *rec.flagged_round;
        }
        out << '\n';
    }
    return out.str();
}

} // namespace honeytrap
