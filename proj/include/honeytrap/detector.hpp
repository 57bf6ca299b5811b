#pragma once

#include "honeytrap/rng.hpp"
#include "honeytrap/world.hpp"

#include <nlohmann/json.hpp>

#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace honeytrap {

struct ChallengeFailPolicy {
    enum class Kind { CountAsHvHit, SuspicionIncrement, FlagImmediately };
    Kind kind = Kind::SuspicionIncrement;
    /// Added to the level on a failed challenge (SuspicionIncrement only).
    double amount = 1.0;

    bool operator==(const ChallengeFailPolicy&) const = default;
};

struct DetectorConfig {
    double w_q = 1.0;
    double w_r = 2.0;
    double threshold = 4.0;
    /// Probability that a physically present user answers a challenge wrongly.
    double challenge_honest_error = 0.02;
    /// Pass probability of a fake check-in facing a stale challenge.
    double stale_leak_prob = 0.9;
    ChallengeFailPolicy fail_policy{};

    /// Throws std::invalid_argument.
    void validate() const;

    bool operator==(const DetectorConfig&) const = default;
};

/// Level h(q, r) = w_q * q + w_r * r, evaluated over reals.
inline double suspicion_level(double q, double r, const DetectorConfig& config)
{
    return config.w_q * q + config.w_r * r;
}

/// h over counts. Throws std::invalid_argument when r > q.
double suspiciousness(std::uint64_t q, std::uint64_t r, const DetectorConfig& config);

/// Running suspicion state of one user.
struct SuspicionRecord {
    UserId user;
    std::uint64_t hv_checkins = 0;  // q(u)
    std::uint64_t distinct_hvs = 0; // r(u)
    /// Accumulated SuspicionIncrement amounts from failed challenges.
    double challenge_penalty = 0.0;
    std::uint64_t failed_challenges = 0;
    double level = 0.0; // l(u) = h(q, r) + challenge_penalty
    bool flagged = false;
    std::optional<Round> flagged_round;
    std::set<VenueId> honeypots_seen;

    bool operator==(const SuspicionRecord&) const = default;
};

/// Applies one event to a record and evaluates the flagging rule level > threshold.
SuspicionRecord observe_checkin(SuspicionRecord record, const CheckInEvent& event, const DetectorConfig& config);

/// Replays a log into one record per user seen in it.
std::map<UserId, SuspicionRecord> replay(std::span<const CheckInEvent> events, const DetectorConfig& config);

struct ChallengeOutcome {
    bool issued = false;
    bool passed = false;
    VenueId venue;
    Round round = 0;
    std::uint32_t question = 0;
    bool stale = false;
};

/// What each user has learned about challenge answers: (user, venue) -> questions
/// answered correctly during the current rotation epoch.
class ChallengeMemory {
public:
    [[nodiscard]] bool knows(UserId user, VenueId venue, std::uint64_t epoch, std::uint32_t question) const;
    void learn(UserId user, VenueId venue, std::uint64_t epoch, std::uint32_t question);

private:
    struct Entry {
        std::uint64_t epoch = 0;
        std::set<std::uint32_t> questions;
    };
    std::map<std::pair<std::uint32_t, std::uint32_t>, Entry> entries_;
};

/// Rotation epoch of a maintained challenge at a given round.
std::uint64_t challenge_epoch(const ChallengeSpec& spec, Round round);

/// Asks a challenge drawn from the venue's pool. A present user passes with probability
/// 1 - challenge_honest_error; a fake passes with 1/menu_size, or stale_leak_prob when the
/// owner does not maintain the challenge or the user already passed this question during
/// the current epoch. Throws std::invalid_argument when the venue has no deal or challenge.
ChallengeOutcome issue_challenge(const Venue& venue, UserId user, Round round, bool is_fake, ChallengeMemory& memory,
                                 const DetectorConfig& config, Rng& rng);

/// Ground truth: user -> class.
using TruthLabels = std::map<UserId, UserClass>;

TruthLabels truth_labels(const WorldState& world);

struct SweepRow {
    double threshold = 0.0;
    double detection_rate = 0.0;
    double false_positive_rate = 0.0;
    std::optional<double> median_time_to_detection;
    std::uint64_t detected = 0;
    std::uint64_t cheaters = 0;
    std::uint64_t false_positives = 0;
    std::uint64_t honest = 0;
};

/// Replays the log once per threshold (no re-simulation). Throws on an empty log.
std::vector<SweepRow> sweep_threshold(std::span<const CheckInEvent> events, const TruthLabels& truth,
                                      const DetectorConfig& config, std::span<const double> thresholds);

/// Median of a sample (mean of the two middle values for even sizes); nullopt when empty.
std::optional<double> median(std::vector<double> values);
/// Nearest-rank percentile, q in (0, 1].
std::optional<double> percentile(std::vector<double> values, double q);

nlohmann::ordered_json to_json(const DetectorConfig& c);
DetectorConfig detector_config_from_json(const nlohmann::ordered_json& j, const std::string& path = "detector");

/// CSV header: user,class_truth,q,r,l,flagged,flagged_round
std::string suspicion_records_csv(const std::map<UserId, SuspicionRecord>& records, const TruthLabels& truth);

} // namespace honeytrap
