#pragma once

#include "honeytrap/detector.hpp"
#include "honeytrap/rng.hpp"
#include "honeytrap/world.hpp"

#include <nlohmann/json.hpp>

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace honeytrap {

struct PositionBias;

/// Weights of the linear attractiveness model. Only the direction of the vector
/// matters to the choice probabilities; normalized() gives the canonical form.
struct BehaviorWeights {
    double w_points = 0.0;
    double w_mayor = 0.0;
    std::map<std::string, double> w_type;
    double w_deal_count = 0.0;
    std::vector<double> w_deal_types;

    [[nodiscard]] double total() const;
    /// Throws std::invalid_argument on a negative or non-finite weight, or when all are zero.
    void validate() const;
    [[nodiscard]] BehaviorWeights normalized() const;
    [[nodiscard]] BehaviorWeights scaled(double c) const;
    [[nodiscard]] double type_weight(const std::string& venue_type) const;

    bool operator==(const BehaviorWeights&) const = default;

    /// w_points = w_mayor = 0.5, no extensions.
    static BehaviorWeights two_feature(double alpha = 0.5, double beta = 0.5);
};

nlohmann::ordered_json to_json(const BehaviorWeights& w);
/// Strict: unknown keys are rejected. Error messages are prefixed with path.
BehaviorWeights behavior_weights_from_json(const nlohmann::ordered_json& j, const std::string& path = "weights");

struct ChoiceDistribution {
    std::vector<double> probs;
    double honeypot_mass = 0.0;
};

struct Candidate {
    const Venue* venue = nullptr;
    bool first_visit = true;
};

double attractiveness(const VenueFeatures& features, bool first_visit, const BehaviorWeights& weights);

/// p_i = a_i / sum_j a_j; uniform when every a_i is zero.
ChoiceDistribution choice_distribution(std::span<const Candidate> candidates, const BehaviorWeights& weights);

/// Same rule over precomputed attractiveness values.
ChoiceDistribution choice_from_attractiveness(std::span<const double> attractiveness,
                                              std::span<const std::uint8_t> is_honeypot);

/// Honeypot mass of a feature-blind chooser over lambda honeypots and phi real venues.
double uniform_honeypot_mass(std::uint64_t lambda, std::uint64_t phi);

enum class CandidateScope { Presented, World };

/// Choice parameters per user class.
struct ClassModels {
    BehaviorWeights gamer = BehaviorWeights::two_feature();
    BehaviorWeights monetary;
    double hv_accident_prob = 0.001;

    static BehaviorWeights default_monetary(std::uint32_t deal_type_count);
};

/// Draws from choice weights reweighted by positional attention.
std::size_t sample_biased(std::span<const double> choice_weights, const PositionBias& bias, Rng& rng);

/// Picks a venue from an ordered list according to the user's class model.
VenueId pick_venue(const User& user, std::span<const Venue* const> presented, const ClassModels& models,
                   const PositionBias& bias, Rng& rng);

/// Honest choice: an accidental honeypot check-in with probability hv_accident_prob,
/// otherwise a real venue drawn by the user's preference profile.
VenueId honest_pick(const User& user, std::span<const Venue* const> presented, double hv_accident_prob, Rng& rng);

/// Candidates a monetary cheater considers: visited venues and venues with deals.
std::vector<std::size_t> monetary_candidates(const User& user, std::span<const Venue* const> presented);

/// Largest number of fakes whose expected suspiciousness stays within safety_margin * L.
/// std::nullopt means no containment (p_c == 0 or h ignores hits).
std::optional<std::uint64_t> adaptive_budget(const DetectorConfig& detector, double honeypot_mass,
                                             double safety_margin, std::uint64_t lambda);

} // namespace honeytrap
