#pragma once

#include "honeytrap/behavior.hpp"
#include "honeytrap/detector.hpp"
#include "honeytrap/honeypots.hpp"
#include "honeytrap/world.hpp"

#include <nlohmann/json.hpp>

#include <map>
#include <span>
#include <string>
#include <vector>

namespace honeytrap {

/// A redesign of one honeypot, effective from a round onward.
struct HoneypotRevision {
    Round effective_round = 0;
    VenueId venue;
    VenueFeatures features;
    std::optional<Deal> deal;

    bool operator==(const HoneypotRevision&) const = default;
};

nlohmann::ordered_json to_json(const HoneypotRevision& r);
HoneypotRevision honeypot_revision_from_json(const nlohmann::ordered_json& j);

/// Venue features as they were at a given round, given the redesign history.
class FeatureTimeline {
public:
    FeatureTimeline(const WorldState& world, std::span<const HoneypotRevision> revisions);
    [[nodiscard]] const VenueFeatures& at(VenueId venue, Round round) const;
    /// Stable row index of the features returned by at().
    [[nodiscard]] std::uint32_t row(VenueId venue, Round round) const;
    [[nodiscard]] const std::vector<VenueFeatures>& rows() const { return rows_; }

private:
    struct Version {
        Round from = 0;
        std::uint32_t row = 0;
    };
    std::vector<VenueFeatures> rows_;
    std::vector<std::vector<Version>> versions_;
};

/// One choice made by a flagged user, with every candidate that was on offer.
struct Observation {
    std::vector<std::uint32_t> candidate_rows; // indices into CalibrationDataset::features
    std::vector<bool> first_visit;
    std::uint32_t chosen = 0;
    /// Positional attention of each candidate; empty means equal attention.
    std::vector<double> attention;

    bool operator==(const Observation&) const = default;
};

struct CalibrationDataset {
    std::vector<VenueFeatures> features;
    std::vector<Observation> observations;
    std::vector<std::string> venue_types;
    std::uint32_t deal_type_count = 0;
};

/// Feature columns a fit can use: "points", "mayor", "deal_count", "type:<category>",
/// "deal_type:<index>".
double feature_value(const VenueFeatures& features, bool first_visit, const std::string& name);
void validate_feature_name(const std::string& name, std::uint32_t deal_type_count);

struct FitResult {
    BehaviorWeights weights; // sums to 1
    double log_likelihood = 0.0;
    double grid_step = 0.01;
    std::uint64_t n_observations = 0;
    std::vector<std::string> features;

    bool operator==(const FitResult&) const = default;
};

nlohmann::ordered_json to_json(const FitResult& f);
FitResult fit_result_from_json(const nlohmann::ordered_json& j);

/// Check-ins by flagged users, each with the features of the full candidate list.
/// Events before since_round are skipped. When list_bias is given, choices from presented
/// lists carry its positional attention. Throws EmptyDataset when nobody is flagged.
CalibrationDataset collect_flagged_histories(std::span<const CheckInEvent> events,
                                             const std::map<UserId, SuspicionRecord>& records,
                                             const WorldState& world, std::span<const HoneypotRevision> revisions,
                                             Round since_round = 0, const PositionBias* list_bias = nullptr);

/// Sum over observations of log p_chosen under the linear choice model, with
/// p_k proportional to attention_k * a_k.
double log_likelihood(const CalibrationDataset& data, const std::vector<std::string>& features,
                      std::span<const double> weights);

/// Exhaustive search over the simplex grid with spacing grid_step (1/grid_step must be
/// an integer). Ties go to the lexicographically smallest weight vector.
/// Throws NonIdentifiable when the likelihood is flat, EmptyDataset when there is no data.
FitResult fit_weights(const CalibrationDataset& data, double grid_step,
                      const std::vector<std::string>& features = {"points", "mayor"});

/// blend * fit + (1 - blend) * current, renormalized to sum 1.
BehaviorWeights refine_loop(const BehaviorWeights& current, const FitResult& fit, double blend);

struct FeatureGain {
    std::string feature;
    double base_log_likelihood = 0.0;
    double extended_log_likelihood = 0.0;
    double gain = 0.0;
    bool recommended = false;
};

/// Likelihood-ratio statistic 2 * gain must exceed this to recommend a feature
/// (chi-square, 1 degree of freedom, 5%).
inline constexpr double kDefaultInclusionThreshold = 3.841458820694124;

/// Refits with each candidate feature freed in turn and reports the likelihood gain.
std::vector<FeatureGain> extend_feature_set(const CalibrationDataset& data, const std::vector<std::string>& candidates,
                                            const std::vector<std::string>& base_features = {"points", "mayor"},
                                            double grid_step = 0.01,
                                            double threshold = kDefaultInclusionThreshold);

} // namespace honeytrap
