#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <string_view>
#include <vector>

namespace honeytrap {

/// Counter-based random source.
///
/// Output i of a source with key K is splitmix64_mix(K + (i + 1) * 0x9E3779B97F4A7C15),
/// i.e. the SplitMix64 sequence seeded with K, addressed by counter. Independent
/// streams are obtained with derive(), which mixes a (tag, index) pair into a new
/// key. The algorithm identifier kAlgorithm is written into every run report so
/// other implementations can reproduce event logs.
class Rng {
public:
    using result_type = std::uint64_t;

    static constexpr std::string_view kAlgorithm = "splitmix64-ctr/v1";

    explicit Rng(std::uint64_t seed) noexcept;

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept;

    /// Independent child stream. Does not advance this source.
    [[nodiscard]] Rng derive(std::uint64_t tag, std::uint64_t index = 0) const noexcept;

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() noexcept;
    /// Uniform integer in [0, n). n must be positive.
    std::uint64_t below(std::uint64_t n) noexcept;
    bool bernoulli(double p) noexcept;
    /// Poisson variate (boost::random::poisson_distribution over this engine).
    std::uint64_t poisson(double mean);
    /// Gamma(shape, 1) variate (boost::random::gamma_distribution over this engine).
    double gamma(double shape);

    [[nodiscard]] std::uint64_t key() const noexcept { return key_; }
    [[nodiscard]] std::uint64_t counter() const noexcept { return counter_; }

private:
    Rng(std::uint64_t key, std::uint64_t counter) noexcept : key_(key), counter_(counter) {}

    std::uint64_t key_;
    std::uint64_t counter_;
};

std::uint64_t splitmix64_mix(std::uint64_t z) noexcept;

/// Stream tags used by the simulator. Changing any value changes every event log.
namespace stream {
inline constexpr std::uint64_t kWorld = 1;
inline constexpr std::uint64_t kUser = 2;
inline constexpr std::uint64_t kDesign = 3;
inline constexpr std::uint64_t kHoneypots = 4;
} // namespace stream

/// Index drawn proportionally to non-negative weights. Falls back to a uniform
/// draw when every weight is zero. weights must be non-empty.
std::size_t sample_weighted(std::span<const double> weights, Rng& rng);

/// k distinct indices from [0, n) in random order (partial Fisher-Yates).
std::vector<std::uint32_t> sample_without_replacement(std::uint32_t n, std::uint32_t k, Rng& rng);

/// Symmetric Dirichlet sample of dimension k.
std::vector<double> sample_dirichlet(std::size_t k, double concentration, Rng& rng);

} // namespace honeytrap
