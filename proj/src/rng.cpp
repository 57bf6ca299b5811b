#include "honeytrap/rng.hpp"

#include <boost/random/gamma_distribution.hpp>
#include <boost/random/poisson_distribution.hpp>

#include <stdexcept>
#include <unordered_map>

namespace honeytrap {

namespace {
constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
constexpr std::uint64_t kDeriveSalt = 0xD1B54A32D192ED03ULL;
} // namespace

std::uint64_t splitmix64_mix(std::uint64_t z) noexcept
{
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

Rng::Rng(std::uint64_t seed) noexcept : key_(seed), counter_(0) {}

Rng::result_type Rng::operator()() noexcept
{
    ++counter_;
    return splitmix64_mix(key_ + counter_ * kGolden);
}

Rng Rng::derive(std::uint64_t tag, std::uint64_t index) const noexcept
{
    const std::uint64_t a = splitmix64_mix(tag * kDeriveSalt + 1);
    const std::uint64_t b = splitmix64_mix(index + a);
    return Rng(splitmix64_mix(key_ ^ b) ^ a, 0);
}

double Rng::uniform() noexcept
{
    return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
}

std::uint64_t Rng::below(std::uint64_t n) noexcept
{
    // Lemire's multiply-shift with rejection.
    std::uint64_t x = (*this)();
    __uint128_t m = static_cast<__uint128_t>(x) * n;
    auto low = static_cast<std::uint64_t>(m);
    if (low < n) {
        const std::uint64_t threshold = (0 - n) % n;
        while (low < threshold) {
            x = (*this)();
            m = static_cast<__uint128_t>(x) * n;
            low = static_cast<std::uint64_t>(m);
        }
    }
    return static_cast<std::uint64_t>(m >> 64);
}

bool Rng::bernoulli(double p) noexcept
{
    return uniform() < p;
}

std::uint64_t Rng::poisson(double mean)
{
    if (mean <= 0.0) {
        return 0;
    }
    boost::random::poisson_distribution<std::uint64_t, double> dist(mean);
    return dist(*this);
}

double Rng::gamma(double shape)
{
    boost::random::gamma_distribution<double> dist(shape, 1.0);
    return dist(*this);
}

std::size_t sample_weighted(std::span<const double> weights, Rng& rng)
{
    if (weights.empty()) {
        throw std::invalid_argument("sample_weighted: empty weight vector");
    }
    double total = 0.0;
    for (double w : weights) {
        total += w;
    }
    const double u = rng.uniform();
    if (!(total > 0.0)) {
        return static_cast<std::size_t>(u * static_cast<double>(weights.size()));
    }
    const double target = u * total;
    double acc = 0.0;
    std::size_t last_positive = 0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        if (weights[i] <= 0.0) {
            continue;
        }
        acc += weights[i];
        last_positive = i;
        if (target < acc) {
            return i;
        }
    }
    return last_positive;
}

std::vector<std::uint32_t> sample_without_replacement(std::uint32_t n, std::uint32_t k, Rng& rng)
{
    if (k > n) {
        throw std::invalid_argument("sample_without_replacement: k exceeds population");
    }
    // Sparse Fisher-Yates: only displaced slots are materialised.
    std::unordered_map<std::uint32_t, std::uint32_t> moved;
    auto at = [&](std::uint32_t i) {
        auto it = moved.find(i);
        return it == moved.end() ? i : it->second;
    };
    std::vector<std::uint32_t> out;
    out.reserve(k);
    for (std::uint32_t i = 0; i < k; ++i) {
        const auto j = i + static_cast<std::uint32_t>(rng.below(n - i));
        const std::uint32_t vi = at(i);
        const std::uint32_t vj = at(j);
        out.push_back(vj);
        moved[j] = vi;
    }
    return out;
}

std::vector<double> sample_dirichlet(std::size_t k, double concentration, Rng& rng)
{
    std::vector<double> out(k);
    double total = 0.0;
    for (auto& x : out) {
        x = rng.gamma(concentration);
        total += x;
    }
    if (!(total > 0.0)) {
        for (auto& x : out) {
            x = 1.0 / static_cast<double>(k);
        }
        return out;
    }
    for (auto& x : out) {
        x /= total;
    }
    return out;
}

} // namespace honeytrap
