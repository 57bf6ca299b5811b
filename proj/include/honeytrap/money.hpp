#pragma once

#include <boost/rational.hpp>

#include <compare>
#include <cstdint>
#include <string>

namespace honeytrap {

/// Amount of money in integer minor units (cents).
struct Money {
    std::int64_t cents = 0;

    friend constexpr auto operator<=>(Money, Money) = default;
    friend constexpr Money operator+(Money a, Money b) { return {a.cents + b.cents}; }
    friend constexpr Money operator-(Money a, Money b) { return {a.cents - b.cents}; }
    friend constexpr Money operator*(Money a, std::int64_t k) { return {a.cents * k}; }
    constexpr Money& operator+=(Money o)
    {
        cents += o.cents;
        return *this;
    }
};

constexpr Money dollars(std::int64_t d) { return {d * 100}; }

/// Exact rational amount in minor units. Division stays exact; rounding happens
/// only when formatting.
using ExactMoney = boost::rational<std::int64_t>;

inline ExactMoney exact(Money m) { return ExactMoney(m.cents); }

/// Decimal rendering of an exact amount in minor units, rounded half away from zero.
std::string format_minor_units(const ExactMoney& value, int decimals = 2);

/// "$d.cc" rendering of an exact amount, rounded to whole cents.
std::string format_dollars(const ExactMoney& value);

} // namespace honeytrap
