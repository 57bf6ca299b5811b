#include "honeytrap/money.hpp"

#include <cstdlib>

namespace honeytrap {

namespace {

__extension__ using Wide = __int128;

// Rounds |num/den| * 10^decimals half away from zero and returns the integer.
std::int64_t scaled_round(std::int64_t num, std::int64_t den, int decimals)
{
    Wide scale = 1;
    for (int i = 0; i < decimals; ++i) {
        scale *= 10;
    }
    const Wide n = static_cast<Wide>(num < 0 ? -num : num) * scale;
    const Wide d = den;
    return static_cast<std::int64_t>((2 * n + d) / (2 * d));
}

std::string with_point(std::int64_t magnitude, int decimals, bool negative)
{
    std::string digits = std::to_string(magnitude);
    if (decimals > 0) {
        if (static_cast<int>(digits.size()) <= decimals) {
            digits.insert(0, static_cast<std::size_t>(decimals + 1 - static_cast<int>(digits.size())), '0');
        }
        digits.insert(digits.size() - static_cast<std::size_t>(decimals), ".");
    }
    if (negative && magnitude != 0) {
        digits.insert(0, "-");
    }
    return digits;
}

} // namespace

std::string format_minor_units(const ExactMoney& value, int decimals)
{
    const auto mag = scaled_round(value.numerator(), value.denominator(), decimals);
    return with_point(mag, decimals, value.numerator() < 0);
}

std::string format_dollars(const ExactMoney& value)
{
    const auto cents = scaled_round(value.numerator(), value.denominator(), 0);
    auto text = with_point(cents, 2, value.numerator() < 0);
    return text.front() == '-' ? "-$" + text.substr(1) : "$" + text;
}

} // namespace honeytrap
