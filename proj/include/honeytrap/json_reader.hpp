#pragma once

#include "honeytrap/errors.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

namespace honeytrap {

/// Strict reader over one JSON object. Every key must be consumed before finish(),
/// otherwise the first unknown key is reported with its full path.
class ObjectReader {
public:
    using json = nlohmann::ordered_json;

    ObjectReader(const json& j, std::string path);

    [[nodiscard]] bool has(std::string_view key) const;
    [[nodiscard]] std::string path_of(std::string_view key) const;
    [[nodiscard]] const std::string& path() const { return path_; }

    /// Raw access, marks the key consumed.
    const json* take(std::string_view key);

    template <class T>
    void read(std::string_view key, T& out)
    {
        if (const json* v = take(key)) {
            if constexpr (std::is_integral_v<T> && !std::is_same_v<T, bool>) {
                if (!v->is_number_integer()) {
                    throw ConfigError(path_of(key), "expected an integer");
                }
                if constexpr (std::is_unsigned_v<T>) {
                    if (!v->is_number_unsigned() && v->template get<std::int64_t>() < 0) {
                        throw ConfigError(path_of(key), "must be >= 0");
                    }
                }
            }
            try {
                out = v->get<T>();
            }
            catch (const nlohmann::json::exception&) {
                throw ConfigError(path_of(key), "wrong type (" + std::string(v->type_name()) + ")");
            }
        }
    }

    ObjectReader child(std::string_view key);
    void finish() const;

private:
    const json& j_;
    std::string path_;
    std::set<std::string, std::less<>> consumed_;
};

/// Thresholds may be infinite; JSON has no infinity, so it is spelled "inf".
nlohmann::ordered_json threshold_to_json(double t);
double threshold_from_json(const nlohmann::ordered_json& j, const std::string& path);

} // namespace honeytrap
