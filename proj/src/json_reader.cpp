#include "honeytrap/json_reader.hpp"

#include <cmath>
#include <limits>

namespace honeytrap {

namespace {
const nlohmann::ordered_json kEmptyObject = nlohmann::ordered_json::object();
}

ObjectReader::ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path))
{
    if (!j_.is_object()) {
        throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
    }
}

bool ObjectReader::has(std::string_view key) const
{
    return j_.contains(std::string(key));
}

std::string ObjectReader::path_of(std::string_view key) const
{
    return path_.empty() ? std::string(key) : path_ + "." + std::string(key);
}

const ObjectReader::json* ObjectReader::take(std::string_view key)
{
    auto it = j_.find(std::string(key));
    if (it == j_.end()) {
        return nullptr;
    }
    consumed_.emplace(key);
    return &*it;
}

ObjectReader ObjectReader::child(std::string_view key)
{
    if (const json* v = take(key)) {
        return ObjectReader(*v, path_of(key));
    }
    return ObjectReader(kEmptyObject, path_of(key));
}

void ObjectReader::finish() const
{
    for (auto it = j_.begin(); it != j_.end(); ++it) {
        if (!consumed_.contains(it.key())) {
            throw ConfigError(path_of(it.key()), "unknown key");
        }
    }
}

nlohmann::ordered_json threshold_to_json(double t)
{
    if (std::isinf(t) && t > 0.0) {
        return "inf";
    }
    return t;
}

double threshold_from_json(const nlohmann::ordered_json& j, const std::string& path)
{
    if (j.is_string() && j.get<std::string>() == "inf") {
        return std::numeric_limits<double>::infinity();
    }
    if (!j.is_number()) {
        throw ConfigError(path, "expected a number or \"inf\"");
    }
    return j.get<double>();
}

} // namespace honeytrap
