#pragma once

#include <stdexcept>
#include <string>

namespace honeytrap {

/// Invalid configuration. what() starts with the dotted field path.
class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& path, const std::string& reason)
        : std::runtime_error(path + ": " + reason), path_(path)
    {
    }
    [[nodiscard]] const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

/// No flagged users (or no usable observations) to calibrate from.
class EmptyDataset : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The choice likelihood is flat in the weights.
class NonIdentifiable : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace honeytrap
