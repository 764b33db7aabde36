#pragma once

#include <stdexcept>
#include <string>

namespace causal_bandits {

// Invalid environment, policy, or experiment configuration.
class config_error : public std::invalid_argument {
public:
    explicit config_error(const std::string& what) : std::invalid_argument(what) {}
};

// The exact enumeration oracle refuses environments above its size cap.
class oracle_too_large : public std::runtime_error {
public:
    explicit oracle_too_large(const std::string& what) : std::runtime_error(what) {}
};

inline constexpr std::size_t kMaxEnumeratedNodes = 20;

}  // namespace causal_bandits
