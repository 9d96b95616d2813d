// errors.hpp: exception types shared by the library and the CLI exit-code mapping

#pragma once

#include <stdexcept>
#include <string>

namespace nmchain {

/// A numerical invariant (hermiticity, unit trace, positivity, unitarity,
/// Kraus completeness) was violated beyond its tolerance.
class InvariantViolation : public std::runtime_error {
public:
    InvariantViolation(std::string invariant, const std::string& detail)
        : std::runtime_error(invariant + ": " + detail), invariant_(std::move(invariant)) {}

    const std::string& invariant() const noexcept { return invariant_; }

private:
    std::string invariant_;
};

/// The request is well formed but names a feature this build does not provide
/// (e.g. selective sampling of a schedule whose molecules never close).
class UnsupportedFeature : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace nmchain
