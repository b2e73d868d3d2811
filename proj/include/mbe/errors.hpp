#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace mbe {

/// A field picked up a NaN or infinity.
struct NonFiniteError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Explicit step exceeded its stability budget (energy jumped).
struct StabilityViolation : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Asked a flux model without a slope selection mechanism for its
/// selected slopes.
struct NoSlopeSelection : std::domain_error {
    using std::domain_error::domain_error;
};

/// Fixed-point iteration exhausted its iteration budget. Carries the
/// residual history so callers can see how far it got.
struct NoConvergence : std::runtime_error {
    std::vector<double> residuals;

    NoConvergence(const std::string& msg, std::vector<double> r)
        : std::runtime_error(msg), residuals(std::move(r)) {}
};

/// A config value failed validation outside of parse_config's issue list
/// (for example a snapshot whose dimensions contradict the run config).
struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace mbe
