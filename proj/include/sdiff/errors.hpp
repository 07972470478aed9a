#pragma once

#include <stdexcept>
#include <string>

namespace sdiff {

struct ParameterError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// operation not available for this regularizer (e.g. no closed-form prox)
struct CapabilityError : std::logic_error {
    using std::logic_error::logic_error;
};

struct DimensionError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct DivergenceError : std::runtime_error {
    DivergenceError(const std::string& solver, long iteration, const std::string& detail = {})
        : std::runtime_error(solver + ": non-finite iterate at iteration " + std::to_string(iteration) +
                             (detail.empty() ? std::string() : " (" + detail + ")")),
          iteration(iteration) {}
    long iteration;
};

}  // namespace sdiff
