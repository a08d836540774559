#pragma once

#include <stdexcept>
#include <string>

namespace flocksim {

// Argument outside the mathematical domain of an operation.
struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};

// Malformed configuration: bad config string, bad scenario file, bad grid spec.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Grid lookup failed: time not a node, nodes not adjacent.
struct GridError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A state coordinate became non-finite during integration.
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Requested operation has no closed form for this family.
struct Unsupported : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Ensemble reduction over zero paths.
struct EmptyEnsemble : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Fit rejected: series too flat or too short to carry a rate.
struct DegenerateFit : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Index set references particles outside the state.
struct BadIndex : std::out_of_range {
    using std::out_of_range::out_of_range;
};

// Analysis applied to a scenario shape it does not support.
struct WrongScenario : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// File could not be written or read.
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace flocksim
