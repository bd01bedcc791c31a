#pragma once

#include <stdexcept>
#include <string>

namespace gpsq {

struct ParameterError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Drain rate does not exceed the mean input rate, so the queue has no
// stationary regime.
struct UnstableQueueError : std::domain_error {
    using std::domain_error::domain_error;
};

// Parameterization sits on a hyperplane where no regime applies.
struct BoundaryError : std::domain_error {
    using std::domain_error::domain_error;
};

struct EqualIndexError : std::domain_error {
    using std::domain_error::domain_error;
};

struct UnsupportedScenarioError : std::domain_error {
    using std::domain_error::domain_error;
};

// Regime hypotheses of an evaluator are violated by the parameters.
struct ScenarioError : std::domain_error {
    using std::domain_error::domain_error;
};

struct EstimationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InputError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct SimulationOverflowError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace gpsq
