#pragma once

#include <stdexcept>
#include <string>

namespace mmll {

// Error taxonomy shared by all modules. The CLI maps these onto exit codes:
// validation/structural/io -> 2, capacity -> 3, property failures -> 1.
struct structural_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct domain_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Precondition violation with a named offending direction (e.g. glue).
struct constraint_error : std::runtime_error {
    int direction = 0;
    constraint_error(const std::string& msg, int dir)
        : std::runtime_error(msg), direction(dir) {}
};

// Enumeration would exceed the configured state budget. Carries the exact
// state count as a decimal string (it may not fit in 64 bits).
struct capacity_error : std::runtime_error {
    std::string exact_count;
    capacity_error(const std::string& msg, std::string count)
        : std::runtime_error(msg), exact_count(std::move(count)) {}
};

struct view_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Rejection sampling ran out of tries; reports the observed acceptance rate.
struct exhaustion_error : std::runtime_error {
    double acceptance_rate = 0.0;
    long long tries = 0;
    exhaustion_error(const std::string& msg, double rate, long long t)
        : std::runtime_error(msg), acceptance_rate(rate), tries(t) {}
};

struct validation_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace mmll
