#pragma once

// The six sampling equivalences (edge-flip, vert-permute, cond-vert-permute,
// f-to-r, r-to-f, f-to-f), checked two ways: exact total-probability sums of
// a seeded test random variable over discrete spaces, and two-sample mean
// tests over continuous samplers.

#include <string>
#include <vector>

#include "mmll/exact.hpp"
#include "mmll/label_algebra.hpp"
#include "mmll/rng.hpp"

namespace mmll {

struct EquivalenceResult {
    std::string id;
    bool exact = false;
    double lhs = 0.0;
    double rhs = 0.0;
    double diff = 0.0;    // |lhs - rhs|; identically 0 in exact mode
    double z_stat = 0.0;  // continuous mode
    uint64_t samples = 0;
    bool pass = false;
};

// Exact sums over all states at radius shape.radius (discrete model);
// the test variable is a seeded hash of the canonical index.
std::vector<EquivalenceResult> check_equivalences_exact(const Shape& shape,
                                                        const LabelModel& model, uint64_t xseed);

// Continuous samplers, two-sample z test at the given significance.
std::vector<EquivalenceResult> check_equivalences_continuous(const Shape& shape, uint64_t samples,
                                                             double significance, uint64_t seed);

}  // namespace mmll
