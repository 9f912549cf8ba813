#include "doctest.h"

#include "mmll/equivalences.hpp"

using namespace mmll;

TEST_CASE("six equivalences hold exactly at (3,1,L=2) and (2,2,L=2)") {
    for (auto [delta, r] : {std::pair{3, 1}, std::pair{2, 2}}) {
        auto results = check_equivalences_exact(Shape(delta, r), LabelModel::discrete(2), 12345);
        REQUIRE(results.size() == 6);
        for (const auto& res : results) {
            INFO(res.id, " at delta=", delta, " r=", r);
            CHECK(res.pass);
            CHECK(res.diff == 0.0);
        }
    }
}

TEST_CASE("exact suite is sensitive to the test-variable seed but still passes") {
    for (uint64_t seed : {1ull, 999ull}) {
        auto results = check_equivalences_exact(Shape(2, 1), LabelModel::discrete(3), seed);
        for (const auto& res : results) CHECK(res.pass);
    }
}

TEST_CASE("continuous two-sample checks pass at reduced size") {
    // acceptance runs the full 1e6-sample version; this is a fast regression
    auto results = check_equivalences_continuous(Shape(3, 1), 20000, 1e-3, 777);
    REQUIRE(results.size() == 6);
    for (const auto& res : results) {
        INFO(res.id, " z=", res.z_stat);
        CHECK(res.pass);
    }
}
