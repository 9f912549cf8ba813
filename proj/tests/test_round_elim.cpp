#include "doctest.h"

#include <algorithm>
#include <cmath>

#include "mmll/round_elim.hpp"

using namespace mmll;

namespace {

CertifiedAlgorithm greedy(int delta, uint32_t L) {
    return CertifiedAlgorithm::greedy_min_label(Shape(delta, 1), LabelModel::discrete(L));
}

Neighborhood nb(int delta, int r, uint32_t L, std::vector<double> labels) {
    return Neighborhood{Shape(delta, r), LabelModel::discrete(L), std::move(labels)};
}

Flower fl(int delta, int r, uint32_t L, std::vector<double> labels) {
    return Flower{Shape(delta, r), LabelModel::discrete(L), std::move(labels)};
}

}  // namespace

TEST_CASE("constants satisfy their defining identities") {
    CHECK(Constants::C10() ==
          doctest::Approx(double(std::min(Constants::C5(),
                                          (1.0L - 99.0L / 100.0L) / (12.0L * std::exp(4.0L)))))
              .epsilon(1e-15));
    CHECK(double(Constants::C5()) == doctest::Approx(std::exp(-3.0) / 1000.0).epsilon(1e-15));
    CHECK(double(Constants::C11()) == doctest::Approx(168e4 * std::exp(4.0)).epsilon(1e-15));
    // C10 * C11 = 1400 exactly
    CHECK(double(Constants::C10() * Constants::C11()) == doctest::Approx(1400.0).epsilon(1e-12));
    CHECK(Constants::C1_exact() == big_pow(BigInt(10), 80));
    CHECK(double(Constants::F1(0.5L)) == doctest::Approx(3.0 * std::exp(4.0)).epsilon(1e-15));
}

TEST_CASE("dir picks the unique accepting direction") {
    auto g = greedy(2, 4);
    CHECK(dir(g, nb(2, 1, 4, {1, 3})) == 1);  // a < b points in direction 1
    CHECK(dir(g, nb(2, 1, 4, {3, 1})) == 2);
    CHECK(dir(g, nb(2, 1, 4, {2, 2})) == 0);  // discrete tie: no strict-min extension
    CHECK(dir(g, nb(2, 1, 4, {3, 3})) == 0);
    auto z = CertifiedAlgorithm::constant_zero(Shape(3, 1), LabelModel::discrete(2));
    CHECK(dir(z, nb(3, 1, 2, {0, 1, 0})) == 0);
}

TEST_CASE("q_value frozen examples") {
    auto g = greedy(2, 2);
    CHECK(q_value(g, fl(2, 0, 2, {0})) == Rat(1, 2));
    CHECK(q_value(g, fl(2, 0, 2, {1})) == Rat(0));
    auto z = CertifiedAlgorithm::constant_zero(Shape(2, 1), LabelModel::discrete(2));
    CHECK(q_value(z, fl(2, 0, 2, {0})) == Rat(0));
    // L=4 ladder: Q(a) = #{u > a}/4
    auto g4 = greedy(2, 4);
    for (int a = 0; a < 4; ++a) CHECK(q_value(g4, fl(2, 0, 4, {double(a)})) == Rat(3 - a, 4));
}

TEST_CASE("q_value_mc approximates the continuous Q = 1 - a for greedy") {
    auto g = CertifiedAlgorithm::greedy_min_label(Shape(2, 1), LabelModel::continuous());
    for (double a : {0.25, 0.7}) {
        Flower x{Shape(2, 0), LabelModel::continuous(), {a}};
        double q = q_value_mc(g, x, 6000, 24, Rng(11, uint64_t(a * 100)));
        CHECK(std::abs(q - (1.0 - a)) < 0.025);
    }
}

TEST_CASE("is_good thresholds") {
    auto g4 = greedy(2, 4);
    // 0-flowers are palindromic, so t(a) = 1 - Q(a) = (a+1)/4
    CHECK(goodness_threshold(g4, fl(2, 0, 4, {0})) == Rat(1, 4));
    CHECK(goodness_threshold(g4, fl(2, 0, 4, {3})) == Rat(1));
    CHECK(is_good(g4, fl(2, 0, 4, {0}), 0.25));
    CHECK(!is_good(g4, fl(2, 0, 4, {1}), 0.25));
    // delta = 1 makes every flower good; constant zero has none below 1
    auto z = CertifiedAlgorithm::constant_zero(Shape(2, 1), LabelModel::discrete(2));
    CHECK(is_good(z, fl(2, 0, 2, {0}), 1.0));
    CHECK(!is_good(z, fl(2, 0, 2, {0}), 0.999));
}

TEST_CASE("extension profile: symmetric directions tie at the empty neighborhood") {
    auto g4 = greedy(2, 4);
    Neighborhood empty{Shape(2, 0), LabelModel::discrete(4), {}};
    auto pr = extension_profile(g4, empty, 0.25);
    REQUIRE(pr.p.size() == 2);
    CHECK(pr.p[0] == Rat(1, 4));  // only a = 0 is 1/4-good
    CHECK(pr.p[1] == Rat(1, 4));
    CHECK(pr.i_max == 0);  // tie
    CHECK(pr.total == Rat(1, 2));
    CHECK(pr.comp == Rat(1, 4));

    auto z = CertifiedAlgorithm::constant_zero(Shape(2, 1), LabelModel::discrete(2));
    Neighborhood e2{Shape(2, 0), LabelModel::discrete(2), {}};
    auto pz = extension_profile(z, e2, 0.5);
    CHECK(pz.p[0] == Rat(0));
    CHECK(pz.i_max == 0);
}

TEST_CASE("profiles are componentwise monotone in delta (comp-monotone)") {
    auto gr = greedy(3, 2);
    Neighborhood empty{Shape(3, 0), LabelModel::discrete(2), {}};
    auto grid = default_delta_grid();
    ExtensionProfile prev;
    bool first = true;
    for (double d : grid) {
        auto pr = extension_profile(gr, empty, d);
        if (!first) {
            for (size_t i = 0; i < pr.p.size(); ++i) CHECK(prev.p[i] <= pr.p[i]);
            CHECK(prev.comp <= pr.comp);
        }
        prev = pr;
        first = false;
    }
}

TEST_CASE("delta_dom: grid and exact versions") {
    auto z = CertifiedAlgorithm::constant_zero(Shape(2, 1), LabelModel::discrete(2));
    Neighborhood empty{Shape(2, 0), LabelModel::discrete(2), {}};
    CHECK(delta_dom(z, empty, default_delta_grid()) == 1.0);
    CHECK(delta_dom_exact(z, empty) == Rat(1));

    auto g4 = greedy(2, 4);
    Neighborhood e4{Shape(2, 0), LabelModel::discrete(4), {}};
    CHECK(delta_dom(g4, e4, default_delta_grid()) == 1.0);
    CHECK(delta_dom_exact(g4, e4) == Rat(1));

    // a table accepting exactly the direction-1 extension family reaches C4 early
    // (all 1-flower extensions of the empty neighborhood are good at t = 0):
    // use the single-flower table accepting (0,1,1)
    std::vector<uint8_t> bits(8, 0);
    bits[3] = 1;  // labels (0,1,1) in canonical order
    auto f = CertifiedAlgorithm::from_table(Shape(2, 1), 2, bits, "single");
    Neighborhood e2{Shape(2, 0), LabelModel::discrete(2), {}};
    auto dd = delta_dom_exact(f, e2);
    CHECK(dd <= Rat(1));
    CHECK(delta_dom(f, e2, default_delta_grid()) >= to_double(dd));  // grid upper-bounds exact
}

TEST_CASE("eliminate(greedy delta=2 r=1) is constant zero and certified") {
    for (uint32_t L : {2u, 3u, 4u}) {
        auto res = eliminate(greedy(2, L));
        CHECK(std::all_of(res.g.table.begin(), res.g.table.end(),
                          [](uint8_t b) { return b == 0; }));
        CHECK(verify_matching_certified(res.g).ok);
        CHECK(survival_probability_exact(res.g).exact_value() == Rat(1));
    }
}

TEST_CASE("eliminate(constant-zero) stays constant zero") {
    auto z = CertifiedAlgorithm::constant_zero(Shape(2, 1), LabelModel::discrete(2)).to_table();
    auto res = eliminate(z);
    CHECK(std::all_of(res.g.table.begin(), res.g.table.end(), [](uint8_t b) { return b == 0; }));
}

TEST_CASE("eliminate output re-verifies for every certified table at (3,1,L=2)") {
    // sampled subset of certified tables via the builtin family plus zero
    for (auto f : {greedy(3, 2).to_table(),
                   CertifiedAlgorithm::constant_zero(Shape(3, 1), LabelModel::discrete(2)).to_table()}) {
        auto res = eliminate(f);
        CHECK(verify_matching_certified(res.g).ok);
    }
}

TEST_CASE("chained elimination from r=2 terminates at constant zero with survival 1") {
    auto f2 = CertifiedAlgorithm::lift(greedy(2, 2), 2).to_table();
    CHECK(verify_matching_certified(f2).ok);
    auto g1 = eliminate(f2).g;
    CHECK(g1.shape.radius == 1);
    CHECK(verify_matching_certified(g1).ok);
    auto g0 = eliminate(g1).g;
    CHECK(g0.shape.radius == 0);
    CHECK(std::all_of(g0.table.begin(), g0.table.end(), [](uint8_t b) { return b == 0; }));
    CHECK(survival_probability_exact(g0).exact_value() == Rat(1));
}

TEST_CASE("c5 override: validation and effect on the good set") {
    CHECK_THROWS_AS(eliminate(greedy(2, 4), 1.5), validation_error);
    auto strict = eliminate(greedy(2, 4));        // C5 ~ 5e-5: nothing is good
    auto loose = eliminate(greedy(2, 4), 0.3);    // t(0) = 1/4 <= 0.3
    uint64_t strict_good = 0, loose_good = 0;
    for (auto b : strict.good_bitmap) strict_good += b;
    for (auto b : loose.good_bitmap) loose_good += b;
    CHECK(strict_good == 0);
    CHECK(loose_good == 1);
}

TEST_CASE("fact same-dir holds exactly at (3,1,L=2)") {
    auto g = greedy(3, 2).to_table();
    auto fspace = enumerate_flowers(Shape(3, 0), LabelModel::discrete(2));
    for (uint64_t xi = 0; xi < fspace.size(); ++xi) {
        Flower x = fspace.decode_flower(xi);
        auto base = enumerate_cond_res(1, x);
        uint64_t base_hits = 0;
        for (uint64_t c = 0; c < base.size(); ++c)
            base_hits += dir(g, base.decode_neighborhood(c)) == 1;
        for (int i = 2; i <= 3; ++i) {
            auto cond = enumerate_cond_res(i, x);
            uint64_t hits = 0;
            for (uint64_t c = 0; c < cond.size(); ++c)
                hits += dir(g, cond.decode_neighborhood(c)) == i;
            CHECK(Rat(hits, cond.size()) == Rat(base_hits, base.size()));
        }
    }
}

TEST_CASE("audit passes for greedy and constant-zero tables") {
    auto grid = default_delta_grid();
    for (auto f : {greedy(2, 2).to_table(), greedy(3, 2).to_table(),
                   CertifiedAlgorithm::constant_zero(Shape(2, 1), LabelModel::discrete(2)).to_table()}) {
        auto report = audit(f, grid);
        for (const auto& e : report.entries) {
            INFO(f.provenance, " entry ", e.id, " lhs=", double(e.lhs), " rhs=", double(e.rhs));
            CHECK(e.pass);
        }
        CHECK(report.all_pass);
    }
}

TEST_CASE("audit passes for the lifted r=2 table (chain included)") {
    auto f2 = CertifiedAlgorithm::lift(greedy(2, 2), 2).to_table();
    auto report = audit(f2, default_delta_grid());
    for (const auto& e : report.entries) {
        INFO("entry ", e.id, " lhs=", double(e.lhs), " rhs=", double(e.rhs));
        CHECK(e.pass);
    }
}

TEST_CASE("audit serializes to CSV and JSON") {
    auto report = audit(greedy(2, 2).to_table(), default_delta_grid());
    auto csv = audit_to_csv(report);
    CHECK(csv.find("id,lhs,rhs,method,pass") == 0);
    CHECK(csv.find("a.one-side") != std::string::npos);
    auto json = audit_to_json(report);
    CHECK(json.find("\"all_pass\": true") != std::string::npos);
}

TEST_CASE("no dir-exclusivity violations were observed anywhere") {
    CHECK(dir_violation_count() == 0);
}

TEST_CASE("delta_dom threshold property: P_max >= C4 at delta implies dom <= delta") {
    auto g4 = greedy(2, 4).to_table();
    Neighborhood e4{Shape(2, 0), LabelModel::discrete(4), {}};
    auto grid = default_delta_grid();
    for (double d : grid) {
        auto pr = extension_profile(g4, e4, d);
        if (pr.p_max >= Constants::C4()) CHECK(delta_dom(g4, e4, grid) <= d);
    }
    CHECK(to_double(delta_dom_exact(g4, e4)) <= delta_dom(g4, e4, grid));
}
