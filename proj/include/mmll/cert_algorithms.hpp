#pragma once

// r-round matching-certified algorithms: total functions F_r -> {0,1} that
// never accept two incident flowers. Tables over the canonical flower index
// are the ground-truth representation; builtins compile to tables on demand.

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mmll/exact.hpp"
#include "mmll/label_algebra.hpp"
#include "mmll/rng.hpp"

namespace mmll {

enum class CertifiedStatus : uint8_t { asserted, verified_sampled, verified_exhaustive };
std::string to_string(CertifiedStatus s);
CertifiedStatus certified_status_from_string(const std::string& s);

struct CertifiedAlgorithm {
    enum class BodyKind : uint8_t { table, builtin_zero, builtin_greedy, wrapped };

    Shape shape{2, 0};
    LabelModel model = LabelModel::discrete(2);
    BodyKind body = BodyKind::builtin_zero;
    std::vector<uint8_t> table;  // BodyKind::table, length L^flower_len
    std::function<int(const Flower&)> wrapped;
    CertifiedStatus status = CertifiedStatus::asserted;
    uint64_t verified_trials = 0;
    std::string provenance;

    int eval(const Flower& w) const;

    static CertifiedAlgorithm constant_zero(const Shape& shape, const LabelModel& model);
    // f(w)=1 iff w_0 is strictly below every neighbor label; requires radius 1.
    static CertifiedAlgorithm greedy_min_label(const Shape& shape, const LabelModel& model);
    static CertifiedAlgorithm from_table(const Shape& shape, uint32_t L, std::vector<uint8_t> bits,
                                         std::string provenance = "table");
    // Evaluate f on the center sub-flower of radius f.shape.radius; preserves
    // the matching-certified property (truncation commutes with end/shuffle).
    static CertifiedAlgorithm lift(const CertifiedAlgorithm& f, int radius);

    CertifiedAlgorithm to_table() const;  // discrete only
};

// ---------------------------------------------------------------- verification

struct IncidenceViolation {
    Flower w;
    Flower wp;
    IncidenceWitness witness;
};

struct VerifyReport {
    bool ok = false;
    CertifiedStatus achieved = CertifiedStatus::asserted;
    uint64_t trials = 0;         // sampled mode
    uint64_t accepted = 0;       // exhaustive mode: number of accepting flowers
    uint64_t pairs_checked = 0;
    std::optional<IncidenceViolation> violation;
};

// Exhaustive: index every accepted flower by the direction-column multiset of
// both endpoint neighborhoods and test all same-multiset pairs for a witness
// permutation with sigma(1) != 1. Decides the full incidence definition.
VerifyReport verify_matching_certified(const CertifiedAlgorithm& f, int workers = 1);

// Sampled: N random incident pairs (y' ~ R_r, sigma with sigma(1)!=1,
// y = sigma(y'), extensions on both, random reversals).
VerifyReport verify_matching_certified_sampled(const CertifiedAlgorithm& f, uint64_t trials,
                                               Rng rng);

// Runs the exhaustive check and stamps the status; throws on violation.
CertifiedAlgorithm verified(CertifiedAlgorithm f);

// All matching-certified tables at a (small) discrete shape, as bit tables.
std::vector<std::vector<uint8_t>> enumerate_certified_tables(const Shape& shape,
                                                             const LabelModel& model);

// ---------------------------------------------------------------- survival

struct SurvivalEstimate {
    double value = 0.0;
    bool exact = false;
    uint64_t num = 0, den = 0;   // exact mode, fully reduced
    uint64_t trials = 0;         // MC mode
    double half_width_95 = 0.0;  // MC mode
    Rat exact_value() const { return Rat(num, den); }
};

// P_f = Pr over z ~ R_{r+1} that every res_i(z) is rejected.
SurvivalEstimate survival_probability_exact(const CertifiedAlgorithm& f, int workers = 1);
SurvivalEstimate survival_probability_mc(const CertifiedAlgorithm& f, uint64_t trials, Rng rng,
                                         int workers = 1);

// ---------------------------------------------------------------- LOCAL wrap

// IDs are derived from edge-label prefixes: bit j of a vertex id is bit
// floor(j/k) of its j%k-th visible edge label, 10*log2(n) bits total. For
// discrete labels the expansion is base-L, so entropy is limited to what the
// alphabet carries.
using VertexId = unsigned __int128;
std::vector<VertexId> view_vertex_ids(const Flower& w, uint64_t n);

struct LocalProcedure {
    int radius = 1;
    std::string name;
    // decide membership of the view's center edge; ids are positional per
    // view_vertex_ids (A, B, then A-side vertices in flat order, then B-side)
    std::function<int(const Flower& view, const std::vector<VertexId>& ids)> decide;
};

// Wraps an r-round LOCAL matching procedure into a matching-certified
// algorithm of radius r+1: run A on the canonical presentation of the center
// edge and of every incident edge, then drop the center whenever an incident
// edge is also selected. Canonicalization makes decisions presentation
// independent, which is what certifies the result.
CertifiedAlgorithm certify_local(const LocalProcedure& A, const LabelModel& model, int delta,
                                 uint64_t n);

// ---------------------------------------------------------------- table files

// "MMCA" header + packed bit vector in canonical index order, JSON manifest
// alongside (path + ".json") with certified_status and provenance.
void write_table_file(const std::string& path, const CertifiedAlgorithm& algo);
CertifiedAlgorithm read_table_file(const std::string& path);

}  // namespace mmll
