#pragma once

// Synchronous LOCAL-model execution on port graphs with per-edge tapes.
// Views are extracted directly as edge-centered flowers (equivalent in LOCAL;
// no message passing is simulated). Flower orientation: side A is the smaller
// endpoint id; child order at each vertex follows the port numbering.

#include <cstdint>
#include <string>
#include <vector>

#include "mmll/cert_algorithms.hpp"
#include "mmll/graph_lab.hpp"
#include "mmll/label_algebra.hpp"

namespace mmll {

struct TapeAssignment {
    LabelModel model = LabelModel::continuous();
    uint64_t master = 0;

    double edge_label(int edge_id) const {
        Rng rng(master, 0x45444745ull + uint64_t(edge_id));
        return model.sample(rng);
    }
    // Dedicated stream for boundary padding, keyed by the padded view's
    // center edge and the pad slot.
    double virtual_label(int center_edge, int slot) const {
        Rng rng(master, 0x56495254ull + uint64_t(center_edge));
        rng.counter = uint64_t(slot);
        return model.sample(rng);
    }
};

enum class BoundaryPolicy : uint8_t { pad_virtual, restrict_interior };

struct FlowerView {
    Flower flower;
    int padded_labels = 0;  // virtual labels injected under pad_virtual
};

// Canonical flower of an edge's r-ball. Throws view_error when the ball is
// not a tree (short girth), or when a vertex is degree-deficient and padding
// is disabled.
FlowerView extract_flower_view(const PortGraph& g, int edge_id, int r, const TapeAssignment& tapes,
                               bool allow_pad);

struct MatchingOutcome {
    std::vector<uint8_t> selected;  // per edge id
    std::vector<uint8_t> matched;   // per vertex
    bool is_matching = false;
    bool is_maximal = false;
    uint64_t unmatched_count = 0;
    uint64_t adjacent_unmatched_pairs = 0;
    uint64_t padded_views = 0;
    uint64_t skipped_views = 0;  // restrict_interior or short-girth views
    BoundaryPolicy policy = BoundaryPolicy::pad_virtual;
};

MatchingOutcome run(const CertifiedAlgorithm& f, const PortGraph& g, uint64_t seed,
                    BoundaryPolicy policy = BoundaryPolicy::pad_virtual);

// True iff no edge with both endpoints unmatched lies inside the radius-R
// ball around v (maximality on the induced subgraph).
bool local_maximality(const PortGraph& g, const MatchingOutcome& outcome, int v, int radius);

// exp(-2 lambda^2 / (n chi))
double dependence_chernoff_bound(double n, double lambda, double chi);

struct ConcentrationPoint {
    double lambda = 0.0;
    double empirical = 0.0;  // Pr[count < mean - lambda]
    double bound = 0.0;
    bool pass = false;
};

struct SurvivalStats {
    uint64_t trials = 0;
    std::vector<uint64_t> unmatched;                // per trial
    std::vector<uint64_t> adjacent_unmatched;       // per trial
    std::vector<uint8_t> maximal;                   // per trial
    double mean_unmatched = 0.0;
    double var_unmatched = 0.0;
    double mean_unmatched_fraction = 0.0;
    double pr_maximal = 0.0;
    double chi = 0.0;  // dependency-graph chromatic bound delta^{4r}
    uint64_t matching_violations = 0;  // trials whose output was not a matching
    std::vector<ConcentrationPoint> concentration;
};

SurvivalStats survival_stats(const CertifiedAlgorithm& f, const PortGraph& g, uint64_t trials,
                             uint64_t seed, BoundaryPolicy policy = BoundaryPolicy::pad_virtual,
                             const std::vector<double>& lambda_grid = {}, int workers = 1);

std::string outcome_csv(const SurvivalStats& stats);

}  // namespace mmll
