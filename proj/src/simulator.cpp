#include "mmll/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <unordered_set>

#include "mmll/parallel.hpp"

namespace mmll {

namespace {

// Depth-block collector for one side of a flower. Walks the subtree hanging
// off `vertex` away from `avoid_edge`, appending edge labels of each depth to
// blocks[depth-1] in port order. Enforces treeness (all visited vertices
// distinct, boundary included) and full degree delta at internal vertices
// unless padding is allowed. Views are tiny, so visited is a flat vector.
struct SideCollector {
    const PortGraph& g;
    const TapeAssignment& tapes;
    int center_edge;
    int max_depth;
    bool allow_pad;
    std::vector<int>& visited;
    std::vector<std::vector<double>>& blocks;
    int pad_count = 0;
    int pad_slot = 0;

    // Emit the subtree below a missing (virtual) child edge.
    void emit_virtual(int depth) {
        if (depth > max_depth) return;
        blocks[depth - 1].push_back(tapes.virtual_label(center_edge, pad_slot++));
        ++pad_count;
        for (int k = 0; k < g.delta - 1; ++k) emit_virtual(depth + 1);
    }

    void walk(int vertex, int avoid_edge, int depth) {
        if (std::find(visited.begin(), visited.end(), vertex) != visited.end())
            throw view_error("flower view is not a tree (short girth)");
        visited.push_back(vertex);
        if (depth > max_depth) return;
        int emitted = 0;
        for (const auto& h : g.ports[vertex]) {
            if (h.to < 0 || h.edge == avoid_edge) continue;
            blocks[depth - 1].push_back(tapes.edge_label(h.edge));
            ++emitted;
            walk(h.to, h.edge, depth + 1);
        }
        for (; emitted < g.delta - 1; ++emitted) {
            if (!allow_pad)
                throw view_error("degree-deficient vertex in view (leaf without padding)");
            emit_virtual(depth);
        }
    }
};

}  // namespace

FlowerView extract_flower_view(const PortGraph& g, int edge_id, int r, const TapeAssignment& tapes,
                               bool allow_pad) {
    if (edge_id < 0 || edge_id >= int(g.edges.size()))
        throw validation_error("edge id out of range");
    const auto& e = g.edges[edge_id];
    int a = std::min(e.u, e.v), b = std::max(e.u, e.v);
    Shape shape(g.delta, r);
    Flower w{shape, tapes.model, std::vector<double>(shape.flower_len())};
    w.labels[0] = tapes.edge_label(edge_id);
    int padded = 0;
    std::vector<int> visited;
    for (Side side : {Side::A, Side::B}) {
        int endpoint = side == Side::A ? a : b;
        std::vector<std::vector<double>> blocks(std::max(r, 0));
        SideCollector collector{g, tapes, edge_id, r, allow_pad, visited, blocks};
        collector.pad_slot = side == Side::A ? 0 : 1 << 20;  // disjoint pad streams per side
        collector.walk(endpoint, edge_id, 1);
        padded += collector.pad_count;
        for (int s = 1; s <= r; ++s) {
            if (blocks[s - 1].size() != shape.s_len(s))
                throw view_error("collected block has unexpected size");
            std::copy(blocks[s - 1].begin(), blocks[s - 1].end(),
                      w.labels.begin() + shape.flower_offset(s, side));
        }
    }
    return FlowerView{std::move(w), padded};
}

MatchingOutcome run(const CertifiedAlgorithm& f, const PortGraph& g, uint64_t seed,
                    BoundaryPolicy policy) {
    if (g.delta != f.shape.delta)
        throw structural_error("graph delta does not match the algorithm shape");
    TapeAssignment tapes{f.model, seed};
    MatchingOutcome out;
    out.policy = policy;
    out.selected.assign(g.edges.size(), 0);
    out.matched.assign(g.n, 0);
    bool pad = policy == BoundaryPolicy::pad_virtual;
    for (size_t e = 0; e < g.edges.size(); ++e) {
        FlowerView view;
        try {
            view = extract_flower_view(g, int(e), f.shape.radius, tapes, pad);
        } catch (const view_error&) {
            out.skipped_views++;
            continue;
        }
        out.padded_views += view.padded_labels > 0;
        if (f.eval(view.flower)) {
            out.selected[e] = 1;
            out.matched[g.edges[e].u] = 1;
            out.matched[g.edges[e].v] = 1;
        }
    }
    // output flags
    std::vector<uint8_t> used(g.n, 0);
    out.is_matching = true;
    for (size_t e = 0; e < g.edges.size(); ++e) {
        if (!out.selected[e]) continue;
        if (used[g.edges[e].u] || used[g.edges[e].v]) out.is_matching = false;
        used[g.edges[e].u] = used[g.edges[e].v] = 1;
    }
    for (int v = 0; v < g.n; ++v) out.unmatched_count += !out.matched[v];
    for (const auto& e : g.edges)
        out.adjacent_unmatched_pairs += !out.matched[e.u] && !out.matched[e.v];
    out.is_maximal = out.is_matching && out.adjacent_unmatched_pairs == 0;
    return out;
}

bool local_maximality(const PortGraph& g, const MatchingOutcome& outcome, int v, int radius) {
    if (radius < 0) throw validation_error("radius must be >= 0");
    std::vector<int> dist(g.n, -1);
    std::vector<int> queue{v};
    dist[v] = 0;
    for (size_t head = 0; head < queue.size(); ++head) {
        int u = queue[head];
        if (dist[u] >= radius) continue;
        for (const auto& h : g.ports[u]) {
            if (h.to < 0 || dist[h.to] >= 0) continue;
            dist[h.to] = dist[u] + 1;
            queue.push_back(h.to);
        }
    }
    for (const auto& e : g.edges) {
        if (dist[e.u] < 0 || dist[e.v] < 0) continue;
        if (!outcome.matched[e.u] && !outcome.matched[e.v]) return false;
    }
    return true;
}

double dependence_chernoff_bound(double n, double lambda, double chi) {
    return std::exp(-2.0 * lambda * lambda / (n * chi));
}

SurvivalStats survival_stats(const CertifiedAlgorithm& f, const PortGraph& g, uint64_t trials,
                             uint64_t seed, BoundaryPolicy policy,
                             const std::vector<double>& lambda_grid, int workers) {
    SurvivalStats st;
    st.trials = trials;
    st.unmatched.resize(trials);
    st.adjacent_unmatched.resize(trials);
    st.maximal.resize(trials);
    std::vector<uint8_t> bad(trials, 0);
    parallel_for(trials, workers, [&](uint64_t b, uint64_t e) {
        for (uint64_t t = b; t < e; ++t) {
            MatchingOutcome out = run(f, g, splitmix64(seed ^ (t + 1)), policy);
            st.unmatched[t] = out.unmatched_count;
            st.adjacent_unmatched[t] = out.adjacent_unmatched_pairs;
            st.maximal[t] = out.is_maximal;
            bad[t] = !out.is_matching;
        }
    });
    for (uint64_t t = 0; t < trials; ++t) st.matching_violations += bad[t];
    double sum = 0, sum2 = 0, maxi = 0;
    for (uint64_t t = 0; t < trials; ++t) {
        sum += double(st.unmatched[t]);
        sum2 += double(st.unmatched[t]) * double(st.unmatched[t]);
        maxi += st.maximal[t];
    }
    st.mean_unmatched = sum / double(trials);
    st.var_unmatched =
        trials > 1 ? (sum2 - sum * sum / double(trials)) / double(trials - 1) : 0.0;
    st.mean_unmatched_fraction = st.mean_unmatched / double(g.n);
    st.pr_maximal = maxi / double(trials);
    st.chi = std::pow(double(f.shape.delta), 4.0 * f.shape.radius);
    for (double lambda : lambda_grid) {
        ConcentrationPoint p;
        p.lambda = lambda;
        uint64_t below = 0;
        for (uint64_t t = 0; t < trials; ++t)
            below += double(st.unmatched[t]) < st.mean_unmatched - lambda;
        p.empirical = double(below) / double(trials);
        p.bound = dependence_chernoff_bound(double(g.n), lambda, st.chi);
        p.pass = p.empirical <= p.bound;
        st.concentration.push_back(p);
    }
    return st;
}

std::string outcome_csv(const SurvivalStats& stats) {
    std::ostringstream os;
    os << "trial,unmatched_count,adjacent_unmatched_pairs,is_maximal\n";
    for (uint64_t t = 0; t < stats.trials; ++t)
        os << t << "," << stats.unmatched[t] << "," << stats.adjacent_unmatched[t] << ","
           << int(stats.maximal[t]) << "\n";
    return os.str();
}

}  // namespace mmll
