#pragma once

// Hard-instance generation and certification: configuration-model sampling,
// girth, subgraph-density and expansion spot checks, matching-intersection
// pmf with ultra-log-concave tails, Delta-ary trees, and the line graph.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mmll/errors.hpp"
#include "mmll/exact.hpp"
#include "mmll/rng.hpp"

namespace mmll {

struct PortGraph {
    struct Half {
        int to = -1;       // neighbor vertex, -1 when the port is unused
        int to_port = 0;   // reciprocal port (1-based)
        int edge = -1;
    };
    struct Edge {
        int u, pu, v, pv;  // ports 1-based
    };

    int n = 0;
    int delta = 0;
    std::vector<std::vector<Half>> ports;  // [v][p-1]
    std::vector<Edge> edges;
    bool simple_flag = true;  // false once a parallel cluster pair collapsed

    static PortGraph empty(int n, int delta);
    int degree(int v) const;
    bool is_regular() const;
    int add_edge(int u, int pu, int v, int pv);  // returns edge id
    void validate() const;                       // involutive ports, degree bounds
};

// Uniform perfect matching on n*delta half-edge points; self-loop pairs are
// dropped, parallel cluster pairs collapse to one edge and clear simple_flag.
// Requires n >= 2 and n*delta even.
PortGraph sample_configuration_model(int n, int delta, uint64_t seed);

// Exact girth via per-vertex truncated BFS; nullopt for forests.
std::optional<int> girth(const PortGraph& g);
// True iff the graph has no cycle shorter than target (depth-bounded BFS).
bool girth_at_least(const PortGraph& g, int target);
// Independent recomputation (shortest u-v path avoiding each edge); used to
// cross-check certificates on graphs with at most ~1e4 edges.
std::optional<int> girth_by_edge_removal(const PortGraph& g);

struct SubgraphCheck {
    uint64_t set_size = 0;
    uint64_t edges = 0;
    std::string branch;  // "a" | "b" | "not-applicable" per the lemma window
    double a_rhs = 0.0;  // 1e8 * ln(n/|S|) * |S|
    bool a_pass = false;
    double b_expected = 0.0;   // |S|^2 delta / (2n)
    double b_tolerance = 0.0;  // |S|^2 delta / (50n)
    double b_deviation = 0.0;
    bool b_pass = false;
};
SubgraphCheck subgraph_size_check(const PortGraph& g, const std::vector<int>& set);

struct ExpansionCheck {
    uint64_t set_size = 0;
    uint64_t nbhd_size = 0;  // |N(S)| = |S together with its neighbors|
    double ratio = 0.0;
    double threshold = 0.0;  // sqrt(min(delta, n/|S|))
    bool in_window = false;  // n/e^{delta^{1/4}/1e9} <= |S| <= 4n/5
    bool pass = false;       // ratio > threshold
};
ExpansionCheck expansion_check(const PortGraph& g, const std::vector<int>& set);

struct InstanceCertificate {
    std::optional<int> girth;
    bool regular = false;
    bool simple = false;
    int girth_target = 0;
    long long tries = 0;
    std::string method;  // "reject" | "repair"
    std::vector<SubgraphCheck> subgraph_checks;
    std::vector<ExpansionCheck> expansion_checks;
};
std::string certificate_to_json(const InstanceCertificate& c);

// Pure rejection sampling (the declared envelope is (delta-1)^(2g-1) << n);
// throws exhaustion_error with the observed acceptance rate when tries run out.
std::pair<PortGraph, InstanceCertificate> sample_hard_instance(int n, int delta, int girth_target,
                                                               long long max_tries, uint64_t seed);

// Rejection inside the envelope, seeded double-edge-swap girth repair outside
// it; the certificate records which method ran and the recomputed girth.
std::pair<PortGraph, InstanceCertificate> build_hard_instance(int n, int delta, int girth_target,
                                                              long long max_tries, uint64_t seed);

// f(t) = Pr[|M cap E(K_n[S])| = t] for a uniform perfect matching, |S| = k.
double matching_intersection_pmf(int n, int k, int t);
Rat matching_intersection_pmf_exact(int n, int k, int t);  // n <= 64
// mu = k(k-1)/(2(n-1)); upper tail exp(-d^2 mu/(2+2d)), lower exp(-d^2 mu/2).
std::pair<double, double> matching_tail_bounds(int n, int k, double delta);

// Rooted tree whose internal vertices all have degree delta.
PortGraph delta_ary_tree(int delta, int depth);

// Vertices = edges of g, adjacency = edge incidence.
PortGraph line_graph(const PortGraph& g);

bool is_matching(const PortGraph& g, const std::vector<uint8_t>& selected_edges);
bool is_independent_set(const PortGraph& g, const std::vector<uint8_t>& selected_vertices);

// Text format: "mmll-graph v1 n=<n> delta=<D> simple=<0|1>" then one
// "u p_u v p_v" line per edge (vertices 0-based, ports 1-based).
std::string graph_to_text(const PortGraph& g);
PortGraph graph_from_text(const std::string& text);

}  // namespace mmll
