#include "mmll/graph_lab.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <set>
#include <sstream>

#include "mmll/errors.hpp"
#include "json.hpp"

namespace mmll {

PortGraph PortGraph::empty(int n, int delta) {
    PortGraph g;
    g.n = n;
    g.delta = delta;
    g.ports.assign(n, std::vector<Half>(delta));
    return g;
}

int PortGraph::degree(int v) const {
    int d = 0;
    for (const Half& h : ports[v]) d += h.to >= 0;
    return d;
}

bool PortGraph::is_regular() const {
    for (int v = 0; v < n; ++v)
        if (degree(v) != delta) return false;
    return true;
}

int PortGraph::add_edge(int u, int pu, int v, int pv) {
    if (u == v) throw structural_error("add_edge: self loop");
    if (ports[u][pu - 1].to >= 0 || ports[v][pv - 1].to >= 0)
        throw structural_error("add_edge: port already used");
    int id = int(edges.size());
    edges.push_back(Edge{u, pu, v, pv});
    ports[u][pu - 1] = Half{v, pv, id};
    ports[v][pv - 1] = Half{u, pu, id};
    return id;
}

void PortGraph::validate() const {
    for (int v = 0; v < n; ++v) {
        if (int(ports[v].size()) != delta) throw structural_error("port table width != delta");
        for (int p = 1; p <= delta; ++p) {
            const Half& h = ports[v][p - 1];
            if (h.to < 0) continue;
            if (h.to >= n || h.to_port < 1 || h.to_port > delta)
                throw structural_error("port target out of range");
            const Half& back = ports[h.to][h.to_port - 1];
            if (back.to != v || back.to_port != p || back.edge != h.edge)
                throw structural_error("port map is not involutive");
        }
    }
}

// ---------------------------------------------------------------- config model

namespace {

// Pair shuffled points (2k, 2k+1); a uniform shuffle induces a uniform
// perfect matching on the n*delta points.
std::vector<int> uniform_point_matching(int points, Rng& rng) {
    std::vector<int> pts(points);
    for (int i = 0; i < points; ++i) pts[i] = i;
    for (int i = points - 1; i > 0; --i)
        std::swap(pts[i], pts[rng.next_below(uint32_t(i + 1))]);
    return pts;
}

PortGraph graph_from_matching(int n, int delta, const std::vector<int>& pts) {
    PortGraph g = PortGraph::empty(n, delta);
    std::set<std::pair<int, int>> seen;
    for (size_t k = 0; k + 1 < pts.size(); k += 2) {
        int a = pts[k], b = pts[k + 1];
        int i = a / delta, j = b / delta;
        if (i == j) continue;  // intracluster pair: dropped per the definition
        auto key = std::minmax(i, j);
        if (!seen.insert(key).second) {
            g.simple_flag = false;  // parallel cluster pair collapses
            continue;
        }
        g.add_edge(i, a % delta + 1, j, b % delta + 1);
    }
    return g;
}

}  // namespace

PortGraph sample_configuration_model(int n, int delta, uint64_t seed) {
    if (n < 2) throw validation_error("configuration model needs n >= 2");
    if ((int64_t(n) * delta) % 2 != 0)
        throw validation_error("configuration model needs n*delta even (no perfect matching of points)");
    Rng rng(seed, 0x43464d4cull);  // stream tag for config-model draws
    auto pts = uniform_point_matching(n * delta, rng);
    return graph_from_matching(n, delta, pts);
}

// ---------------------------------------------------------------- girth

namespace {

// Shortest cycle through any vertex probed so far; depth-bounded by `cap`.
// Returns INT_MAX when no cycle of length <= 2*cap+1 exists.
int girth_scan(const PortGraph& g, int cap_depth, int stop_below) {
    int best = INT32_MAX;
    std::vector<int> dist(g.n), parent_edge(g.n);
    std::deque<int> queue;
    for (int s = 0; s < g.n; ++s) {
        std::fill(dist.begin(), dist.end(), -1);
        dist[s] = 0;
        parent_edge[s] = -1;
        queue.clear();
        queue.push_back(s);
        while (!queue.empty()) {
            int u = queue.front();
            queue.pop_front();
            if (dist[u] >= cap_depth || 2 * dist[u] + 1 >= best) continue;
            for (const auto& h : g.ports[u]) {
                if (h.to < 0 || h.edge == parent_edge[u]) continue;
                if (dist[h.to] < 0) {
                    dist[h.to] = dist[u] + 1;
                    parent_edge[h.to] = h.edge;
                    queue.push_back(h.to);
                } else if (dist[h.to] >= dist[u]) {
                    best = std::min(best, dist[u] + dist[h.to] + 1);
                    if (best < stop_below) return best;
                }
            }
        }
    }
    return best;
}

}  // namespace

std::optional<int> girth(const PortGraph& g) {
    int best = girth_scan(g, g.n + 1, 0);
    if (best == INT32_MAX) return std::nullopt;
    return best;
}

bool girth_at_least(const PortGraph& g, int target) {
    if (target <= 1) return true;
    int best = girth_scan(g, target / 2 + 1, target);
    return best >= target;
}

std::optional<int> girth_by_edge_removal(const PortGraph& g) {
    int best = INT32_MAX;
    std::vector<int> dist(g.n);
    std::deque<int> queue;
    for (const auto& e : g.edges) {
        std::fill(dist.begin(), dist.end(), -1);
        dist[e.u] = 0;
        queue.clear();
        queue.push_back(e.u);
        int found = -1;
        int skip = &e - g.edges.data();
        while (!queue.empty() && found < 0) {
            int u = queue.front();
            queue.pop_front();
            if (dist[u] + 1 >= best) continue;
            for (const auto& h : g.ports[u]) {
                if (h.to < 0 || h.edge == skip || dist[h.to] >= 0) continue;
                dist[h.to] = dist[u] + 1;
                if (h.to == e.v) {
                    found = dist[h.to];
                    break;
                }
                queue.push_back(h.to);
            }
        }
        if (found >= 0) best = std::min(best, found + 1);
    }
    if (best == INT32_MAX) return std::nullopt;
    return best;
}

// ---------------------------------------------------------------- checks

SubgraphCheck subgraph_size_check(const PortGraph& g, const std::vector<int>& set) {
    SubgraphCheck c;
    c.set_size = set.size();
    std::vector<uint8_t> in(g.n, 0);
    for (int v : set) {
        if (v < 0 || v >= g.n) throw validation_error("subgraph check: vertex out of range");
        in[v] = 1;
    }
    for (const auto& e : g.edges) c.edges += in[e.u] && in[e.v];
    double n = double(g.n), s = double(set.size());
    double a_lo = std::sqrt(n);
    double a_hi = 1e6 * n * std::log(double(g.delta)) / double(g.delta);
    if (s >= a_lo && s <= a_hi)
        c.branch = "a";
    else if (s > a_hi)
        c.branch = "b";
    else
        c.branch = "not-applicable";
    if (s > 0) {
        c.a_rhs = 1e8 * std::log(n / s) * s;
        c.a_pass = double(c.edges) < c.a_rhs;
    }
    c.b_expected = s * s * g.delta / (2.0 * n);
    c.b_tolerance = s * s * g.delta / (50.0 * n);
    c.b_deviation = std::abs(double(c.edges) - c.b_expected);
    c.b_pass = c.b_deviation < c.b_tolerance || (c.b_deviation == 0.0 && c.b_tolerance == 0.0);
    return c;
}

ExpansionCheck expansion_check(const PortGraph& g, const std::vector<int>& set) {
    ExpansionCheck c;
    c.set_size = set.size();
    std::vector<uint8_t> in(g.n, 0);
    for (int v : set) in[v] = 1;
    std::vector<uint8_t> nb = in;
    for (int v : set)
        for (const auto& h : g.ports[v])
            if (h.to >= 0) nb[h.to] = 1;
    for (int v = 0; v < g.n; ++v) c.nbhd_size += nb[v];
    if (!set.empty()) {
        double s = double(set.size()), n = double(g.n);
        c.ratio = double(c.nbhd_size) / s;
        c.threshold = std::sqrt(std::min(double(g.delta), n / s));
        double lo = n / std::exp(std::pow(double(g.delta), 0.25) / 1e9);
        c.in_window = s >= lo && s <= 0.8 * n;
        c.pass = c.ratio > c.threshold;
    }
    return c;
}

// ---------------------------------------------------------------- hard instances

namespace {

InstanceCertificate make_certificate(const PortGraph& g, int girth_target, long long tries,
                                     const std::string& method) {
    InstanceCertificate c;
    c.girth = girth(g);
    c.regular = g.is_regular();
    c.simple = g.simple_flag;
    c.girth_target = girth_target;
    c.tries = tries;
    c.method = method;
    return c;
}

// Matching-level repair: first remove loops/duplicate cluster pairs, then
// double-edge swaps that break one short cycle each without creating new
// ones (checked by depth-bounded BFS through the two fresh edges).
PortGraph repair_matching_to_girth(int n, int delta, int target, long long max_steps, Rng rng) {
    std::vector<int> pts = uniform_point_matching(n * delta, rng);
    auto cluster = [&](int p) { return p / delta; };

    auto count_bad = [&]() {
        std::set<std::pair<int, int>> seen;
        long long bad = 0;
        for (size_t k = 0; k + 1 < pts.size(); k += 2) {
            int i = cluster(pts[k]), j = cluster(pts[k + 1]);
            if (i == j || !seen.insert(std::minmax(i, j)).second) ++bad;
        }
        return bad;
    };

    long long steps = 0;
    long long bad = count_bad();
    size_t pairs = pts.size() / 2;
    while (bad > 0) {
        if (++steps > max_steps)
            throw exhaustion_error("regularity repair did not converge", 0.0, steps);
        // locate one offending pair
        std::set<std::pair<int, int>> seen;
        size_t victim = pairs;
        for (size_t k = 0; k + 1 < pts.size(); k += 2) {
            int i = cluster(pts[k]), j = cluster(pts[k + 1]);
            if (i == j || !seen.insert(std::minmax(i, j)).second) {
                victim = k / 2;
                break;
            }
        }
        size_t partner = rng.next_below(uint32_t(pairs));
        if (partner == victim) continue;
        // swap second elements of the two pairs
        std::swap(pts[2 * victim + 1], pts[2 * partner + 1]);
        long long nb = count_bad();
        if (nb < bad)
            bad = nb;
        else
            std::swap(pts[2 * victim + 1], pts[2 * partner + 1]);  // undo
    }

    PortGraph g = graph_from_matching(n, delta, pts);
    // map cluster pair -> matching pair index for surgery
    while (!girth_at_least(g, target)) {
        if (++steps > max_steps)
            throw exhaustion_error("girth repair did not converge", 0.0, steps);
        // find one short cycle edge: BFS until some cycle < target shows up
        int cu = -1, cv = -1;
        {
            std::vector<int> dist(g.n), pe(g.n);
            for (int s = 0; s < g.n && cu < 0; ++s) {
                std::fill(dist.begin(), dist.end(), -1);
                dist[s] = 0;
                pe[s] = -1;
                std::deque<int> q{s};
                while (!q.empty() && cu < 0) {
                    int u = q.front();
                    q.pop_front();
                    if (2 * dist[u] + 1 >= target) continue;
                    for (const auto& h : g.ports[u]) {
                        if (h.to < 0 || h.edge == pe[u]) continue;
                        if (dist[h.to] < 0) {
                            dist[h.to] = dist[u] + 1;
                            pe[h.to] = h.edge;
                            q.push_back(h.to);
                        } else if (dist[u] + dist[h.to] + 1 < target) {
                            cu = u;
                            cv = h.to;
                            break;
                        }
                    }
                }
            }
        }
        if (cu < 0) break;  // no short cycle after all
        // locate the matching pair carrying edge (cu, cv)
        size_t k_edge = pairs;
        for (size_t k = 0; k + 1 < pts.size(); k += 2) {
            int i = cluster(pts[k]), j = cluster(pts[k + 1]);
            if (std::minmax(i, j) == std::minmax(cu, cv)) {
                k_edge = k / 2;
                break;
            }
        }
        if (k_edge == pairs) continue;
        size_t partner = rng.next_below(uint32_t(pairs));
        if (partner == k_edge) continue;
        std::swap(pts[2 * k_edge + 1], pts[2 * partner + 1]);
        PortGraph cand = graph_from_matching(n, delta, pts);
        bool ok = cand.simple_flag && cand.is_regular();
        if (ok) {
            // no new short cycle may pass through either fresh edge
            int a1 = cluster(pts[2 * k_edge]), b1 = cluster(pts[2 * k_edge + 1]);
            int a2 = cluster(pts[2 * partner]), b2 = cluster(pts[2 * partner + 1]);
            auto short_cycle_through = [&](int x, int y) {
                // distance from x to y avoiding the direct edge, bounded by target-2
                std::vector<int> dist(cand.n, -1);
                dist[x] = 0;
                std::deque<int> q{x};
                while (!q.empty()) {
                    int u = q.front();
                    q.pop_front();
                    if (dist[u] >= target - 2) continue;
                    for (const auto& h : cand.ports[u]) {
                        if (h.to < 0) continue;
                        if (u == x && h.to == y) continue;  // skip the fresh edge itself
                        if (dist[h.to] >= 0) continue;
                        dist[h.to] = dist[u] + 1;
                        if (h.to == y) return true;
                        q.push_back(h.to);
                    }
                }
                return false;
            };
            ok = !short_cycle_through(a1, b1) && !short_cycle_through(a2, b2);
        }
        if (ok)
            g = std::move(cand);
        else
            std::swap(pts[2 * k_edge + 1], pts[2 * partner + 1]);  // undo
    }
    return g;
}

}  // namespace

std::pair<PortGraph, InstanceCertificate> sample_hard_instance(int n, int delta, int girth_target,
                                                               long long max_tries, uint64_t seed) {
    if (girth_target < 3) throw validation_error("girth target must be >= 3");
    for (long long t = 0; t < max_tries; ++t) {
        PortGraph g = sample_configuration_model(n, delta, splitmix64(seed) + uint64_t(t));
        if (!g.simple_flag || !g.is_regular()) continue;
        if (!girth_at_least(g, girth_target)) continue;
        auto cert = make_certificate(g, girth_target, t + 1, "reject");
        return {std::move(g), std::move(cert)};
    }
    throw exhaustion_error("rejection sampling exhausted " + std::to_string(max_tries) +
                               " tries without a simple regular girth-" +
                               std::to_string(girth_target) + " instance",
                           0.0, max_tries);
}

std::pair<PortGraph, InstanceCertificate> build_hard_instance(int n, int delta, int girth_target,
                                                              long long max_tries, uint64_t seed) {
    if (girth_target < 3) throw validation_error("girth target must be >= 3");
    // declared rejection envelope: (delta-1)^(2g-1) << n
    long double envelope = std::pow((long double)(delta - 1), 2.0L * girth_target - 1.0L);
    if (envelope * 8 <= (long double)n) return sample_hard_instance(n, delta, girth_target, max_tries, seed);
    PortGraph g = repair_matching_to_girth(n, delta, girth_target, std::max<long long>(max_tries, 100000), Rng(seed, 0x52455052ull));
    if (!girth_at_least(g, girth_target) || !g.is_regular() || !g.simple_flag)
        throw exhaustion_error("girth repair failed to certify", 0.0, max_tries);
    auto cert = make_certificate(g, girth_target, 1, "repair");
    return {std::move(g), std::move(cert)};
}

std::string certificate_to_json(const InstanceCertificate& c) {
    nlohmann::json checks = nlohmann::json::array();
    for (const auto& s : c.subgraph_checks)
        checks.push_back({{"set_size", s.set_size},
                          {"edges", s.edges},
                          {"branch", s.branch},
                          {"a_rhs", s.a_rhs},
                          {"a_pass", s.a_pass},
                          {"b_expected", s.b_expected},
                          {"b_tolerance", s.b_tolerance},
                          {"b_deviation", s.b_deviation},
                          {"b_pass", s.b_pass}});
    nlohmann::json exps = nlohmann::json::array();
    for (const auto& x : c.expansion_checks)
        exps.push_back({{"set_size", x.set_size},
                        {"nbhd_size", x.nbhd_size},
                        {"ratio", x.ratio},
                        {"threshold", x.threshold},
                        {"in_window", x.in_window},
                        {"pass", x.pass}});
    nlohmann::json j{{"girth", c.girth ? nlohmann::json(*c.girth) : nlohmann::json("infinity")},
                     {"regular", c.regular},
                     {"simple", c.simple},
                     {"girth_target", c.girth_target},
                     {"tries", c.tries},
                     {"method", c.method},
                     {"subgraph_checks", checks},
                     {"expansion_checks", exps}};
    return j.dump(2);
}

// ---------------------------------------------------------------- pmf

namespace {
bool pmf_feasible(int n, int k, int t) {
    return n >= 2 && n % 2 == 0 && k >= 0 && k <= n && t >= 0 && k - 2 * t >= 0 &&
           (n - k) >= (k - 2 * t) && (n / 2 - k + t) >= 0;
}
}  // namespace

double matching_intersection_pmf(int n, int k, int t) {
    if (!pmf_feasible(n, k, t)) return 0.0;
    double lf = std::lgamma(k + 1.0) + std::lgamma(n - k + 1.0) + std::lgamma(n / 2 + 1.0) +
                (k - 2.0 * t) * std::log(2.0) - std::lgamma(k - 2.0 * t + 1.0) -
                std::lgamma(t + 1.0) - std::lgamma(n / 2.0 - k + t + 1.0) - std::lgamma(n + 1.0);
    return std::exp(lf);
}

Rat matching_intersection_pmf_exact(int n, int k, int t) {
    if (n > 64) throw capacity_error("exact pmf limited to n <= 64", std::to_string(n));
    if (!pmf_feasible(n, k, t)) return Rat(0);
    auto fact = [](int m) {
        BigInt f = 1;
        for (int i = 2; i <= m; ++i) f *= i;
        return f;
    };
    BigInt num = fact(k) * fact(n - k) * fact(n / 2) * big_pow(BigInt(2), unsigned(k - 2 * t));
    BigInt den = fact(k - 2 * t) * fact(t) * fact(n / 2 - k + t) * fact(n);
    return Rat(num, den);
}

std::pair<double, double> matching_tail_bounds(int n, int k, double delta) {
    double mu = double(k) * (k - 1) / (2.0 * (n - 1));
    double upper = std::exp(-delta * delta * mu / (2.0 + 2.0 * delta));
    double lower = std::exp(-delta * delta * mu / 2.0);
    return {upper, lower};
}

// ---------------------------------------------------------------- trees, line graph

PortGraph delta_ary_tree(int delta, int depth) {
    if (delta < 2) throw validation_error("delta-ary tree needs delta >= 2");
    if (depth < 0) throw validation_error("depth must be >= 0");
    uint64_t count = 1, layer = 0;
    for (int d = 0; d < depth; ++d) {
        layer = (d == 0) ? uint64_t(delta) : layer * uint64_t(delta - 1);
        count += layer;
        if (count > (1ull << 31))
            throw capacity_error("tree vertex count exceeds budget", std::to_string(count));
    }
    PortGraph g = PortGraph::empty(int(count), delta);
    // BFS construction; children attach to consecutive free ports
    std::vector<int> frontier{0};
    std::vector<int> next_port(count, 1);
    int next_vertex = 1;
    for (int d = 0; d < depth; ++d) {
        std::vector<int> next_frontier;
        for (int v : frontier) {
            int kids = (v == 0) ? delta : delta - 1;
            for (int c = 0; c < kids; ++c) {
                int w = next_vertex++;
                g.add_edge(v, next_port[v]++, w, next_port[w]++);
                next_frontier.push_back(w);
            }
        }
        frontier = std::move(next_frontier);
    }
    return g;
}

PortGraph line_graph(const PortGraph& g) {
    if (!g.simple_flag) throw validation_error("line graph requires a simple graph");
    int m = int(g.edges.size());
    // degree in the line graph: deg(u) + deg(v) - 2
    int ldelta = 0;
    for (const auto& e : g.edges)
        ldelta = std::max(ldelta, g.degree(e.u) + g.degree(e.v) - 2);
    PortGraph lg = PortGraph::empty(m, std::max(ldelta, 1));
    std::vector<int> next_port(m, 1);
    for (int v = 0; v < g.n; ++v) {
        std::vector<int> inc;
        for (const auto& h : g.ports[v])
            if (h.to >= 0) inc.push_back(h.edge);
        for (size_t a = 0; a < inc.size(); ++a)
            for (size_t b = a + 1; b < inc.size(); ++b)
                lg.add_edge(inc[a], next_port[inc[a]]++, inc[b], next_port[inc[b]]++);
    }
    return lg;
}

bool is_matching(const PortGraph& g, const std::vector<uint8_t>& selected_edges) {
    std::vector<uint8_t> used(g.n, 0);
    for (size_t e = 0; e < g.edges.size(); ++e) {
        if (e >= selected_edges.size() || !selected_edges[e]) continue;
        if (used[g.edges[e].u] || used[g.edges[e].v]) return false;
        used[g.edges[e].u] = used[g.edges[e].v] = 1;
    }
    return true;
}

bool is_independent_set(const PortGraph& g, const std::vector<uint8_t>& selected_vertices) {
    for (const auto& e : g.edges)
        if (selected_vertices[e.u] && selected_vertices[e.v]) return false;
    return true;
}

// ---------------------------------------------------------------- io

std::string graph_to_text(const PortGraph& g) {
    std::ostringstream os;
    os << "mmll-graph v1 n=" << g.n << " delta=" << g.delta << " simple=" << (g.simple_flag ? 1 : 0)
       << "\n";
    for (const auto& e : g.edges) os << e.u << " " << e.pu << " " << e.v << " " << e.pv << "\n";
    return os.str();
}

PortGraph graph_from_text(const std::string& text) {
    std::istringstream is(text);
    std::string tag, ver, nfield, dfield, sfield;
    is >> tag >> ver >> nfield >> dfield >> sfield;
    auto want = [&](const std::string& got, const std::string& prefix) {
        if (got.rfind(prefix, 0) != 0)
            throw validation_error("bad graph header field: " + got);
        return std::stoi(got.substr(prefix.size()));
    };
    if (tag != "mmll-graph" || ver != "v1") throw validation_error("bad graph header");
    int n = want(nfield, "n=");
    int delta = want(dfield, "delta=");
    int simple = want(sfield, "simple=");
    PortGraph g = PortGraph::empty(n, delta);
    g.simple_flag = simple != 0;
    int u, pu, v, pv;
    while (is >> u >> pu >> v >> pv) g.add_edge(u, pu, v, pv);
    g.validate();
    return g;
}

}  // namespace mmll
