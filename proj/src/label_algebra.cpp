#include "mmll/label_algebra.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <tuple>

#include "mmll/exact.hpp"
#include "json.hpp"

namespace mmll {

// ---------------------------------------------------------------- model

LabelModel LabelModel::discrete(uint32_t L) {
    if (L < 2) throw validation_error("discrete alphabet needs L >= 2, got " + std::to_string(L));
    return LabelModel{Kind::discrete, L};
}

bool LabelModel::label_valid(double x) const {
    if (is_discrete()) return x >= 0.0 && x < double(alphabet) && x == std::floor(x);
    return x >= 0.0 && x <= 1.0;
}

double LabelModel::sample(Rng& rng) const {
    return is_discrete() ? double(rng.next_below(alphabet)) : rng.next_unit();
}

// ---------------------------------------------------------------- shape

Shape::Shape(int delta_, int radius_) : delta(delta_), radius(radius_) {
    if (delta < 2) throw validation_error("delta must be >= 2, got " + std::to_string(delta));
    if (radius < 0) throw validation_error("radius must be >= 0, got " + std::to_string(radius));
}

uint64_t Shape::s_len(int s) const {
    uint64_t out = 1;
    for (int t = 0; t < s; ++t) out *= uint64_t(delta - 1);
    return out;
}

uint64_t Shape::flower_len(int r) const {
    uint64_t out = 1;
    for (int s = 1; s <= r; ++s) out += 2 * s_len(s);
    return out;
}

uint64_t Shape::nbhd_len(int r) const {
    uint64_t out = 0;
    for (int s = 1; s <= r; ++s) out += uint64_t(delta) * s_len(s - 1);
    return out;
}

uint64_t Shape::flower_offset(int s, Side v) const {
    uint64_t base = 1;
    for (int t = 1; t < s; ++t) base += 2 * s_len(t);
    return base + (v == Side::B ? s_len(s) : 0);
}

uint64_t Shape::nbhd_offset(int s, int i) const {
    uint64_t base = 0;
    for (int t = 1; t < s; ++t) base += uint64_t(delta) * s_len(t - 1);
    return base + uint64_t(i - 1) * s_len(s - 1);
}

void Flower::validate() const {
    if (labels.size() != shape.flower_len())
        throw structural_error("flower label count " + std::to_string(labels.size()) +
                               " does not match shape length " + std::to_string(shape.flower_len()));
    for (double x : labels)
        if (!model.label_valid(x)) throw structural_error("invalid label value");
}

void Neighborhood::validate() const {
    if (labels.size() != shape.nbhd_len())
        throw structural_error("neighborhood label count " + std::to_string(labels.size()) +
                               " does not match shape length " + std::to_string(shape.nbhd_len()));
    for (double x : labels)
        if (!model.label_valid(x)) throw structural_error("invalid label value");
}

// ---------------------------------------------------------------- permutations

Perm identity_perm(int delta) {
    Perm p(delta);
    for (int i = 0; i < delta; ++i) p[i] = i + 1;
    return p;
}

Perm special_perm(int delta, int i) {
    if (i < 1 || i > delta)
        throw domain_error("special_perm direction " + std::to_string(i) + " out of [1," +
                           std::to_string(delta) + "]");
    Perm p = identity_perm(delta);
    std::swap(p[0], p[i - 1]);
    return p;
}

Perm compose(const Perm& sigma, const Perm& tau) {
    if (sigma.size() != tau.size()) throw structural_error("permutation size mismatch");
    Perm out(sigma.size());
    for (size_t i = 0; i < tau.size(); ++i) out[i] = sigma[tau[i] - 1];
    return out;
}

Perm invert(const Perm& sigma) {
    Perm out(sigma.size());
    for (size_t i = 0; i < sigma.size(); ++i) out[sigma[i] - 1] = int(i) + 1;
    return out;
}

bool is_identity(const Perm& sigma) {
    for (size_t i = 0; i < sigma.size(); ++i)
        if (sigma[i] != int(i) + 1) return false;
    return true;
}

void check_perm(const Perm& sigma, int delta) {
    if (int(sigma.size()) != delta) throw structural_error("permutation size != delta");
    std::vector<char> seen(delta, 0);
    for (int v : sigma) {
        if (v < 1 || v > delta || seen[v - 1]) throw structural_error("not a bijection on [delta]");
        seen[v - 1] = 1;
    }
}

// ---------------------------------------------------------------- operations

Neighborhood shuffle(const Perm& sigma, const Neighborhood& z) {
    z.validate();
    check_perm(sigma, z.shape.delta);
    Neighborhood out{z.shape, z.model, std::vector<double>(z.labels.size())};
    const Shape& sh = z.shape;
    for (int s = 1; s <= sh.radius; ++s) {
        uint64_t ln = sh.s_len(s - 1);
        for (int i = 1; i <= sh.delta; ++i) {
            uint64_t src = sh.nbhd_offset(s, i);
            uint64_t dst = sh.nbhd_offset(s, sigma[i - 1]);
            std::copy_n(z.labels.begin() + src, ln, out.labels.begin() + dst);
        }
    }
    return out;
}

Neighborhood end(Side v, const Flower& w) {
    w.validate();
    const Shape& sh = w.shape;
    int r = sh.radius;
    Neighborhood z{sh, w.model, std::vector<double>(sh.nbhd_len())};
    if (r == 0) return z;
    Side u = other_side(v);
    z.labels[sh.nbhd_offset(1, 1)] = w.labels[0];
    for (int s = 2; s <= r; ++s) {
        uint64_t ln = sh.s_len(s - 1);
        std::copy_n(w.labels.begin() + sh.flower_offset(s - 1, u), ln,
                    z.labels.begin() + sh.nbhd_offset(s, 1));
    }
    for (int s = 1; s <= r; ++s) {
        uint64_t ln = sh.s_len(s - 1);
        for (int i = 1; i <= sh.delta - 1; ++i) {
            uint64_t src = sh.flower_offset(s, v) + uint64_t(i - 1) * ln;
            std::copy_n(w.labels.begin() + src, ln, z.labels.begin() + sh.nbhd_offset(s, i + 1));
        }
    }
    return z;
}

Flower res(int i, const Neighborhood& z) {
    z.validate();
    const Shape& sh = z.shape;
    int r = sh.radius;
    if (r < 1) throw domain_error("res requires radius >= 1");
    if (i < 1 || i > sh.delta) throw domain_error("res direction out of range");
    const Neighborhood zz = (i == 1) ? z : shuffle(special_perm(sh.delta, i), z);
    Shape out_shape = sh.with_radius(r - 1);
    Flower y{out_shape, z.model, std::vector<double>(out_shape.flower_len())};
    y.labels[0] = zz.labels[sh.nbhd_offset(1, 1)];
    for (int s = 1; s <= r - 1; ++s) {
        uint64_t ln = sh.s_len(s);
        std::copy_n(zz.labels.begin() + sh.nbhd_offset(s + 1, 1), ln,
                    y.labels.begin() + out_shape.flower_offset(s, Side::B));
        uint64_t ln2 = sh.s_len(s - 1);
        for (int j = 1; j <= sh.delta - 1; ++j) {
            uint64_t dst = out_shape.flower_offset(s, Side::A) + uint64_t(j - 1) * ln2;
            std::copy_n(zz.labels.begin() + sh.nbhd_offset(s, j + 1), ln2, y.labels.begin() + dst);
        }
    }
    return y;
}

Flower reverse(const Flower& w) {
    w.validate();
    const Shape& sh = w.shape;
    Flower out{sh, w.model, std::vector<double>(w.labels.size())};
    out.labels[0] = w.labels[0];
    for (int s = 1; s <= sh.radius; ++s) {
        uint64_t ln = sh.s_len(s);
        std::copy_n(w.labels.begin() + sh.flower_offset(s, Side::A), ln,
                    out.labels.begin() + sh.flower_offset(s, Side::B));
        std::copy_n(w.labels.begin() + sh.flower_offset(s, Side::B), ln,
                    out.labels.begin() + sh.flower_offset(s, Side::A));
    }
    return out;
}

Neighborhood project(const Neighborhood& z) {
    if (z.shape.radius < 1) throw domain_error("project requires radius >= 1");
    return end(Side::A, res(1, z));
}

Neighborhood glue(const Neighborhood& x, const std::vector<Flower>& parts) {
    x.validate();
    const Shape& xs = x.shape;
    if (int(parts.size()) != xs.delta)
        throw structural_error("glue needs exactly delta parts");
    int r = xs.radius + 1;
    Shape out_shape = xs.with_radius(r);
    for (int i = 1; i <= xs.delta; ++i) {
        const Flower& zi = parts[i - 1];
        if (zi.shape != xs.with_radius(xs.radius) || !(zi.model == x.model))
            throw structural_error("glue part shape/model mismatch in direction " + std::to_string(i));
        Neighborhood want = shuffle(special_perm(xs.delta, i), x);
        if (!(end(Side::A, zi) == want))
            throw constraint_error("glue precondition end_A(z_i) = sigma_i(x) fails in direction " +
                                   std::to_string(i), i);
    }
    Neighborhood y{out_shape, x.model, std::vector<double>(out_shape.nbhd_len())};
    for (int s = 1; s <= r - 1; ++s) {
        uint64_t ln = xs.s_len(s - 1) * uint64_t(xs.delta);
        std::copy_n(x.labels.begin() + xs.nbhd_offset(s, 1), ln,
                    y.labels.begin() + out_shape.nbhd_offset(s, 1));
    }
    uint64_t ln = out_shape.s_len(r - 1);
    for (int i = 1; i <= xs.delta; ++i) {
        const Flower& zi = parts[i - 1];
        uint64_t src = (r >= 2) ? zi.shape.flower_offset(r - 1, Side::B) : 0;
        std::copy_n(zi.labels.begin() + src, ln, y.labels.begin() + out_shape.nbhd_offset(r, i));
    }
    return y;
}

Flower join_flower(const Neighborhood& za, const Neighborhood& zb) {
    za.validate();
    zb.validate();
    if (za.shape != zb.shape || !(za.model == zb.model))
        throw structural_error("join_flower shape/model mismatch");
    const Shape& sh = za.shape;
    int r = sh.radius;
    if (r < 1) throw domain_error("join_flower requires radius >= 1");
    Flower y{sh, za.model, std::vector<double>(sh.flower_len())};
    // end_A(y) = za pins everything except y_{rB}
    y.labels[0] = za.labels[sh.nbhd_offset(1, 1)];
    for (int s = 1; s <= r - 1; ++s) {
        uint64_t ln = sh.s_len(s);
        std::copy_n(za.labels.begin() + sh.nbhd_offset(s + 1, 1), ln,
                    y.labels.begin() + sh.flower_offset(s, Side::B));
    }
    for (int s = 1; s <= r; ++s) {
        uint64_t ln = sh.s_len(s - 1);
        for (int i = 1; i <= sh.delta - 1; ++i)
            std::copy_n(za.labels.begin() + sh.nbhd_offset(s, i + 1), ln,
                        y.labels.begin() + sh.flower_offset(s, Side::A) + uint64_t(i - 1) * ln);
    }
    // y_{rB} comes from zb's outermost row
    uint64_t ln = sh.s_len(r - 1);
    for (int i = 1; i <= sh.delta - 1; ++i)
        std::copy_n(zb.labels.begin() + sh.nbhd_offset(r, i + 1), ln,
                    y.labels.begin() + sh.flower_offset(r, Side::B) + uint64_t(i - 1) * ln);
    if (!(end(Side::B, y) == zb))
        throw structural_error("join_flower inconsistent sides: res_1(zb) != reverse(res_1(za))");
    return y;
}

Flower truncate(const Flower& w, int r2) {
    w.validate();
    const Shape& sh = w.shape;
    if (r2 < 0 || r2 > sh.radius) throw domain_error("truncate radius out of range");
    Shape out_shape = sh.with_radius(r2);
    Flower out{out_shape, w.model, std::vector<double>(out_shape.flower_len())};
    out.labels[0] = w.labels[0];
    for (int s = 1; s <= r2; ++s) {
        uint64_t ln = sh.s_len(s);
        std::copy_n(w.labels.begin() + sh.flower_offset(s, Side::A), ln,
                    out.labels.begin() + out_shape.flower_offset(s, Side::A));
        std::copy_n(w.labels.begin() + sh.flower_offset(s, Side::B), ln,
                    out.labels.begin() + out_shape.flower_offset(s, Side::B));
    }
    return out;
}

uint64_t flower_vertex_count(const Shape& shape) { return shape.flower_len() + 1; }

// ---------------------------------------------------------------- canonical form

namespace {

struct CanonNode {
    double label = 0.0;
    std::vector<CanonNode> children;
    std::vector<double> ser;  // label followed by sorted child serializations
};

CanonNode build_node(const Flower& w, Side v, int s, uint64_t p) {
    const Shape& sh = w.shape;
    CanonNode n;
    n.label = w.labels[sh.flower_offset(s, v) + p];
    if (s < sh.radius) {
        n.children.reserve(sh.delta - 1);
        for (int k = 0; k < sh.delta - 1; ++k)
            n.children.push_back(build_node(w, v, s + 1, p * uint64_t(sh.delta - 1) + k));
    }
    return n;
}

void canonize(CanonNode& n) {
    for (auto& c : n.children) canonize(c);
    std::sort(n.children.begin(), n.children.end(),
              [](const CanonNode& a, const CanonNode& b) { return a.ser < b.ser; });
    n.ser.push_back(n.label);
    for (const auto& c : n.children) n.ser.insert(n.ser.end(), c.ser.begin(), c.ser.end());
}

void emit_node(const CanonNode& n, Flower& w, Side v, int s, uint64_t p) {
    const Shape& sh = w.shape;
    w.labels[sh.flower_offset(s, v) + p] = n.label;
    for (size_t k = 0; k < n.children.size(); ++k)
        emit_node(n.children[k], w, v, s + 1, p * uint64_t(sh.delta - 1) + k);
}

}  // namespace

Flower canonical_form(const Flower& w) {
    w.validate();
    const Shape& sh = w.shape;
    Flower out{sh, w.model, std::vector<double>(w.labels.size())};
    out.labels[0] = w.labels[0];
    if (sh.radius >= 1) {
        for (Side v : {Side::A, Side::B}) {
            std::vector<CanonNode> roots;
            for (int k = 0; k < sh.delta - 1; ++k) {
                CanonNode n = build_node(w, v, 1, uint64_t(k));
                canonize(n);
                roots.push_back(std::move(n));
            }
            std::sort(roots.begin(), roots.end(),
                      [](const CanonNode& a, const CanonNode& b) { return a.ser < b.ser; });
            for (int k = 0; k < sh.delta - 1; ++k) emit_node(roots[k], out, v, 1, uint64_t(k));
        }
    }
    Flower rev = reverse(out);
    return rev.labels < out.labels ? rev : out;
}

// ---------------------------------------------------------------- incidence

namespace {

std::vector<std::vector<double>> direction_columns(const Neighborhood& z) {
    const Shape& sh = z.shape;
    std::vector<std::vector<double>> cols(sh.delta);
    for (int i = 1; i <= sh.delta; ++i)
        for (int s = 1; s <= sh.radius; ++s) {
            uint64_t off = sh.nbhd_offset(s, i);
            cols[i - 1].insert(cols[i - 1].end(), z.labels.begin() + off,
                               z.labels.begin() + off + sh.s_len(s - 1));
        }
    return cols;
}

// Bijection m with cols_y[m(k)-1] == cols_yp[k-1] and m(1) != 1, if one exists.
std::optional<Perm> match_columns(const std::vector<std::vector<double>>& cy,
                                  const std::vector<std::vector<double>>& cyp) {
    int delta = int(cy.size());
    std::map<std::vector<double>, std::vector<int>> groups;  // value -> y positions (1-based)
    for (int i = 0; i < delta; ++i) groups[cy[i]].push_back(i + 1);
    // multiset equality check while peeling yp columns
    std::map<std::vector<double>, std::vector<int>> want;
    for (int k = 0; k < delta; ++k) want[cyp[k]].push_back(k + 1);
    if (groups.size() != want.size()) return std::nullopt;
    for (auto& [val, ys] : groups) {
        auto it = want.find(val);
        if (it == want.end() || it->second.size() != ys.size()) return std::nullopt;
    }
    Perm sigma(delta, 0);
    // Place yp column 1 first: it must not land on y position 1.
    {
        auto& ys = groups[cyp[0]];
        auto pick = std::find_if(ys.begin(), ys.end(), [](int p) { return p != 1; });
        if (pick == ys.end()) return std::nullopt;  // only y position 1 carries this value
        sigma[0] = *pick;
        ys.erase(pick);
    }
    for (int k = 2; k <= delta; ++k) {
        auto& ys = groups[cyp[k - 1]];
        sigma[k - 1] = ys.back();
        ys.pop_back();
    }
    return sigma;
}

}  // namespace

std::optional<IncidenceWitness> incident(const Flower& w, const Flower& wp) {
    w.validate();
    wp.validate();
    if (w.shape != wp.shape || !(w.model == wp.model))
        throw structural_error("incident: shape/model mismatch");
    for (Side v : {Side::A, Side::B}) {
        auto cy = direction_columns(end(v, w));
        for (Side vp : {Side::A, Side::B}) {
            auto cyp = direction_columns(end(vp, wp));
            if (auto sigma = match_columns(cy, cyp))
                return IncidenceWitness{v, vp, *sigma};
        }
    }
    return std::nullopt;
}

// ---------------------------------------------------------------- sampling

Flower sample_uniform_flower(const Shape& shape, const LabelModel& model, Rng& rng) {
    Flower w{shape, model, std::vector<double>(shape.flower_len())};
    for (double& x : w.labels) x = model.sample(rng);
    return w;
}

Neighborhood sample_uniform_neighborhood(const Shape& shape, const LabelModel& model, Rng& rng) {
    Neighborhood z{shape, model, std::vector<double>(shape.nbhd_len())};
    for (double& x : z.labels) x = model.sample(rng);
    return z;
}

namespace {

// Pinned template + free positions for { z : res_i(z) = x }.
std::pair<std::vector<double>, std::vector<uint32_t>> cond_res_template(int i, const Flower& x) {
    x.validate();
    const Shape& xs = x.shape;
    int r = xs.radius + 1;
    Shape zs = xs.with_radius(r);
    if (i < 1 || i > zs.delta) throw domain_error("cond_res direction out of range");
    Neighborhood t{zs, x.model, std::vector<double>(zs.nbhd_len(), 0.0)};
    t.labels[zs.nbhd_offset(1, 1)] = x.labels[0];
    for (int s = 1; s <= r - 1; ++s) {
        uint64_t ln = zs.s_len(s);
        std::copy_n(x.labels.begin() + xs.flower_offset(s, Side::B), ln,
                    t.labels.begin() + zs.nbhd_offset(s + 1, 1));
        uint64_t ln2 = zs.s_len(s - 1);
        for (int j = 1; j <= zs.delta - 1; ++j)
            std::copy_n(x.labels.begin() + xs.flower_offset(s, Side::A) + uint64_t(j - 1) * ln2, ln2,
                        t.labels.begin() + zs.nbhd_offset(s, j + 1));
    }
    Neighborhood zt = (i == 1) ? t : shuffle(special_perm(zs.delta, i), t);
    std::vector<uint32_t> frees;
    for (int j = 1; j <= zs.delta; ++j) {
        if (j == i) continue;
        uint64_t off = zs.nbhd_offset(r, j);
        for (uint64_t k = 0; k < zs.s_len(r - 1); ++k) frees.push_back(uint32_t(off + k));
    }
    return {std::move(zt.labels), std::move(frees)};
}

// Pinned template + free positions for { w : end_v(w) = x }.
std::pair<std::vector<double>, std::vector<uint32_t>> cond_end_template(Side v, const Neighborhood& x) {
    x.validate();
    const Shape& sh = x.shape;
    int r = sh.radius;
    std::vector<double> w(sh.flower_len(), 0.0);
    std::vector<uint32_t> frees;
    if (r == 0) {
        frees.push_back(0);
        return {std::move(w), std::move(frees)};
    }
    w[0] = x.labels[sh.nbhd_offset(1, 1)];
    for (int s = 1; s <= r - 1; ++s) {
        uint64_t ln = sh.s_len(s);
        std::copy_n(x.labels.begin() + sh.nbhd_offset(s + 1, 1), ln,
                    w.begin() + sh.flower_offset(s, Side::B));
    }
    for (int s = 1; s <= r; ++s) {
        uint64_t ln = sh.s_len(s - 1);
        for (int j = 1; j <= sh.delta - 1; ++j)
            std::copy_n(x.labels.begin() + sh.nbhd_offset(s, j + 1), ln,
                        w.begin() + sh.flower_offset(s, Side::A) + uint64_t(j - 1) * ln);
    }
    uint64_t off = sh.flower_offset(r, Side::B);
    for (uint64_t k = 0; k < sh.s_len(r); ++k) frees.push_back(uint32_t(off + k));
    if (v == Side::B) {
        // reverse the template; the free block moves to the A side
        Flower fw{sh, x.model, std::move(w)};
        Flower rev = reverse(fw);
        w = std::move(rev.labels);
        uint64_t aoff = sh.flower_offset(r, Side::A);
        for (size_t k = 0; k < frees.size(); ++k) frees[k] = uint32_t(aoff + k);
    }
    return {std::move(w), std::move(frees)};
}

}  // namespace

Neighborhood sample_cond_res(int i, const Flower& x, Rng& rng) {
    auto [labels, frees] = cond_res_template(i, x);
    for (uint32_t p : frees) labels[p] = x.model.sample(rng);
    return Neighborhood{x.shape.with_radius(x.shape.radius + 1), x.model, std::move(labels)};
}

Flower sample_cond_end(Side v, const Neighborhood& x, Rng& rng) {
    auto [labels, frees] = cond_end_template(v, x);
    for (uint32_t p : frees) labels[p] = x.model.sample(rng);
    return Flower{x.shape, x.model, std::move(labels)};
}

// ---------------------------------------------------------------- enumeration

namespace {
std::atomic<uint64_t> g_budget{0};

uint64_t read_env_budget() {
    if (const char* e = std::getenv("MMLL_BUDGET")) {
        char* endp = nullptr;
        unsigned long long v = std::strtoull(e, &endp, 10);
        if (endp && *endp == '\0' && v > 0) return v;
    }
    return 1ull << 32;
}
}  // namespace

uint64_t state_budget() {
    uint64_t b = g_budget.load(std::memory_order_relaxed);
    if (b == 0) {
        b = read_env_budget();
        g_budget.store(b, std::memory_order_relaxed);
    }
    return b;
}

void set_state_budget(uint64_t budget) { g_budget.store(budget, std::memory_order_relaxed); }

LabelSpace::LabelSpace(Shape shape, LabelModel model, std::vector<double> pinned,
                       std::vector<uint32_t> free_positions, bool flower_kind)
    : shape_(shape),
      model_(model),
      pinned_(std::move(pinned)),
      free_positions_(std::move(free_positions)),
      flower_kind_(flower_kind) {
    if (!model_.is_discrete()) throw domain_error("enumeration requires a discrete label model");
    uint64_t budget = state_budget();
    if (!pow_fits(model_.alphabet, free_positions_.size(), budget, size_)) {
        BigInt exact = big_pow(BigInt(model_.alphabet), unsigned(free_positions_.size()));
        throw capacity_error("state count " + exact.str() + " exceeds budget " +
                                 std::to_string(budget),
                             exact.str());
    }
}

void LabelSpace::decode_into(uint64_t index, std::vector<double>& out) const {
    if (index >= size_) throw domain_error("decode index out of range");
    out = pinned_;
    uint32_t L = model_.alphabet;
    for (size_t k = free_positions_.size(); k-- > 0;) {
        out[free_positions_[k]] = double(index % L);
        index /= L;
    }
}

uint64_t LabelSpace::encode(const std::vector<double>& labels) const {
    if (labels.size() != pinned_.size()) throw structural_error("encode: label count mismatch");
    uint32_t L = model_.alphabet;
    uint64_t v = 0;
    for (uint32_t p : free_positions_) {
        double x = labels[p];
        if (!(x >= 0.0 && x < double(L) && x == std::floor(x)))
            throw structural_error("encode: label not a valid discrete value");
        v = v * L + uint64_t(x);
    }
    return v;
}

Flower LabelSpace::decode_flower(uint64_t index) const {
    if (!flower_kind_) throw structural_error("space does not enumerate flowers");
    Flower w{shape_, model_, {}};
    decode_into(index, w.labels);
    return w;
}

Neighborhood LabelSpace::decode_neighborhood(uint64_t index) const {
    if (flower_kind_) throw structural_error("space does not enumerate neighborhoods");
    Neighborhood z{shape_, model_, {}};
    decode_into(index, z.labels);
    return z;
}

LabelSpace enumerate_flowers(const Shape& shape, const LabelModel& model) {
    std::vector<uint32_t> frees(shape.flower_len());
    for (uint32_t k = 0; k < frees.size(); ++k) frees[k] = k;
    return LabelSpace(shape, model, std::vector<double>(shape.flower_len(), 0.0), std::move(frees),
                      true);
}

LabelSpace enumerate_neighborhoods(const Shape& shape, const LabelModel& model) {
    std::vector<uint32_t> frees(shape.nbhd_len());
    for (uint32_t k = 0; k < frees.size(); ++k) frees[k] = k;
    return LabelSpace(shape, model, std::vector<double>(shape.nbhd_len(), 0.0), std::move(frees),
                      false);
}

LabelSpace enumerate_cond_res(int i, const Flower& x) {
    auto [pinned, frees] = cond_res_template(i, x);
    return LabelSpace(x.shape.with_radius(x.shape.radius + 1), x.model, std::move(pinned),
                      std::move(frees), false);
}

LabelSpace enumerate_cond_end(Side v, const Neighborhood& x) {
    auto [pinned, frees] = cond_end_template(v, x);
    return LabelSpace(x.shape, x.model, std::move(pinned), std::move(frees), true);
}

uint64_t flower_index(const Flower& w) {
    w.validate();
    return enumerate_flowers(w.shape, w.model).encode(w.labels);
}

uint64_t neighborhood_index(const Neighborhood& z) {
    z.validate();
    return enumerate_neighborhoods(z.shape, z.model).encode(z.labels);
}

// ---------------------------------------------------------------- serialization

namespace {

nlohmann::json model_json(const LabelModel& m) {
    if (m.is_discrete()) return nlohmann::json{{"discrete", m.alphabet}};
    return nlohmann::json("continuous");
}

LabelModel model_from_json(const nlohmann::json& j) {
    if (j.is_string() && j.get<std::string>() == "continuous") return LabelModel::continuous();
    if (j.is_object() && j.contains("discrete")) return LabelModel::discrete(j["discrete"].get<uint32_t>());
    throw validation_error("unrecognized label model in JSON");
}

nlohmann::json labels_json(const LabelModel& m, const std::vector<double>& labels) {
    nlohmann::json arr = nlohmann::json::array();
    for (double x : labels) {
        if (m.is_discrete())
            arr.push_back(uint64_t(x));
        else
            arr.push_back(x);
    }
    return arr;
}

template <class T>
std::string value_to_json(const T& v) {
    v.validate();
    nlohmann::json j{{"delta", v.shape.delta},
                     {"radius", v.shape.radius},
                     {"model", model_json(v.model)},
                     {"labels", labels_json(v.model, v.labels)}};
    return j.dump();
}

std::tuple<Shape, LabelModel, std::vector<double>> value_from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    Shape shape(j.at("delta").get<int>(), j.at("radius").get<int>());
    LabelModel model = model_from_json(j.at("model"));
    std::vector<double> labels;
    for (const auto& x : j.at("labels")) labels.push_back(x.get<double>());
    return {shape, model, std::move(labels)};
}

// 16-byte header, all fields little-endian:
// magic "MMLL", u32 L, u16 delta, u16 radius, u8 version, u8 model tag,
// u8 kind (0 flower / 1 neighborhood), u8 pad.
void put_le(std::string& out, uint64_t v, int bytes) {
    for (int b = 0; b < bytes; ++b) out.push_back(char(v >> (8 * b) & 0xff));
}

uint64_t get_le(const char* p, int bytes) {
    uint64_t v = 0;
    for (int b = 0; b < bytes; ++b) v |= uint64_t(uint8_t(p[b])) << (8 * b);
    return v;
}

void write_value(std::ostream& os, const Shape& sh, const LabelModel& m,
                 const std::vector<double>& labels, uint8_t kind) {
    std::string buf = "MMLL";
    put_le(buf, m.is_discrete() ? m.alphabet : 0, 4);
    put_le(buf, uint64_t(sh.delta), 2);
    put_le(buf, uint64_t(sh.radius), 2);
    put_le(buf, 1, 1);
    put_le(buf, m.is_discrete() ? 0 : 1, 1);
    put_le(buf, kind, 1);
    put_le(buf, 0, 1);
    if (m.is_discrete()) {
        for (double x : labels) put_le(buf, uint16_t(x), 2);
    } else {
        for (double x : labels) {
            uint64_t bits;
            std::memcpy(&bits, &x, 8);
            put_le(buf, bits, 8);
        }
    }
    os.write(buf.data(), std::streamsize(buf.size()));
    if (!os) throw validation_error("binary write failed");
}

std::tuple<Shape, LabelModel, std::vector<double>> read_value(std::istream& is, uint8_t want_kind,
                                                              uint64_t want_len_hint) {
    char h[16];
    is.read(h, 16);
    if (!is || std::memcmp(h, "MMLL", 4) != 0) throw validation_error("bad MMLL binary header");
    uint32_t alphabet = uint32_t(get_le(h + 4, 4));
    Shape shape(int(get_le(h + 8, 2)), int(get_le(h + 10, 2)));
    if (get_le(h + 12, 1) != 1) throw validation_error("unsupported MMLL binary version");
    LabelModel model =
        get_le(h + 13, 1) == 0 ? LabelModel::discrete(alphabet) : LabelModel::continuous();
    if (get_le(h + 14, 1) != want_kind)
        throw validation_error("MMLL binary holds a different object kind");
    uint64_t len = want_len_hint;
    std::vector<double> labels(len);
    std::vector<char> payload(len * (model.is_discrete() ? 2 : 8));
    is.read(payload.data(), std::streamsize(payload.size()));
    if (!is) throw validation_error("truncated MMLL binary payload");
    for (uint64_t k = 0; k < len; ++k) {
        if (model.is_discrete()) {
            labels[k] = double(get_le(payload.data() + 2 * k, 2));
        } else {
            uint64_t bits = get_le(payload.data() + 8 * k, 8);
            std::memcpy(&labels[k], &bits, 8);
        }
    }
    return {shape, model, std::move(labels)};
}

}  // namespace

std::string to_json(const Flower& w) { return value_to_json(w); }
std::string to_json(const Neighborhood& z) { return value_to_json(z); }

Flower flower_from_json(const std::string& text) {
    auto [shape, model, labels] = value_from_json(text);
    Flower w{shape, model, std::move(labels)};
    w.validate();
    return w;
}

Neighborhood neighborhood_from_json(const std::string& text) {
    auto [shape, model, labels] = value_from_json(text);
    Neighborhood z{shape, model, std::move(labels)};
    z.validate();
    return z;
}

void write_binary(std::ostream& os, const Flower& w) {
    w.validate();
    write_value(os, w.shape, w.model, w.labels, 0);
}

void write_binary(std::ostream& os, const Neighborhood& z) {
    z.validate();
    write_value(os, z.shape, z.model, z.labels, 1);
}

Flower read_binary_flower(std::istream& is) {
    // peek the header to learn the payload length
    auto pos = is.tellg();
    char h[16];
    is.read(h, 16);
    if (!is || std::memcmp(h, "MMLL", 4) != 0) throw validation_error("bad MMLL binary header");
    is.seekg(pos);
    Shape shape(int(get_le(h + 8, 2)), int(get_le(h + 10, 2)));
    auto [sh, model, labels] = read_value(is, 0, shape.flower_len());
    Flower w{sh, model, std::move(labels)};
    w.validate();
    return w;
}

Neighborhood read_binary_neighborhood(std::istream& is) {
    auto pos = is.tellg();
    char h[16];
    is.read(h, 16);
    if (!is || std::memcmp(h, "MMLL", 4) != 0) throw validation_error("bad MMLL binary header");
    is.seekg(pos);
    Shape shape(int(get_le(h + 8, 2)), int(get_le(h + 10, 2)));
    auto [sh, model, labels] = read_value(is, 1, shape.nbhd_len());
    Neighborhood z{sh, model, std::move(labels)};
    z.validate();
    return z;
}

}  // namespace mmll
