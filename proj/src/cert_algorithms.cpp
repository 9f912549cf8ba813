#include "mmll/cert_algorithms.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>

#include "mmll/parallel.hpp"
#include "json.hpp"

namespace mmll {

std::string to_string(CertifiedStatus s) {
    switch (s) {
        case CertifiedStatus::asserted: return "asserted";
        case CertifiedStatus::verified_sampled: return "verified_sampled";
        case CertifiedStatus::verified_exhaustive: return "verified_exhaustive";
    }
    return "asserted";
}

CertifiedStatus certified_status_from_string(const std::string& s) {
    if (s == "verified_exhaustive") return CertifiedStatus::verified_exhaustive;
    if (s == "verified_sampled") return CertifiedStatus::verified_sampled;
    return CertifiedStatus::asserted;
}

int CertifiedAlgorithm::eval(const Flower& w) const {
    if (w.shape != shape || !(w.model == model))
        throw structural_error("eval: flower shape/model does not match the algorithm");
    switch (body) {
        case BodyKind::builtin_zero:
            return 0;
        case BodyKind::builtin_greedy: {
            double c = w.labels[0];
            for (size_t k = 1; k < w.labels.size(); ++k)
                if (!(c < w.labels[k])) return 0;  // ties decline
            return 1;
        }
        case BodyKind::table:
            return table[flower_index(w)];
        case BodyKind::wrapped:
            return wrapped(w) ? 1 : 0;
    }
    return 0;
}

CertifiedAlgorithm CertifiedAlgorithm::constant_zero(const Shape& shape, const LabelModel& model) {
    CertifiedAlgorithm f;
    f.shape = shape;
    f.model = model;
    f.body = BodyKind::builtin_zero;
    f.status = CertifiedStatus::verified_exhaustive;  // vacuous
    f.provenance = "constant_zero";
    return f;
}

CertifiedAlgorithm CertifiedAlgorithm::greedy_min_label(const Shape& shape,
                                                        const LabelModel& model) {
    if (shape.radius != 1) throw domain_error("greedy_min_label requires radius 1");
    CertifiedAlgorithm f;
    f.shape = shape;
    f.model = model;
    f.body = BodyKind::builtin_greedy;
    f.provenance = "greedy_min_label";
    return f;
}

CertifiedAlgorithm CertifiedAlgorithm::from_table(const Shape& shape, uint32_t L,
                                                  std::vector<uint8_t> bits,
                                                  std::string provenance) {
    LabelModel model = LabelModel::discrete(L);
    uint64_t want = enumerate_flowers(shape, model).size();
    if (bits.size() != want)
        throw structural_error("table length " + std::to_string(bits.size()) +
                               " != L^flower_len = " + std::to_string(want));
    CertifiedAlgorithm f;
    f.shape = shape;
    f.model = model;
    f.body = BodyKind::table;
    f.table = std::move(bits);
    f.provenance = std::move(provenance);
    return f;
}

CertifiedAlgorithm CertifiedAlgorithm::lift(const CertifiedAlgorithm& f, int radius) {
    if (radius < f.shape.radius) throw domain_error("lift target radius below source radius");
    auto inner = std::make_shared<CertifiedAlgorithm>(f);
    CertifiedAlgorithm out;
    out.shape = f.shape.with_radius(radius);
    out.model = f.model;
    out.body = BodyKind::wrapped;
    out.wrapped = [inner](const Flower& w) { return inner->eval(truncate(w, inner->shape.radius)); };
    out.status = f.status;  // truncation preserves incidence, so certification carries over
    out.provenance = "lift(" + f.provenance + ")";
    return out;
}

CertifiedAlgorithm CertifiedAlgorithm::to_table() const {
    if (!model.is_discrete()) throw domain_error("to_table requires a discrete model");
    auto space = enumerate_flowers(shape, model);
    std::vector<uint8_t> bits(space.size());
    for (uint64_t i = 0; i < space.size(); ++i) bits[i] = uint8_t(eval(space.decode_flower(i)));
    auto out = from_table(shape, model.alphabet, std::move(bits), "table(" + provenance + ")");
    out.status = status;
    out.verified_trials = verified_trials;
    return out;
}

// ---------------------------------------------------------------- verification

namespace {

std::vector<std::vector<double>> endpoint_columns(const Flower& w, Side v) {
    Neighborhood z = end(v, w);
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

// A pair of column vectors admits a sigma with sigma(1) != 1 iff they agree as
// multisets and column 1's value is not pinned uniquely to position 1 on both.
bool columns_admit_witness(const std::vector<std::vector<double>>& cy,
                           const std::vector<std::vector<double>>& cyp) {
    auto sy = cy, syp = cyp;
    std::sort(sy.begin(), sy.end());
    std::sort(syp.begin(), syp.end());
    if (sy != syp) return false;
    if (cy[0] != cyp[0]) return true;
    return std::count(cy.begin(), cy.end(), cyp[0]) >= 2;
}

}  // namespace

VerifyReport verify_matching_certified(const CertifiedAlgorithm& f, int workers) {
    if (!f.model.is_discrete())
        throw domain_error("exhaustive verification requires a discrete model");
    auto space = enumerate_flowers(f.shape, f.model);
    VerifyReport report;

    // collect accepting flowers
    std::vector<uint64_t> accepted = parallel_reduce<std::vector<uint64_t>>(
        space.size(), workers, {},
        [&](uint64_t b, uint64_t e) {
            std::vector<uint64_t> acc;
            for (uint64_t i = b; i < e; ++i)
                if (f.eval(space.decode_flower(i))) acc.push_back(i);
            return acc;
        },
        [](std::vector<uint64_t> a, std::vector<uint64_t> b) {
            a.insert(a.end(), b.begin(), b.end());
            return a;
        });
    report.accepted = accepted.size();

    struct Entry {
        uint64_t idx;
        Side v;
        std::vector<std::vector<double>> cols;
    };
    std::map<std::vector<double>, std::vector<Entry>> buckets;
    for (uint64_t i : accepted) {
        Flower w = space.decode_flower(i);
        for (Side v : {Side::A, Side::B}) {
            Entry e{i, v, endpoint_columns(w, v)};
            std::vector<std::vector<double>> sorted = e.cols;
            std::sort(sorted.begin(), sorted.end());
            std::vector<double> key;
            for (auto& c : sorted) {
                key.insert(key.end(), c.begin(), c.end());
                key.push_back(-1.0);  // separator outside the label range
            }
            buckets[key].push_back(std::move(e));
        }
    }
    for (auto& [key, entries] : buckets) {
        for (size_t a = 0; a < entries.size(); ++a) {
            for (size_t b = a; b < entries.size(); ++b) {
                report.pairs_checked++;
                if (!columns_admit_witness(entries[a].cols, entries[b].cols)) continue;
                Flower w = space.decode_flower(entries[a].idx);
                Flower wp = space.decode_flower(entries[b].idx);
                auto wit = incident(w, wp);
                if (!wit) continue;  // multiset matched but no valid sigma in this orientation pair
                report.ok = false;
                report.violation = IncidenceViolation{w, wp, *wit};
                return report;
            }
        }
    }
    report.ok = true;
    report.achieved = CertifiedStatus::verified_exhaustive;
    return report;
}

VerifyReport verify_matching_certified_sampled(const CertifiedAlgorithm& f, uint64_t trials,
                                               Rng rng) {
    VerifyReport report;
    report.trials = trials;
    int delta = f.shape.delta;
    for (uint64_t t = 0; t < trials; ++t) {
        Rng sub = rng.substream(t);
        auto yp = sample_uniform_neighborhood(f.shape, f.model, sub);
        Perm sigma = identity_perm(delta);
        do {
            for (int k = delta - 1; k > 0; --k)
                std::swap(sigma[k], sigma[sub.next_below(uint32_t(k + 1))]);
        } while (sigma[0] == 1);
        auto y = shuffle(sigma, yp);
        Flower w = sample_cond_end(Side::A, y, sub);
        Flower wp = sample_cond_end(Side::A, yp, sub);
        if (sub.next_below(2)) w = reverse(w);
        if (sub.next_below(2)) wp = reverse(wp);
        report.pairs_checked++;
        if (f.eval(w) && f.eval(wp)) {
            auto wit = incident(w, wp);
            report.ok = false;
            report.violation = IncidenceViolation{w, wp, wit ? *wit : IncidenceWitness{}};
            return report;
        }
    }
    report.ok = true;
    report.achieved = CertifiedStatus::verified_sampled;
    return report;
}

CertifiedAlgorithm verified(CertifiedAlgorithm f) {
    auto report = verify_matching_certified(f);
    if (!report.ok) throw validation_error("algorithm is not matching-certified");
    f.status = CertifiedStatus::verified_exhaustive;
    return f;
}

std::vector<std::vector<uint8_t>> enumerate_certified_tables(const Shape& shape,
                                                             const LabelModel& model) {
    auto space = enumerate_flowers(shape, model);
    if (space.size() > 24)
        throw capacity_error("certified-table scan over 2^" + std::to_string(space.size()) +
                                 " tables is out of budget",
                             big_pow(BigInt(2), unsigned(space.size())).str());
    uint64_t n = space.size();
    // incidence matrix over flowers (includes self-incidence)
    std::vector<std::vector<char>> inc(n, std::vector<char>(n, 0));
    for (uint64_t i = 0; i < n; ++i)
        for (uint64_t j = i; j < n; ++j) {
            bool v = incident(space.decode_flower(i), space.decode_flower(j)).has_value();
            inc[i][j] = inc[j][i] = char(v);
        }
    std::vector<std::vector<uint8_t>> out;
    for (uint64_t mask = 0; mask < (1ull << n); ++mask) {
        bool ok = true;
        for (uint64_t i = 0; ok && i < n; ++i) {
            if (!(mask >> i & 1)) continue;
            for (uint64_t j = i; j < n; ++j)
                if ((mask >> j & 1) && inc[i][j]) {
                    ok = false;
                    break;
                }
        }
        if (!ok) continue;
        std::vector<uint8_t> bits(n);
        for (uint64_t i = 0; i < n; ++i) bits[i] = uint8_t(mask >> i & 1);
        out.push_back(std::move(bits));
    }
    return out;
}

// ---------------------------------------------------------------- survival

SurvivalEstimate survival_probability_exact(const CertifiedAlgorithm& f, int workers) {
    if (!f.model.is_discrete()) throw domain_error("exact survival requires a discrete model");
    Shape zs = f.shape.with_radius(f.shape.radius + 1);
    auto space = enumerate_neighborhoods(zs, f.model);
    // table evaluation is much cheaper inside the scan
    const CertifiedAlgorithm ft = (f.body == CertifiedAlgorithm::BodyKind::table) ? f : f.to_table();
    uint64_t survivors = parallel_reduce<uint64_t>(
        space.size(), workers, 0,
        [&](uint64_t b, uint64_t e) {
            uint64_t c = 0;
            for (uint64_t i = b; i < e; ++i) {
                auto z = space.decode_neighborhood(i);
                bool surv = true;
                for (int dir = 1; surv && dir <= zs.delta; ++dir)
                    surv = ft.eval(res(dir, z)) == 0;
                c += surv;
            }
            return c;
        },
        [](uint64_t a, uint64_t b) { return a + b; });
    SurvivalEstimate est;
    est.exact = true;
    uint64_t g = std::__gcd(survivors, space.size());
    est.num = survivors / g;
    est.den = space.size() / g;
    est.value = double(survivors) / double(space.size());
    return est;
}

SurvivalEstimate survival_probability_mc(const CertifiedAlgorithm& f, uint64_t trials, Rng rng,
                                         int workers) {
    Shape zs = f.shape.with_radius(f.shape.radius + 1);
    uint64_t survivors = parallel_reduce<uint64_t>(
        trials, workers, 0,
        [&](uint64_t b, uint64_t e) {
            uint64_t c = 0;
            for (uint64_t t = b; t < e; ++t) {
                Rng sub = rng.substream(t);
                auto z = sample_uniform_neighborhood(zs, f.model, sub);
                bool surv = true;
                for (int dir = 1; surv && dir <= zs.delta; ++dir)
                    surv = f.eval(res(dir, z)) == 0;
                c += surv;
            }
            return c;
        },
        [](uint64_t a, uint64_t b) { return a + b; });
    SurvivalEstimate est;
    est.trials = trials;
    est.value = double(survivors) / double(trials);
    est.half_width_95 = 1.96 * std::sqrt(est.value * (1.0 - est.value) / double(trials));
    return est;
}

// ---------------------------------------------------------------- LOCAL wrap

namespace {

// 53 fractional bits of a label: discrete v -> v/L, continuous x -> x.
uint64_t label_fraction_bits(double label, const LabelModel& model) {
    double frac = model.is_discrete() ? label / double(model.alphabet) : label;
    return uint64_t(frac * 9007199254740992.0);  // 2^53
}

VertexId id_from_labels(const std::vector<double>& labels, const LabelModel& model,
                        unsigned bits) {
    bits = std::min(bits, 128u);
    VertexId id = 0;
    size_t k = labels.size();
    for (unsigned j = 0; j < bits; ++j) {
        uint64_t tape = label_fraction_bits(labels[j % k], model);
        unsigned pos = j / unsigned(k);
        uint64_t bit = (pos < 53) ? (tape >> (52 - pos)) & 1 : 0;
        id = (id << 1) | bit;
    }
    return id;
}

}  // namespace

std::vector<VertexId> view_vertex_ids(const Flower& w, uint64_t n) {
    const Shape& sh = w.shape;
    unsigned bits = unsigned(std::ceil(10.0 * std::log2(double(std::max<uint64_t>(n, 2)))));
    uint64_t nv = flower_vertex_count(sh);
    std::vector<std::vector<double>> visible(nv);
    // vertex order: A=0, B=1, then side A's branch vertices in flat order per
    // depth, then side B's. A vertex at depth s (1..r), side v, flat index p
    // has id 2 + [v==B]*inner + offset(s) + p, inner = (flower_len-1)/2.
    uint64_t inner = (sh.flower_len() - 1) / 2;
    auto vertex_id = [&](Side v, int s, uint64_t p) {
        uint64_t off = 0;
        for (int t = 1; t < s; ++t) off += sh.s_len(t);
        return 2 + (v == Side::B ? inner : 0) + off + p;
    };
    visible[0].push_back(w.labels[0]);
    visible[1].push_back(w.labels[0]);
    for (Side v : {Side::A, Side::B}) {
        uint64_t endpoint = (v == Side::A) ? 0 : 1;
        for (int s = 1; s <= sh.radius; ++s) {
            uint64_t off = sh.flower_offset(s, v);
            for (uint64_t p = 0; p < sh.s_len(s); ++p) {
                double lab = w.labels[off + p];
                uint64_t child = vertex_id(v, s, p);
                uint64_t parent = (s == 1) ? endpoint : vertex_id(v, s - 1, p / uint64_t(sh.delta - 1));
                visible[parent].push_back(lab);
                visible[child].push_back(lab);
            }
        }
    }
    std::vector<VertexId> ids(nv);
    for (uint64_t vtx = 0; vtx < nv; ++vtx) ids[vtx] = id_from_labels(visible[vtx], w.model, bits);
    return ids;
}

CertifiedAlgorithm certify_local(const LocalProcedure& A, const LabelModel& model, int delta,
                                 uint64_t n) {
    Shape out_shape(delta, A.radius + 1);
    auto proc = std::make_shared<LocalProcedure>(A);
    CertifiedAlgorithm f;
    f.shape = out_shape;
    f.model = model;
    f.body = CertifiedAlgorithm::BodyKind::wrapped;
    f.provenance = "certify_local(" + A.name + ")";
    f.wrapped = [proc, n](const Flower& w) -> int {
        auto decide = [&](const Flower& sub) {
            Flower c = canonical_form(sub);
            return proc->decide(c, view_vertex_ids(c, n));
        };
        Neighborhood za = end(Side::A, w);
        if (!decide(res(1, za))) return 0;  // res_1(end_A(w)) is the center sub-flower
        for (Side v : {Side::A, Side::B}) {
            Neighborhood z = (v == Side::A) ? za : end(Side::B, w);
            for (int k = 2; k <= w.shape.delta; ++k)
                if (decide(res(k, z))) return 0;  // incident edge also selected: delete
        }
        return 1;
    };
    return f;
}

// ---------------------------------------------------------------- table files

namespace {
// 16-byte little-endian header: magic "MMCA", u32 L, u16 delta, u16 radius,
// u8 version, 3 pad bytes; then the packed bit vector, LSB-first per byte.
void put_le(std::string& out, uint64_t v, int bytes) {
    for (int b = 0; b < bytes; ++b) out.push_back(char(v >> (8 * b) & 0xff));
}
uint64_t get_le(const char* p, int bytes) {
    uint64_t v = 0;
    for (int b = 0; b < bytes; ++b) v |= uint64_t(uint8_t(p[b])) << (8 * b);
    return v;
}
}  // namespace

void write_table_file(const std::string& path, const CertifiedAlgorithm& algo) {
    CertifiedAlgorithm t = algo.body == CertifiedAlgorithm::BodyKind::table ? algo : algo.to_table();
    std::ofstream os(path, std::ios::binary);
    if (!os) throw validation_error("cannot open table file for writing: " + path);
    std::string head = "MMCA";
    put_le(head, t.model.alphabet, 4);
    put_le(head, uint64_t(t.shape.delta), 2);
    put_le(head, uint64_t(t.shape.radius), 2);
    put_le(head, 1, 1);
    put_le(head, 0, 3);
    os.write(head.data(), std::streamsize(head.size()));
    std::vector<uint8_t> packed((t.table.size() + 7) / 8, 0);
    for (size_t i = 0; i < t.table.size(); ++i)
        if (t.table[i]) packed[i / 8] |= uint8_t(1u << (i % 8));
    os.write(reinterpret_cast<const char*>(packed.data()), std::streamsize(packed.size()));
    if (!os) throw validation_error("table write failed: " + path);

    nlohmann::json manifest{{"certified_status", to_string(t.status)},
                            {"provenance", t.provenance},
                            {"delta", t.shape.delta},
                            {"radius", t.shape.radius},
                            {"L", t.model.alphabet},
                            {"bits", t.table.size()},
                            {"verified_trials", t.verified_trials}};
    std::ofstream ms(path + ".json");
    ms << manifest.dump(2) << "\n";
}

CertifiedAlgorithm read_table_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw validation_error("cannot open table file: " + path);
    char h[16];
    is.read(h, 16);
    if (!is || std::memcmp(h, "MMCA", 4) != 0)
        throw validation_error("bad MMCA table header in " + path);
    Shape shape(int(get_le(h + 8, 2)), int(get_le(h + 10, 2)));
    if (get_le(h + 12, 1) != 1) throw validation_error("unsupported MMCA version in " + path);
    LabelModel model = LabelModel::discrete(uint32_t(get_le(h + 4, 4)));
    uint64_t bits = enumerate_flowers(shape, model).size();
    std::vector<uint8_t> packed((bits + 7) / 8);
    is.read(reinterpret_cast<char*>(packed.data()), std::streamsize(packed.size()));
    if (!is) throw validation_error("truncated MMCA table payload in " + path);
    std::vector<uint8_t> out(bits);
    for (uint64_t i = 0; i < bits; ++i) out[i] = (packed[i / 8] >> (i % 8)) & 1;
    auto algo = CertifiedAlgorithm::from_table(shape, model.alphabet, std::move(out), "file:" + path);
    std::ifstream ms(path + ".json");
    if (ms) {
        nlohmann::json manifest = nlohmann::json::parse(ms, nullptr, false);
        if (!manifest.is_discarded()) {
            if (manifest.contains("certified_status"))
                algo.status =
                    certified_status_from_string(manifest["certified_status"].get<std::string>());
            if (manifest.contains("provenance"))
                algo.provenance = manifest["provenance"].get<std::string>();
        }
    }
    return algo;
}

}  // namespace mmll
