#include "mmll/round_elim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <sstream>

#include "mmll/parallel.hpp"
#include "json.hpp"

namespace mmll {

BigInt Constants::C1_exact() { return big_pow(BigInt(10), 80); }
long double Constants::C5() { return std::exp(-3.0L) / 1000.0L; }
long double Constants::C10() { return 1.0L / (1200.0L * std::exp(4.0L)); }
long double Constants::C11() { return 168.0L * 10000.0L * std::exp(4.0L); }
long double Constants::F1(long double delta) { return 6.0L * std::exp(4.0L) * delta; }

namespace {
std::atomic<uint64_t> g_dir_violations{0};
}

uint64_t dir_violation_count() { return g_dir_violations.load(); }

// ---------------------------------------------------------------- dir / Q

int dir(const CertifiedAlgorithm& f, const Neighborhood& y) {
    if (y.shape != f.shape || !(y.model == f.model))
        throw structural_error("dir: neighborhood shape/model mismatch");
    int found = 0;
    for (int i = 1; i <= f.shape.delta; ++i) {
        auto space = enumerate_cond_end(Side::A, shuffle(special_perm(f.shape.delta, i), y));
        bool accepting = false;
        for (uint64_t k = 0; !accepting && k < space.size(); ++k)
            accepting = f.eval(space.decode_flower(k)) != 0;
        if (!accepting) continue;
        if (found) {
            g_dir_violations.fetch_add(1);
            throw domain_error("dir exclusivity violated: directions " + std::to_string(found) +
                               " and " + std::to_string(i) + " both accept");
        }
        found = i;
    }
    return found;
}

int dir_sampled(const CertifiedAlgorithm& f, const Neighborhood& y, uint64_t trials, Rng rng) {
    int found = 0;
    for (int i = 1; i <= f.shape.delta; ++i) {
        Neighborhood target = shuffle(special_perm(f.shape.delta, i), y);
        bool accepting = false;
        for (uint64_t t = 0; !accepting && t < trials; ++t)
            accepting = f.eval(sample_cond_end(Side::A, target, rng)) != 0;
        if (!accepting) continue;
        if (found) {
            g_dir_violations.fetch_add(1);
            throw domain_error("dir exclusivity violated (sampled)");
        }
        found = i;
    }
    return found;
}

Rat q_value(const CertifiedAlgorithm& f, const Flower& x) {
    if (x.shape.radius != f.shape.radius - 1)
        throw structural_error("q_value: flower radius must be algorithm radius - 1");
    auto space = enumerate_cond_res(1, x);
    uint64_t hits = 0;
    for (uint64_t k = 0; k < space.size(); ++k)
        hits += dir(f, space.decode_neighborhood(k)) == 1;
    return Rat(hits, space.size());
}

double q_value_mc(const CertifiedAlgorithm& f, const Flower& x, uint64_t outer_trials,
                  uint64_t dir_trials, Rng rng) {
    uint64_t hits = 0;
    for (uint64_t t = 0; t < outer_trials; ++t) {
        Rng sub = rng.substream(t);
        auto z = sample_cond_res(1, x, sub);
        hits += dir_sampled(f, z, dir_trials, sub) == 1;
    }
    return double(hits) / double(outer_trials);
}

Rat goodness_threshold(const CertifiedAlgorithm& f, const Flower& x) {
    Rat qa = q_value(f, x);
    Rat qb = q_value(f, reverse(x));
    return Rat(1) - std::min(qa, qb);
}

bool is_good(const CertifiedAlgorithm& f, const Flower& x, double delta) {
    return goodness_threshold(f, x) <= Rat(delta);
}

// ---------------------------------------------------------------- context

namespace {

// Memoized per-algorithm exact tables over F_{r-1} and R_{r-1}.
struct Ctx {
    CertifiedAlgorithm ftab;
    Shape xf;  // radius r-1
    std::vector<Rat> q;        // per F_{r-1} canonical index
    std::vector<Rat> t;        // goodness thresholds
    uint64_t flower_count = 0;

    explicit Ctx(const CertifiedAlgorithm& f, int workers) : xf(f.shape.with_radius(f.shape.radius - 1)) {
        if (!f.model.is_discrete()) throw domain_error("exact round elimination requires discrete mode");
        if (f.shape.radius < 1) throw domain_error("round elimination requires radius >= 1");
        ftab = f.body == CertifiedAlgorithm::BodyKind::table ? f : f.to_table();
        auto space = enumerate_flowers(xf, f.model);
        flower_count = space.size();
        q.resize(flower_count);
        parallel_for(flower_count, workers, [&](uint64_t b, uint64_t e) {
            for (uint64_t i = b; i < e; ++i) q[i] = q_value(ftab, space.decode_flower(i));
        });
        t.resize(flower_count);
        for (uint64_t i = 0; i < flower_count; ++i) {
            uint64_t ri = flower_index(reverse(space.decode_flower(i)));
            t[i] = Rat(1) - std::min(q[i], q[ri]);
        }
    }

    // Sorted goodness thresholds of the direction-i extensions of x.
    std::vector<Rat> extension_thresholds(const Neighborhood& x, int i) const {
        auto space = enumerate_cond_end(Side::A, shuffle(special_perm(xf.delta, i), x));
        std::vector<Rat> out(space.size());
        for (uint64_t k = 0; k < space.size(); ++k) out[k] = t[flower_index(space.decode_flower(k))];
        std::sort(out.begin(), out.end());
        return out;
    }

    ExtensionProfile profile(const Neighborhood& x, const Rat& delta) const {
        ExtensionProfile pr;
        pr.total = 0;
        for (int i = 1; i <= xf.delta; ++i) {
            auto ts = extension_thresholds(x, i);
            uint64_t good = uint64_t(std::upper_bound(ts.begin(), ts.end(), delta) - ts.begin());
            pr.p.push_back(Rat(good, ts.size()));
            pr.total += pr.p.back();
        }
        pr.p_max = *std::max_element(pr.p.begin(), pr.p.end());
        int argmax = 0, count = 0;
        for (int i = 0; i < xf.delta; ++i)
            if (pr.p[i] == pr.p_max) {
                argmax = i + 1;
                ++count;
            }
        pr.i_max = (count == 1) ? argmax : 0;
        pr.comp = pr.total - pr.p_max;
        return pr;
    }

    Rat delta_dom(const Neighborhood& x) const {
        std::vector<std::vector<Rat>> ts;
        std::vector<Rat> candidates{Rat(0)};
        for (int i = 1; i <= xf.delta; ++i) {
            ts.push_back(extension_thresholds(x, i));
            candidates.insert(candidates.end(), ts.back().begin(), ts.back().end());
        }
        std::sort(candidates.begin(), candidates.end());
        candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
        const Rat c4 = Constants::C4();
        for (const Rat& cand : candidates) {
            for (auto& tvec : ts) {
                uint64_t good = uint64_t(std::upper_bound(tvec.begin(), tvec.end(), cand) - tvec.begin());
                if (Rat(good, tvec.size()) >= c4) return cand;
            }
        }
        return Rat(1);  // P_max(1) = 1 always qualifies
    }
};

}  // namespace

ExtensionProfile extension_profile(const CertifiedAlgorithm& f, const Neighborhood& x,
                                   double delta) {
    if (x.shape.radius != f.shape.radius - 1)
        throw structural_error("extension_profile: neighborhood radius must be radius - 1");
    Ctx ctx(f, 1);
    return ctx.profile(x, Rat(delta));
}

double delta_dom(const CertifiedAlgorithm& f, const Neighborhood& x,
                 const std::vector<double>& grid) {
    Ctx ctx(f, 1);
    std::vector<double> g = grid;
    g.push_back(0.0);
    g.push_back(1.0);
    std::sort(g.begin(), g.end());
    g.erase(std::unique(g.begin(), g.end()), g.end());
    const Rat c4 = Constants::C4();
    for (double d : g)
        if (ctx.profile(x, Rat(d)).p_max >= c4) return d;
    return 1.0;
}

Rat delta_dom_exact(const CertifiedAlgorithm& f, const Neighborhood& x) {
    Ctx ctx(f, 1);
    return ctx.delta_dom(x);
}

std::vector<double> default_delta_grid() {
    std::vector<double> g{0.0, 1.0, 0.5, double(Constants::C5()), double(Constants::C10())};
    for (int k = 20; k >= 1; --k) g.push_back(std::ldexp(1.0, -k));
    std::sort(g.begin(), g.end());
    g.erase(std::unique(g.begin(), g.end()), g.end());
    return g;
}

// ---------------------------------------------------------------- eliminate

EliminateResult eliminate(const CertifiedAlgorithm& f, double c5_override, int workers) {
    double c5 = double(Constants::C5());
    if (c5_override > 0.0) {
        if (c5_override > 1.0) throw validation_error("c5 override must lie in (0, 1]");
        c5 = c5_override;
    }
    Ctx ctx(f, workers);
    Rat c5r(c5);

    EliminateResult result;
    result.c5_used = c5;
    result.good_bitmap.resize(ctx.flower_count);
    for (uint64_t i = 0; i < ctx.flower_count; ++i) result.good_bitmap[i] = ctx.t[i] <= c5r;

    auto nspace = enumerate_neighborhoods(ctx.xf, f.model);
    std::vector<int> imax(nspace.size());
    result.profiles.resize(nspace.size());
    parallel_for(nspace.size(), workers, [&](uint64_t b, uint64_t e) {
        for (uint64_t i = b; i < e; ++i) {
            result.profiles[i] = ctx.profile(nspace.decode_neighborhood(i), c5r);
            imax[i] = result.profiles[i].i_max;
        }
    });

    auto fspace = enumerate_flowers(ctx.xf, f.model);
    std::vector<uint8_t> bits(fspace.size());
    for (uint64_t i = 0; i < fspace.size(); ++i) {
        if (!result.good_bitmap[i]) continue;
        Flower y = fspace.decode_flower(i);
        uint64_t na = neighborhood_index(end(Side::A, y));
        uint64_t nb = neighborhood_index(end(Side::B, y));
        bits[i] = (imax[na] == 1 && imax[nb] == 1) ? 1 : 0;
    }
    result.g = CertifiedAlgorithm::from_table(ctx.xf, f.model.alphabet, std::move(bits),
                                              "eliminate(" + f.provenance + ")");
    return result;
}

// ---------------------------------------------------------------- audit

void AuditReport::add(AuditEntry e) {
    all_pass = all_pass && e.pass;
    entries.push_back(std::move(e));
}

namespace {

std::string fmt_delta(double d) {
    std::ostringstream os;
    os.precision(6);
    os << d;
    return os.str();
}

AuditEntry exact_entry(std::string id, const std::string& rel, const Rat& lhs, const Rat& rhs,
                       std::string notes = "") {
    AuditEntry e;
    e.id = std::move(id);
    e.relation = rel;
    e.lhs = to_ld(lhs);
    e.rhs = to_ld(rhs);
    e.pass = rel == "<=" ? lhs <= rhs : lhs >= rhs;
    e.method = "exact";
    e.notes = std::move(notes);
    return e;
}

AuditEntry closed_form_entry(std::string id, const std::string& rel, long double lhs,
                             long double rhs, std::string notes = "") {
    AuditEntry e;
    e.id = std::move(id);
    e.relation = rel;
    e.lhs = lhs;
    e.rhs = rhs;
    e.pass = rel == "<=" ? lhs <= rhs : lhs >= rhs;
    e.method = "exact-vs-closed-form";
    e.notes = std::move(notes);
    return e;
}

}  // namespace

AuditReport audit(const CertifiedAlgorithm& f, const std::vector<double>& delta_grid,
                  int workers) {
    Ctx ctx(f, workers);
    AuditReport report;
    const int delta = f.shape.delta;
    const Rat pf = survival_probability_exact(ctx.ftab, workers).exact_value();
    report.p_f = pf;

    std::vector<double> grid = delta_grid;
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

    auto fspace = enumerate_flowers(ctx.xf, f.model);

    // (a) E[Q] <= 1/delta
    Rat eq = 0;
    for (const Rat& v : ctx.q) eq += v;
    eq /= ctx.flower_count;
    report.add(exact_entry("a.one-side", "<=", eq, Rat(1, delta)));

    // (b) E[Q(x) Q(xbar)] >= (1 - P_f)/delta
    Rat eqq = 0;
    for (uint64_t i = 0; i < ctx.flower_count; ++i) {
        uint64_t ri = flower_index(reverse(fspace.decode_flower(i)));
        eqq += ctx.q[i] * ctx.q[ri];
    }
    eqq /= ctx.flower_count;
    report.add(exact_entry("b.two-side", ">=", eqq, (Rat(1) - pf) / delta));

    // (c) good mass at each grid delta
    for (double d : grid) {
        if (d <= 0.0) continue;
        Rat dr(d);
        uint64_t good = 0;
        for (const Rat& tv : ctx.t) good += tv <= dr;
        report.add(exact_entry("c.flower-high-weak[d=" + fmt_delta(d) + "]", ">=",
                               Rat(good, ctx.flower_count), (Rat(1) - Rat(2) * pf / dr) / delta));
    }

    // (d) averaged good mass over tau ~ U[0, xi]; closed form E[max(xi-t,0)]/xi
    for (double x : grid) {
        if (x <= 0.0 || x >= 1.0) continue;
        Rat xr(x);
        Rat acc = 0;
        for (const Rat& tv : ctx.t)
            if (tv < xr) acc += xr - tv;
        Rat lhs = acc / (xr * ctx.flower_count);
        report.add(exact_entry("d.flower-high-strong[xi=" + fmt_delta(x) + "]", ">=", lhs,
                               (Rat(1) - Rat(7) * pf / xr) / delta,
                               "tau-average in closed form"));
    }

    // per-neighborhood data
    auto nspace = enumerate_neighborhoods(ctx.xf, f.model);
    std::vector<Rat> ddom(nspace.size());
    parallel_for(nspace.size(), workers, [&](uint64_t b, uint64_t e) {
        for (uint64_t i = b; i < e; ++i) ddom[i] = ctx.delta_dom(nspace.decode_neighborhood(i));
    });

    // (e) P_comp(x, d) <= F1(d) for d <= 1/2, all x: report the worst x
    for (double d : grid) {
        if (d <= 0.0 || d > 0.5) continue;
        Rat dr(d);
        Rat worst = -1;
        for (uint64_t i = 0; i < nspace.size(); ++i) {
            Rat comp = ctx.profile(nspace.decode_neighborhood(i), dr).comp;
            if (comp > worst) worst = comp;
        }
        report.add(closed_form_entry("e.neighborhood-low-weak[d=" + fmt_delta(d) + "]", "<=",
                                     to_ld(worst), Constants::F1((long double)d),
                                     "max over neighborhoods"));
    }

    // (f) P_comp(x, C5) <= F1(delta_dom(x)); worst margin over x
    {
        Rat c5r((double)Constants::C5());
        long double worst_lhs = 0, worst_rhs = Constants::F1(0);
        bool pass = true;
        long double worst_margin = -1e30L;
        for (uint64_t i = 0; i < nspace.size(); ++i) {
            long double lhs = to_ld(ctx.profile(nspace.decode_neighborhood(i), c5r).comp);
            long double rhs = Constants::F1(to_ld(ddom[i]));
            if (lhs > rhs) pass = false;
            if (lhs - rhs > worst_margin) {
                worst_margin = lhs - rhs;
                worst_lhs = lhs;
                worst_rhs = rhs;
            }
        }
        AuditEntry e = closed_form_entry("f.neighborhood-low-strong", "<=", worst_lhs, worst_rhs,
                                         "worst x; exact delta_dom");
        e.pass = pass;
        report.add(e);
    }

    // (g) P(x, d) <= 1/(1-d) for d <= 1/2
    for (double d : grid) {
        if (d <= 0.0 || d > 0.5) continue;
        Rat dr(d);
        Rat worst = -1;
        for (uint64_t i = 0; i < nspace.size(); ++i) {
            Rat tot = ctx.profile(nspace.decode_neighborhood(i), dr).total;
            if (tot > worst) worst = tot;
        }
        report.add(exact_entry("g.crude-distrib[d=" + fmt_delta(d) + "]", "<=", worst,
                               Rat(1) / (Rat(1) - dr), "max over neighborhoods"));
    }

    // (h) E[min(delta_dom, C10)] <= C10 C11 P_f and E[delta_dom] <= C11 P_f
    {
        long double c10 = Constants::C10();
        long double acc = 0;
        Rat acc_plain = 0;
        for (uint64_t i = 0; i < nspace.size(); ++i) {
            long double v = to_ld(ddom[i]);
            acc += std::min(v, c10);
            acc_plain += ddom[i];
        }
        long double lhs_min = acc / (long double)nspace.size();
        report.add(closed_form_entry("h.complement-prob-min", "<=", lhs_min,
                                     to_ld(Constants::C10_times_C11() * pf), "C10*C11 = 1400"));
        report.add(closed_form_entry("h.complement-prob", "<=",
                                     to_ld(acc_plain / Rat(nspace.size())),
                                     Constants::C11() * to_ld(pf)));
    }

    // (i) Pr[delta_dom > tau] <= 600 e^4 (P_f/tau + tau), tau in (0, 1/2)
    for (double tau : grid) {
        if (tau <= 0.0 || tau >= 0.5) continue;
        Rat tr(tau);
        uint64_t over = 0;
        for (const Rat& v : ddom) over += v > tr;
        long double rhs =
            600.0L * std::exp(4.0L) * (to_ld(pf) / (long double)tau + (long double)tau);
        report.add(closed_form_entry("i.weak-complement[tau=" + fmt_delta(tau) + "]", "<=",
                                     (long double)over / (long double)nspace.size(), rhs));
    }

    // (j) the elimination chain: P_g <= C1 P_f at every step, terminal
    // constant-zero with survival 1, and the floor P_f >= C1^-r.
    {
        Rat c1(Constants::C1_exact());
        CertifiedAlgorithm cur = ctx.ftab;
        Rat pcur = pf;
        for (int s = f.shape.radius; s >= 1; --s) {
            auto res = eliminate(cur, -1.0, workers);
            auto rep = verify_matching_certified(res.g, workers);
            AuditEntry ver;
            ver.id = "j.step-certified[r=" + std::to_string(s) + "]";
            ver.relation = "<=";
            ver.lhs = rep.ok ? 0.0L : 1.0L;
            ver.rhs = 0.0L;
            ver.pass = rep.ok;
            ver.method = "exact";
            ver.notes = "eliminate output re-verified exhaustively";
            report.add(ver);
            Rat pg = survival_probability_exact(res.g, workers).exact_value();
            report.add(exact_entry("j.elimination[r=" + std::to_string(s) + "]", "<=", pg,
                                   c1 * pcur, "P_g <= C1 P_f"));
            cur = res.g;
            pcur = pg;
        }
        bool zero = std::all_of(cur.table.begin(), cur.table.end(), [](uint8_t b) { return b == 0; });
        AuditEntry term;
        term.id = "j.terminal-zero";
        term.relation = "<=";
        term.lhs = zero ? 0.0L : 1.0L;
        term.rhs = 0.0L;
        term.pass = zero && pcur == 1;
        term.method = "exact";
        term.notes = "0-round algorithm is constant-zero with survival 1";
        report.add(term);
        Rat floor = Rat(1) / Rat(big_pow(Constants::C1_exact(), unsigned(f.shape.radius)));
        report.add(exact_entry("j.survival-floor", ">=", pf, floor, "P_f >= C1^-r"));
    }

    return report;
}

std::string audit_to_json(const AuditReport& report) {
    nlohmann::json entries = nlohmann::json::array();
    for (const auto& e : report.entries)
        entries.push_back({{"id", e.id},
                           {"relation", e.relation},
                           {"lhs", double(e.lhs)},
                           {"rhs", double(e.rhs)},
                           {"pass", e.pass},
                           {"method", e.method},
                           {"notes", e.notes}});
    nlohmann::json j{{"all_pass", report.all_pass},
                     {"p_f", to_double(report.p_f)},
                     {"p_f_exact", report.p_f.str()},
                     {"entries", entries}};
    return j.dump(2);
}

std::string audit_to_csv(const AuditReport& report) {
    std::ostringstream os;
    os << "id,lhs,rhs,method,pass\n";
    os.precision(17);
    for (const auto& e : report.entries)
        os << e.id << "," << double(e.lhs) << "," << double(e.rhs) << "," << e.method << ","
           << (e.pass ? 1 : 0) << "\n";
    return os.str();
}

}  // namespace mmll
