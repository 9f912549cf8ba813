#include "mmll/equivalences.hpp"

#include <algorithm>
#include <cmath>

namespace mmll {

namespace {

// Test variable for exact sums: a small integer hash of the canonical index.
Rat x_of_index(uint64_t xseed, uint64_t index) { return Rat(mix3(xseed, 0x58, index) % 1001, 1000); }

// Continuous test variable: coordinate-weighted fractional sum, deliberately
// asymmetric across positions so the check is sensitive to placement bugs.
double x_of_labels(const std::vector<double>& labels, uint64_t xseed) {
    double acc = 0.0;
    for (size_t k = 0; k < labels.size(); ++k) {
        double wk = double(mix3(xseed, 0x57, k) >> 11) * 0x1.0p-53;
        acc += (0.25 + wk) * labels[k];
    }
    return acc - std::floor(acc);
}

EquivalenceResult exact_result(std::string id, const Rat& lhs, const Rat& rhs) {
    EquivalenceResult r;
    r.id = std::move(id);
    r.exact = true;
    r.lhs = to_double(lhs);
    r.rhs = to_double(rhs);
    r.diff = std::abs(to_double(lhs - rhs));
    r.pass = lhs == rhs;
    return r;
}

std::vector<Perm> all_perms(int delta) {
    Perm p = identity_perm(delta);
    std::vector<Perm> out;
    do {
        out.push_back(p);
    } while (std::next_permutation(p.begin(), p.end()));
    return out;
}

}  // namespace

std::vector<EquivalenceResult> check_equivalences_exact(const Shape& shape,
                                                        const LabelModel& model, uint64_t xseed) {
    if (shape.radius < 1) throw domain_error("equivalence suite needs radius >= 1");
    std::vector<EquivalenceResult> out;
    const int delta = shape.delta;
    Shape xm1 = shape.with_radius(shape.radius - 1);

    auto rspace = enumerate_neighborhoods(shape, model);
    auto fspace = enumerate_flowers(shape, model);
    auto fm1space = enumerate_flowers(xm1, model);
    auto rm1space = enumerate_neighborhoods(xm1, model);

    auto xf = [&](const Flower& w) { return x_of_index(xseed, flower_index(w)); };
    auto xr = [&](const Neighborhood& z) { return x_of_index(xseed, neighborhood_index(z)); };
    auto xr2 = [&](const Neighborhood& z) { return x_of_index(xseed ^ 0xb, neighborhood_index(z)); };

    // edge-flip: E[X(reverse(y))] = E[X(y)] over F_r
    {
        Rat lhs = 0, rhs = 0;
        for (uint64_t i = 0; i < fspace.size(); ++i) {
            Flower w = fspace.decode_flower(i);
            lhs += xf(reverse(w));
            rhs += xf(w);
        }
        out.push_back(exact_result("edge-flip", lhs / fspace.size(), rhs / fspace.size()));
    }

    // vert-permute: E_{sigma, y}[X(sigma(y))] = E[X(y)] over R_r, sigma uniform
    {
        auto perms = all_perms(delta);
        Rat lhs = 0, rhs = 0;
        for (uint64_t i = 0; i < rspace.size(); ++i) {
            Neighborhood z = rspace.decode_neighborhood(i);
            for (const Perm& sigma : perms) lhs += xr(shuffle(sigma, z));
            rhs += xr(z) * int(perms.size());
        }
        Rat norm = Rat(rspace.size()) * int(perms.size());
        out.push_back(exact_result("vert-permute", lhs / norm, rhs / norm));
    }

    // cond-vert-permute: E[X(sigma_i(y)) | res_i(y)=x] = E[X(z) | res_1(z)=x], all i, x
    {
        bool all = true;
        Rat lhs_total = 0, rhs_total = 0;
        for (uint64_t xi = 0; xi < fm1space.size(); ++xi) {
            Flower x = fm1space.decode_flower(xi);
            auto base = enumerate_cond_res(1, x);
            Rat rhs = 0;
            for (uint64_t c = 0; c < base.size(); ++c) rhs += xr(base.decode_neighborhood(c));
            rhs /= base.size();
            for (int i = 1; i <= delta; ++i) {
                auto cond = enumerate_cond_res(i, x);
                Rat lhs = 0;
                Perm si = special_perm(delta, i);
                for (uint64_t c = 0; c < cond.size(); ++c)
                    lhs += xr(shuffle(si, cond.decode_neighborhood(c)));
                lhs /= cond.size();
                all = all && lhs == rhs;
                lhs_total += lhs;
                rhs_total += rhs;
            }
        }
        auto r = exact_result("cond-vert-permute", lhs_total, rhs_total);
        r.pass = all && r.pass;
        out.push_back(r);
    }

    // f-to-r: E_{x ~ F_{r-1}} E[X | res_i = x] = E_{y ~ R_r}[X], all i
    {
        Rat rhs = 0;
        for (uint64_t i = 0; i < rspace.size(); ++i) rhs += xr(rspace.decode_neighborhood(i));
        rhs /= rspace.size();
        bool all = true;
        Rat lhs_last = 0;
        for (int i = 1; i <= delta; ++i) {
            Rat lhs = 0;
            for (uint64_t xi = 0; xi < fm1space.size(); ++xi) {
                auto cond = enumerate_cond_res(i, fm1space.decode_flower(xi));
                Rat inner = 0;
                for (uint64_t c = 0; c < cond.size(); ++c) inner += xr(cond.decode_neighborhood(c));
                lhs += inner / cond.size();
            }
            lhs /= fm1space.size();
            all = all && lhs == rhs;
            lhs_last = lhs;
        }
        auto r = exact_result("f-to-r-sample", lhs_last, rhs);
        r.pass = all && r.pass;
        out.push_back(r);
    }

    // r-to-f: E_{x ~ R_{r-1}} E_i E[X | end_A = sigma_i(x)] = E_{y ~ F_{r-1}}[X]
    {
        auto xfm1 = [&](const Flower& w) { return x_of_index(xseed ^ 0x5, flower_index(w)); };
        Rat rhs = 0;
        for (uint64_t i = 0; i < fm1space.size(); ++i) rhs += xfm1(fm1space.decode_flower(i));
        rhs /= fm1space.size();
        Rat lhs = 0;
        for (uint64_t xi = 0; xi < rm1space.size(); ++xi) {
            Neighborhood x = rm1space.decode_neighborhood(xi);
            Rat mid = 0;
            for (int i = 1; i <= delta; ++i) {
                auto cond = enumerate_cond_end(Side::A, shuffle(special_perm(delta, i), x));
                Rat inner = 0;
                for (uint64_t c = 0; c < cond.size(); ++c) inner += xfm1(cond.decode_flower(c));
                mid += inner / cond.size();
            }
            lhs += mid / delta;
        }
        lhs /= rm1space.size();
        out.push_back(exact_result("r-to-f-sample", lhs, rhs));
    }

    // f-to-f: E_x[E[X_A | res_1 = x] E[X_B | res_1 = xbar]] = E_y[X_A(end_A y) X_B(end_B y)]
    {
        Rat lhs = 0;
        for (uint64_t xi = 0; xi < fm1space.size(); ++xi) {
            Flower x = fm1space.decode_flower(xi);
            auto ca = enumerate_cond_res(1, x);
            auto cb = enumerate_cond_res(1, reverse(x));
            Rat ea = 0, eb = 0;
            for (uint64_t c = 0; c < ca.size(); ++c) ea += xr(ca.decode_neighborhood(c));
            for (uint64_t c = 0; c < cb.size(); ++c) eb += xr2(cb.decode_neighborhood(c));
            lhs += (ea / ca.size()) * (eb / cb.size());
        }
        lhs /= fm1space.size();
        Rat rhs = 0;
        for (uint64_t i = 0; i < fspace.size(); ++i) {
            Flower y = fspace.decode_flower(i);
            rhs += xr(end(Side::A, y)) * xr2(end(Side::B, y));
        }
        rhs /= fspace.size();
        out.push_back(exact_result("f-to-f-sample", lhs, rhs));
    }

    return out;
}

namespace {

struct MeanVar {
    double mean = 0.0, var = 0.0;
    uint64_t n = 0;
};

template <class Gen>
MeanVar stream_stats(uint64_t n, Gen gen) {
    double sum = 0, sum2 = 0;
    for (uint64_t t = 0; t < n; ++t) {
        double v = gen(t);
        sum += v;
        sum2 += v * v;
    }
    MeanVar mv;
    mv.n = n;
    mv.mean = sum / double(n);
    mv.var = (sum2 - sum * sum / double(n)) / double(n - 1);
    return mv;
}

EquivalenceResult z_test(std::string id, const MeanVar& a, const MeanVar& b, double significance) {
    EquivalenceResult r;
    r.id = std::move(id);
    r.lhs = a.mean;
    r.rhs = b.mean;
    r.diff = std::abs(a.mean - b.mean);
    r.samples = a.n;
    double se = std::sqrt(a.var / double(a.n) + b.var / double(b.n));
    r.z_stat = se > 0 ? r.diff / se : 0.0;
    // two-sided normal quantile; 3.2905 at significance 1e-3
    double zcrit = significance <= 1e-3 ? 3.2905 : 2.5758;
    r.pass = r.z_stat <= zcrit;
    return r;
}

}  // namespace

std::vector<EquivalenceResult> check_equivalences_continuous(const Shape& shape, uint64_t samples,
                                                             double significance, uint64_t seed) {
    if (shape.radius < 1) throw domain_error("equivalence suite needs radius >= 1");
    std::vector<EquivalenceResult> out;
    const int delta = shape.delta;
    const LabelModel cm = LabelModel::continuous();
    Shape xm1 = shape.with_radius(shape.radius - 1);
    uint64_t xseed = splitmix64(seed ^ 0x1234);

    auto X = [&](const std::vector<double>& labels) { return x_of_labels(labels, xseed); };

    // edge-flip
    out.push_back(z_test("edge-flip",
                         stream_stats(samples,
                                      [&](uint64_t t) {
                                          Rng r(seed, 2 * t);
                                          return X(reverse(sample_uniform_flower(shape, cm, r)).labels);
                                      }),
                         stream_stats(samples,
                                      [&](uint64_t t) {
                                          Rng r(seed, 2 * t + 1);
                                          return X(sample_uniform_flower(shape, cm, r).labels);
                                      }),
                         significance));

    // vert-permute
    out.push_back(z_test("vert-permute",
                         stream_stats(samples,
                                      [&](uint64_t t) {
                                          Rng r(seed ^ 2, 2 * t);
                                          auto z = sample_uniform_neighborhood(shape, cm, r);
                                          Perm sigma = identity_perm(delta);
                                          for (int k = delta - 1; k > 0; --k)
                                              std::swap(sigma[k], sigma[r.next_below(uint32_t(k + 1))]);
                                          return X(shuffle(sigma, z).labels);
                                      }),
                         stream_stats(samples,
                                      [&](uint64_t t) {
                                          Rng r(seed ^ 2, 2 * t + 1);
                                          return X(sample_uniform_neighborhood(shape, cm, r).labels);
                                      }),
                         significance));

    // cond-vert-permute (random i per draw, common x stream)
    out.push_back(z_test(
        "cond-vert-permute",
        stream_stats(samples,
                     [&](uint64_t t) {
                         Rng r(seed ^ 3, 2 * t);
                         auto x = sample_uniform_flower(xm1, cm, r);
                         int i = 1 + int(r.next_below(uint32_t(delta)));
                         auto y = sample_cond_res(i, x, r);
                         return X(shuffle(special_perm(delta, i), y).labels);
                     }),
        stream_stats(samples,
                     [&](uint64_t t) {
                         Rng r(seed ^ 3, 2 * t + 1);
                         auto x = sample_uniform_flower(xm1, cm, r);
                         r.next_below(uint32_t(delta));  // keep streams aligned
                         return X(sample_cond_res(1, x, r).labels);
                     }),
        significance));

    // f-to-r
    out.push_back(z_test("f-to-r-sample",
                         stream_stats(samples,
                                      [&](uint64_t t) {
                                          Rng r(seed ^ 4, 2 * t);
                                          auto x = sample_uniform_flower(xm1, cm, r);
                                          int i = 1 + int(r.next_below(uint32_t(delta)));
                                          return X(sample_cond_res(i, x, r).labels);
                                      }),
                         stream_stats(samples,
                                      [&](uint64_t t) {
                                          Rng r(seed ^ 4, 2 * t + 1);
                                          return X(sample_uniform_neighborhood(shape, cm, r).labels);
                                      }),
                         significance));

    // r-to-f
    out.push_back(z_test("r-to-f-sample",
                         stream_stats(samples,
                                      [&](uint64_t t) {
                                          Rng r(seed ^ 5, 2 * t);
                                          auto x = sample_uniform_neighborhood(xm1, cm, r);
                                          int i = 1 + int(r.next_below(uint32_t(delta)));
                                          auto y = sample_cond_end(
                                              Side::A, shuffle(special_perm(delta, i), x), r);
                                          return X(y.labels);
                                      }),
                         stream_stats(samples,
                                      [&](uint64_t t) {
                                          Rng r(seed ^ 5, 2 * t + 1);
                                          return X(sample_uniform_flower(xm1, cm, r).labels);
                                      }),
                         significance));

    // f-to-f (product variable over the two endpoint neighborhoods)
    uint64_t xa = splitmix64(seed ^ 0xa), xb = splitmix64(seed ^ 0xbb);
    out.push_back(z_test(
        "f-to-f-sample",
        stream_stats(samples,
                     [&](uint64_t t) {
                         Rng r(seed ^ 6, 2 * t);
                         auto x = sample_uniform_flower(xm1, cm, r);
                         auto za = sample_cond_res(1, x, r);
                         auto zb = sample_cond_res(1, reverse(x), r);
                         return x_of_labels(za.labels, xa) * x_of_labels(zb.labels, xb);
                     }),
        stream_stats(samples,
                     [&](uint64_t t) {
                         Rng r(seed ^ 6, 2 * t + 1);
                         auto y = sample_uniform_flower(shape, cm, r);
                         return x_of_labels(end(Side::A, y).labels, xa) *
                                x_of_labels(end(Side::B, y).labels, xb);
                     }),
        significance));

    return out;
}

}  // namespace mmll
