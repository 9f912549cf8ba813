#pragma once

// Self-reduction round elimination: dir, Q, good flowers, extension profiles,
// dominant directions, the f -> g construction, and an audited inequality
// ledger for the whole proof chain. Exact-rational arithmetic in discrete
// mode; Monte Carlo with declared trial counts in continuous mode.

#include <cstdint>
#include <string>
#include <vector>

#include "mmll/cert_algorithms.hpp"
#include "mmll/exact.hpp"
#include "mmll/label_algebra.hpp"

namespace mmll {

// Named constants of the elimination analysis. C1 is also carried exactly; the
// derived identity C10 = min(C5, (1-C4)/(12 e^4)) and C10*C11 = 1400 are
// checked in tests.
struct Constants {
    static constexpr double C0 = 1e-10;
    static constexpr double C1 = 1e80;
    static BigInt C1_exact();                       // 10^80
    static Rat C4() { return Rat(99, 100); }
    static long double C5();                        // e^-3 / 1000
    static long double C10();                       // 1/(1200 e^4)
    static long double C11();                       // 168*10^4*e^4
    static Rat C10_times_C11() { return Rat(1400); }
    static long double F1(long double delta);       // 6 e^4 delta
};

// Count of dir-exclusivity violations observed process-wide; must stay zero
// for matching-certified inputs (Prop-level invariant, asserted on every
// exhaustive dir computation).
uint64_t dir_violation_count();

// Unique direction of y that admits an accepting flower extension, else 0.
// Exhaustive in discrete mode; throws domain_error (after bumping the
// violation counter) if two directions accept.
int dir(const CertifiedAlgorithm& f, const Neighborhood& y);
// Continuous mode: sampled with a declared per-direction trial count.
int dir_sampled(const CertifiedAlgorithm& f, const Neighborhood& y, uint64_t trials, Rng rng);

// Q(f,x) = Pr[dir(f,y) = 1 | res_1(y) = x], exact over the conditional space.
Rat q_value(const CertifiedAlgorithm& f, const Flower& x);
double q_value_mc(const CertifiedAlgorithm& f, const Flower& x, uint64_t outer_trials,
                  uint64_t dir_trials, Rng rng);

// Goodness threshold t(x) = 1 - min(Q(x), Q(xbar)); x is delta-good iff
// t(x) <= delta (both directional extension probabilities >= 1-delta).
Rat goodness_threshold(const CertifiedAlgorithm& f, const Flower& x);
bool is_good(const CertifiedAlgorithm& f, const Flower& x, double delta);

struct ExtensionProfile {
    std::vector<Rat> p;  // P_i(f,x,delta), i = 1..delta
    Rat p_max;
    int i_max = 0;  // 0 iff the maximizer is not unique
    Rat total;      // P = sum of P_i
    Rat comp;       // P_comp = P - P_max
};

ExtensionProfile extension_profile(const CertifiedAlgorithm& f, const Neighborhood& x,
                                   double delta);

// Smallest grid delta with P_max(f,x,delta) >= C4 (upper-bounds the true
// infimum since P_max is nondecreasing); 0 and 1 are implicitly included.
double delta_dom(const CertifiedAlgorithm& f, const Neighborhood& x,
                 const std::vector<double>& grid);
// Exact infimum in discrete mode: P_max is a right-continuous step function
// whose jumps lie among the extension goodness thresholds.
Rat delta_dom_exact(const CertifiedAlgorithm& f, const Neighborhood& x);

// Geometric 2^-20..2^-1 grid plus {0, C5, C10, 1/2, 1}.
std::vector<double> default_delta_grid();

// ---------------------------------------------------------------- eliminate

struct EliminateResult {
    CertifiedAlgorithm g;                   // radius r-1 table
    std::vector<uint8_t> good_bitmap;       // per F_{r-1} canonical index
    std::vector<ExtensionProfile> profiles; // per R_{r-1} canonical index, at the used c5
    double c5_used = 0.0;
};

// g(y) = 1 iff y is C5-good and i_max(f, end_A(y), C5) = i_max(f, end_B(y), C5) = 1.
// c5_override, when in (0,1], replaces C5 (pedagogical runs only; audits
// always use the analysis constant).
EliminateResult eliminate(const CertifiedAlgorithm& f, double c5_override = -1.0,
                          int workers = 1);

// ---------------------------------------------------------------- audit

struct AuditEntry {
    std::string id;
    std::string relation;  // "<=" or ">="
    long double lhs = 0.0L;
    long double rhs = 0.0L;
    bool pass = false;
    std::string method;  // exact | exact-vs-closed-form | grid | mc
    std::string notes;
};

struct AuditReport {
    std::vector<AuditEntry> entries;
    bool all_pass = true;
    Rat p_f;
    void add(AuditEntry e);
};

// Entries (a)-(j) of the inequality chain, evaluated for a discrete verified
// algorithm of radius >= 1 on the given delta grid.
AuditReport audit(const CertifiedAlgorithm& f, const std::vector<double>& delta_grid,
                  int workers = 1);

std::string audit_to_json(const AuditReport& report);
std::string audit_to_csv(const AuditReport& report);

}  // namespace mmll
