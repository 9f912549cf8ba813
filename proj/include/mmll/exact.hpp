#pragma once

// Exact probability arithmetic. Counts that index state spaces fit in 64/128
// bits, but audit expectations mix denominators and the matching-intersection
// pmf cross-check needs factorials up to 64! (~1.3e89), so the rational type
// is backed by arbitrary-precision integers.

#include <boost/multiprecision/cpp_int.hpp>
#include <cstdint>
#include <string>

namespace mmll {

using BigInt = boost::multiprecision::cpp_int;
using Rat = boost::multiprecision::cpp_rational;

inline double to_double(const Rat& r) { return r.convert_to<double>(); }
inline long double to_ld(const Rat& r) { return r.convert_to<long double>(); }

inline Rat rat(long long num, long long den = 1) { return Rat(num, den); }

inline BigInt big_pow(BigInt base, unsigned exp) {
    BigInt out = 1;
    while (exp) {
        if (exp & 1) out *= base;
        base *= base;
        exp >>= 1;
    }
    return out;
}

// L^len if it fits below the limit, otherwise nullopt (caller reports the
// exact count via big_pow for the error message).
inline bool pow_fits(uint64_t base, uint64_t exp, uint64_t limit, uint64_t& out) {
    out = 1;
    for (uint64_t i = 0; i < exp; ++i) {
        if (base != 0 && out > limit / base) return false;
        out *= base;
        if (out > limit) return false;
    }
    return true;
}

inline std::string big_to_string(const BigInt& v) { return v.str(); }

}  // namespace mmll
