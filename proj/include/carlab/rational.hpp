#pragma once

// Exact rational coefficients. Thin helpers around GMP's mpq_class; all
// polynomial arithmetic in this project is exact, floating point enters
// only at evaluation time.

#include <gmpxx.h>

#include <cctype>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace carlab {

using Rat = mpq_class;

inline Rat rat(long num, long den = 1) {
    if (den == 0) throw std::invalid_argument("rational with zero denominator");
    Rat r(num, den);
    r.canonicalize();
    return r;
}

// Exact conversion: every finite double is a binary rational.
inline Rat rat_from_double(double x) {
    if (!std::isfinite(x)) throw std::invalid_argument("rational from non-finite double");
    Rat r(x);
    r.canonicalize();
    return r;
}

// Parse "p", "-p", "p/q", "1.25", "2.5e-3". Decimals convert exactly.
inline Rat rat_parse(const std::string& s) {
    if (s.empty()) throw std::invalid_argument("empty rational literal");
    if (s.find('.') == std::string::npos && s.find('e') == std::string::npos &&
        s.find('E') == std::string::npos) {
        try {
            Rat r(s);
            r.canonicalize();
            return r;
        } catch (const std::invalid_argument&) {
            throw std::invalid_argument("malformed rational literal: " + s);
        }
    }
    std::size_t i = 0;
    bool neg = false;
    if (i < s.size() && (s[i] == '+' || s[i] == '-')) neg = (s[i++] == '-');
    std::string digits;
    long frac_len = 0, exp10 = 0;
    while (i < s.size() && std::isdigit((unsigned char)s[i])) digits += s[i++];
    if (i < s.size() && s[i] == '.') {
        i++;
        while (i < s.size() && std::isdigit((unsigned char)s[i])) {
            digits += s[i++];
            frac_len++;
        }
    }
    if (i < s.size() && (s[i] == 'e' || s[i] == 'E')) {
        i++;
        bool eneg = false;
        if (i < s.size() && (s[i] == '+' || s[i] == '-')) eneg = (s[i++] == '-');
        std::string ed;
        while (i < s.size() && std::isdigit((unsigned char)s[i])) ed += s[i++];
        if (ed.empty()) throw std::invalid_argument("malformed rational literal: " + s);
        exp10 = std::stol(ed) * (eneg ? -1 : 1);
    }
    if (i != s.size() || digits.empty()) throw std::invalid_argument("malformed rational literal: " + s);
    Rat r(mpz_class(digits), 1);
    long shift = exp10 - frac_len;
    mpz_class p10;
    mpz_ui_pow_ui(p10.get_mpz_t(), 10, (unsigned long)(shift < 0 ? -shift : shift));
    if (shift >= 0)
        r *= Rat(p10);
    else
        r /= Rat(p10);
    r.canonicalize();
    return neg ? Rat(-r) : r;
}

inline std::string rat_str(const Rat& r) { return r.get_str(); }

inline double rat_to_double(const Rat& r) { return r.get_d(); }

}  // namespace carlab
