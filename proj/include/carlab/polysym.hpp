#pragma once

// Exact multivariate polynomials in the 2n phase-space variables
// (x_1..x_n, xi_1..xi_n). Coefficients are arbitrary-precision rationals,
// so zero tests certify identities instead of approximating them.
//
// Exponents are stored as bytes; the cap of 255 per variable is far above
// anything the symbol calculus here produces.

#include <carlab/rational.hpp>

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace carlab {

enum class Var { X, Xi };

class PolySymbol {
  public:
    using Key = std::vector<std::uint8_t>;  // length 2n: x exponents, then xi exponents
    using TermMap = std::map<Key, Rat>;     // lexicographic key order, no zero coefficients

    explicit PolySymbol(int dim);
    static PolySymbol constant(int dim, const Rat& c);
    static PolySymbol variable(int dim, Var which, int axis);  // axis is 0-based
    static PolySymbol from_terms(int dim, const TermMap& raw);

    int dim() const { return dim_; }
    const TermMap& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }
    bool is_canonical() const;
    int total_degree() const;  // -1 for the zero polynomial
    bool depends_on_xi() const;
    bool depends_on_x() const;

    PolySymbol operator+(const PolySymbol& o) const;
    PolySymbol operator-(const PolySymbol& o) const;
    PolySymbol operator*(const PolySymbol& o) const;
    PolySymbol operator-() const;
    PolySymbol pow(unsigned k) const;
    bool operator==(const PolySymbol& o) const { return dim_ == o.dim_ && terms_ == o.terms_; }
    bool operator!=(const PolySymbol& o) const { return !(*this == o); }

    PolySymbol& operator+=(const PolySymbol& o) { return *this = *this + o; }
    PolySymbol& operator-=(const PolySymbol& o) { return *this = *this - o; }
    PolySymbol& operator*=(const PolySymbol& o) { return *this = *this * o; }

    PolySymbol differentiate(Var which, int axis) const;

    // point holds (x_1..x_n, xi_1..xi_n)
    double evaluate(std::span<const double> point) const;

    // replace every xi_j by s(x)*xi_j; s must not depend on xi
    PolySymbol substitute_scaled_xi(const PolySymbol& s) const;

    // phi + c*phi^2 for an x-only polynomial
    PolySymbol compose_weight(const Rat& c) const;

    // One term per line, "coeff * x1^e1 ... xi1^f1 ...", lexicographic order.
    std::string to_string() const;
    // Accepts both the line format above and inline sums like "-x1 + 1/4*x2^2".
    static PolySymbol parse(int dim, const std::string& text);

    // Cached double-precision form for hot evaluation loops.
    struct Compiled {
        int dim = 0;
        std::vector<double> coeffs;
        std::vector<Key> keys;
        std::vector<int> max_exp;  // per variable
        double evaluate(std::span<const double> point) const;
    };
    Compiled compile() const;

  private:
    int dim_;
    TermMap terms_;

    void add_term(const Key& k, const Rat& c);
    void require_same_dim(const PolySymbol& o) const;
};

}  // namespace carlab
