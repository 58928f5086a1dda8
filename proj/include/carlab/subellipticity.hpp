#pragma once

// Conjugated symbols a, b of the weighted operator, Poisson brackets,
// exact identity certificates, characteristic-variety sampling, and the
// convexified lower-bound check.

#include <carlab/polysym.hpp>
#include <carlab/weights.hpp>

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace carlab {

// a = sum_j [xi_j^4 - 6 (d_j phi)^2 xi_j^2 + (d_j phi)^4]
// b = sum_j [4 (d_j phi) xi_j^3 - 4 (d_j phi)^3 xi_j]
std::pair<PolySymbol, PolySymbol> conjugated_symbol(const Weight& w);

// {p,q} = sum_j d_{xi_j} p * d_{x_j} q - d_{x_j} p * d_{xi_j} q
PolySymbol poisson_bracket(const PolySymbol& p, const PolySymbol& q);

struct IdentityCertificate {
    std::string name;
    bool exact_zero = false;
    bool skipped = false;
    bool informational = false;  // reported, not required to be zero
    std::string note;
};

std::vector<IdentityCertificate> certify_identities(int n);

struct VarietySample {
    struct Point {
        std::vector<double> x;
        std::vector<double> xi;
        double abs_a = 0.0;
        double abs_b = 0.0;
    };
    std::vector<Point> points;
    double tol = 0.0;
    std::uint64_t seed = 0;
    Box box;
    int requested = 0;
    bool complete = false;  // budget sufficed for `requested` admissions
};

// Admission predicate: max(|a|,|b|) <= tol * (1 + |xi|^4).
VarietySample sample_variety(const PolySymbol& a, const PolySymbol& b, const Box& box, int count,
                             double tol, std::uint64_t seed, long retry_budget = 0);

enum class WeightClass { Limiting, Subelliptic, Indefinite };

std::string to_string(WeightClass c);

struct BracketReport {
    std::string weight;
    WeightClass classification = WeightClass::Indefinite;
    bool exact_zero_bracket = false;  // symbolic certificate short-circuits sampling
    double min_bracket = 0.0;
    double max_abs_bracket = 0.0;
    double tol = 0.0;
    int samples_used = 0;
    bool sample_complete = true;
    std::vector<IdentityCertificate> certificates;
};

BracketReport check_subellipticity(const Weight& w, const Box& box, int count, double tol,
                                   std::uint64_t seed);

struct ConvexifiedCheck {
    struct Sample {
        std::vector<double> x;
        std::vector<double> xi;   // variety point of (a,b)
        std::vector<double> eta;  // f'(phi) * xi
        double bracket_tilde = 0.0;
        double decomposition_rhs = 0.0;
        double residual = 0.0;
        double scale = 1.0;
        double bound_sum_sq = 0.0;   // (16/9)(h/eps) f'^6 (sum_j g_j^4)^2
        double bound_per_term = 0.0; // same with sum_j g_j^8
        double margin_sum_sq = 0.0;
        double margin_per_term = 0.0;
    };
    std::string weight;
    double h = 0.0;
    double eps = 0.0;
    double tol = 0.0;
    std::vector<Sample> samples;
    bool sample_complete = true;
    bool decomposition_ok = false;
    bool bound_ok_sum_sq = false;
    bool bound_ok_per_term = false;
    double max_rel_residual = 0.0;
    double min_margin_sum_sq = 0.0;
    double min_margin_per_term = 0.0;
};

// Checks, at sampled variety points, the exact decomposition of the
// convexified bracket and the strict positivity bound, in both the
// sum-then-square and per-term readings of the contracted squares.
ConvexifiedCheck check_convexified_bound(const Weight& w, const Rat& h, const Rat& eps,
                                         const Box& box, int count, double tol,
                                         std::uint64_t seed);

}  // namespace carlab
