#include <carlab/rng.hpp>
#include <carlab/subellipticity.hpp>

#include <doctest.h>

#include <cmath>

using namespace carlab;

namespace {

PolySymbol P(int dim, const std::string& text) { return PolySymbol::parse(dim, text); }

PolySymbol closed_form_quadratic_bracket(int n) {
    PolySymbol s(n);
    for (int j = 0; j + 1 < n; j++) {
        PolySymbol base = P(n, "xi" + std::to_string(j + 1) + "^2") +
                          P(n, "4*x" + std::to_string(j + 1) + "^2");
        s += PolySymbol::constant(n, Rat(32)) * base.pow(3);
    }
    return s;
}

PolySymbol random_poly(Rng& rng, int dim, int terms, int max_exp) {
    PolySymbol::TermMap m;
    for (int t = 0; t < terms; t++) {
        PolySymbol::Key k(2 * dim, 0);
        for (auto& e : k) e = (std::uint8_t)(rng.next_u64() % (max_exp + 1));
        m[k] = rat((long)(rng.next_u64() % 19) - 9, (long)(rng.next_u64() % 7) + 1);
    }
    return PolySymbol::from_terms(dim, m);
}

}  // namespace

TEST_CASE("conjugated symbols for the linear phase") {
    auto [a, b] = conjugated_symbol(Weight::linear({Rat(0), Rat(1)}));
    CHECK(a == P(2, "xi1^4 + xi2^4 - 6*xi2^2 + 1"));
    CHECK(b == P(2, "4*xi2^3 - 4*xi2"));
}

TEST_CASE("conjugated symbols for the quadratic paraboloid follow the definition") {
    auto [a, b] = conjugated_symbol(Weight::paraboloid(2, +1, rat(1, 2)));
    CHECK(a == P(2, "xi1^4 + 16*x1^4 + xi2^4 + 1 - 24*x1^2*xi1^2 - 6*xi2^2"));
    CHECK(b == P(2, "8*x1*xi1^3 - 32*x1^3*xi1 + 4*xi2^3 - 4*xi2"));
    auto [am, bm] = conjugated_symbol(Weight::paraboloid(2, -1, rat(1, 2)));
    CHECK(am == a);
    CHECK(bm == P(2, "8*x1*xi1^3 - 32*x1^3*xi1 - 4*xi2^3 + 4*xi2"));
}

TEST_CASE("constant weights have no conjugated symbol") {
    CHECK_THROWS_AS(conjugated_symbol(Weight::general(P(2, "1/2"))), std::invalid_argument);
}

TEST_CASE("poisson bracket: linear weights are limiting, exactly") {
    Rng rng(2024);
    for (int n : {2, 3, 4}) {
        std::vector<Rat> rho(n, Rat(0));
        rho[n - 1] = 1;
        auto [a, b] = conjugated_symbol(Weight::linear(rho));
        CHECK(poisson_bracket(a, b).is_zero());
        for (int t = 0; t < 3; t++) {
            for (auto& r : rho) r = rat((long)(rng.next_u64() % 19) - 9, (long)(rng.next_u64() % 5) + 1);
            if (std::all_of(rho.begin(), rho.end(), [](const Rat& x) { return x == 0; })) rho[0] = 1;
            auto [ar, br] = conjugated_symbol(Weight::linear(rho));
            CHECK(poisson_bracket(ar, br).is_zero());
        }
    }
}

TEST_CASE("poisson bracket closed form for the quadratic weight") {
    for (int n : {2, 3, 4}) {
        for (int sign : {+1, -1}) {
            auto [a, b] = conjugated_symbol(Weight::paraboloid(n, sign, rat(1, 2)));
            CHECK(poisson_bracket(a, b) == closed_form_quadratic_bracket(n));
        }
    }
    auto [a, b] = conjugated_symbol(Weight::paraboloid(2, +1, rat(1, 2)));
    CHECK(poisson_bracket(a, a).is_zero());
    CHECK_THROWS_AS(poisson_bracket(a, P(3, "x1")), std::invalid_argument);
}

TEST_CASE("bracket antisymmetry and Leibniz rule") {
    Rng rng(31337);
    for (int t = 0; t < 8; t++) {
        PolySymbol p = random_poly(rng, 2, 4, 3);
        PolySymbol q = random_poly(rng, 2, 4, 3);
        PolySymbol r = random_poly(rng, 2, 3, 3);
        CHECK(poisson_bracket(p, q) == -poisson_bracket(q, p));
        CHECK(poisson_bracket(p, q * r) == q * poisson_bracket(p, r) + poisson_bracket(p, q) * r);
    }
}

TEST_CASE("identity certificates") {
    auto certs2 = certify_identities(2);
    REQUIRE(certs2.size() == 4);
    CHECK(certs2[0].exact_zero);
    CHECK(certs2[1].exact_zero);
    CHECK(certs2[2].exact_zero);
    CHECK_FALSE(certs2[2].skipped);
    CHECK(certs2[3].informational);
    CHECK_FALSE(certs2[3].exact_zero);  // the reported display discrepancy is real

    auto certs3 = certify_identities(3);
    CHECK(certs3[0].exact_zero);
    CHECK(certs3[1].exact_zero);
    CHECK(certs3[2].skipped);

    CHECK_THROWS_AS(certify_identities(1), std::invalid_argument);
}

TEST_CASE("variety sampler lands on the exact radical solutions for the linear phase") {
    auto [a, b] = conjugated_symbol(Weight::linear({Rat(0), Rat(1)}));
    VarietySample vs = sample_variety(a, b, Box::cube(2, -1.0, 1.0), 40, 1e-9, 11);
    REQUIRE(vs.complete);
    double root2 = std::sqrt(2.0);
    for (const auto& p : vs.points) {
        CHECK(std::fabs(std::fabs(p.xi[1]) - 1.0) < 1e-6);
        CHECK(std::fabs(std::fabs(p.xi[0]) - root2) < 1e-6);
        double n2 = p.xi[0] * p.xi[0] + p.xi[1] * p.xi[1];
        CHECK(std::max(p.abs_a, p.abs_b) <= 1e-9 * (1.0 + n2 * n2));
    }
}

TEST_CASE("an unreachable variety yields a flagged partial sample") {
    // in one dimension the conjugated symbols of a linear phase never
    // vanish jointly, so the sampler must exhaust its budget and say so
    auto [a, b] = conjugated_symbol(Weight::linear({Rat(1)}));
    VarietySample vs = sample_variety(a, b, Box::cube(1, -1.0, 1.0), 5, 1e-9, 3, 500);
    CHECK_FALSE(vs.complete);
    CHECK(vs.points.empty());
    CHECK(vs.requested == 5);
}

TEST_CASE("variety sampler guards") {
    auto [a, b] = conjugated_symbol(Weight::linear({Rat(0), Rat(1)}));
    CHECK_THROWS_AS(sample_variety(a, b, Box::cube(2, -1.0, 1.0), 10, 0.0, 1), std::invalid_argument);
    CHECK_THROWS_AS(sample_variety(a, b, Box::cube(2, -1.0, 1.0), 0, 1e-9, 1), std::invalid_argument);
}

TEST_CASE("variety sampler admission holds on the paraboloid") {
    auto [a, b] = conjugated_symbol(Weight::paraboloid(2, +1, rat(1, 2)));
    VarietySample vs = sample_variety(a, b, Box::cube(2, -1.0, 1.0), 100, 1e-9, 7);
    REQUIRE(vs.complete);
    REQUIRE(vs.points.size() == 100);
    PolySymbol::Compiled ca = a.compile(), cb = b.compile();
    for (const auto& p : vs.points) {
        std::vector<double> pt{p.x[0], p.x[1], p.xi[0], p.xi[1]};
        double n2 = p.xi[0] * p.xi[0] + p.xi[1] * p.xi[1];
        CHECK(std::fabs(ca.evaluate(pt)) <= 1e-9 * (1.0 + n2 * n2));
        CHECK(std::fabs(cb.evaluate(pt)) <= 1e-9 * (1.0 + n2 * n2));
    }
}

TEST_CASE("weight classification") {
    BracketReport lin = check_subellipticity(Weight::linear({Rat(1), Rat(1)}),
                                             Box::cube(2, -1.0, 1.0), 50, 1e-7, 3);
    CHECK(lin.classification == WeightClass::Limiting);
    CHECK(lin.exact_zero_bracket);
    CHECK(lin.samples_used == 0);

    BracketReport par = check_subellipticity(Weight::paraboloid(2, +1, rat(1, 2)),
                                             Box::cube(2, -1.0, 1.0), 60, 1e-7, 5);
    CHECK(par.classification == WeightClass::Subelliptic);
    CHECK(par.min_bracket >= 0.0);

    Box away(std::vector<std::pair<double, double>>{{-1.0, 1.0}, {0.25, 1.0}});
    BracketReport xsq = check_subellipticity(Weight::general(P(2, "x2^2")), away, 60, 1e-7, 5);
    CHECK(xsq.classification == WeightClass::Subelliptic);
    CHECK(xsq.min_bracket > 0.0);

    BracketReport neg = check_subellipticity(Weight::general(P(2, "-x2^2")), away, 60, 1e-7, 5);
    CHECK(neg.classification == WeightClass::Indefinite);
}

TEST_CASE("eta substitution turns convexified symbols into scaled base symbols") {
    for (const Weight& w : {Weight::linear({Rat(0), Rat(1)}), Weight::paraboloid(2, +1, rat(1, 2))}) {
        Rat h = rat(1, 100), eps = rat(1, 10);
        Weight conv = w.convexify(h, eps);
        auto [a, b] = conjugated_symbol(w);
        auto [at, bt] = conjugated_symbol(conv);
        PolySymbol factor = PolySymbol::constant(2, Rat(1)) +
                            PolySymbol::constant(2, h / eps) * w.phi();
        CHECK(at.substitute_scaled_xi(factor) == factor.pow(4) * a);
        CHECK(bt.substitute_scaled_xi(factor) == factor.pow(4) * b);
    }
}

TEST_CASE("convexified decomposition and lower bound at sampled variety points") {
    ConvexifiedCheck lin = check_convexified_bound(Weight::linear({Rat(0), Rat(1)}), rat(1, 100),
                                                   rat(1, 10), Box::cube(2, -1.0, 1.0), 60, 1e-6, 9);
    CHECK(lin.sample_complete);
    CHECK(lin.decomposition_ok);
    CHECK(lin.bound_ok_sum_sq);
    CHECK(lin.min_margin_sum_sq > 0.0);

    ConvexifiedCheck par = check_convexified_bound(Weight::paraboloid(2, +1, rat(1, 2)), rat(1, 100),
                                                   rat(1, 10), Box::cube(2, -1.0, 1.0), 60, 1e-6, 9);
    CHECK(par.sample_complete);
    CHECK(par.decomposition_ok);
    CHECK(par.bound_ok_sum_sq);
    CHECK(par.min_margin_sum_sq > 0.0);
}

TEST_CASE("convexified bound near the h -> 0 limit") {
    ConvexifiedCheck c = check_convexified_bound(Weight::linear({Rat(0), Rat(1)}), rat(1, 1000000),
                                                 rat(1, 1000), Box::cube(2, -1.0, 1.0), 30, 1e-6, 13);
    CHECK(c.decomposition_ok);
    for (const auto& s : c.samples) CHECK(std::fabs(s.bracket_tilde) < 1.0);
}

TEST_CASE("convexified check rejects weights with a negative bracket") {
    Box away(std::vector<std::pair<double, double>>{{-1.0, 1.0}, {0.25, 1.0}});
    CHECK_THROWS_AS(check_convexified_bound(Weight::general(P(2, "-x2^2")), rat(1, 100), rat(1, 10),
                                            away, 30, 1e-6, 3),
                    std::invalid_argument);
}
