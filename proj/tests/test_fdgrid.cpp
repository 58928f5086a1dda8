#include <carlab/fdgrid.hpp>

#include <doctest.h>

#include <cmath>

using namespace carlab;

namespace {

std::shared_ptr<const Grid> grid1d(int m, double lo = 0.0, double hi = 1.0) {
    return Grid::build(Box(std::vector<std::pair<double, double>>{{lo, hi}}), {m});
}

GridFunction constant(const std::shared_ptr<const Grid>& g, cplx v) {
    GridFunction f(g);
    for (auto& x : f.values) x = v;
    return f;
}

}  // namespace

TEST_CASE("grid construction") {
    auto g = grid1d(11);
    CHECK(g->spacing(0) == doctest::Approx(0.1));
    CHECK(g->interior_count() == 7);

    auto g2 = Grid::build(Box::cube(2, 0.0, 1.0), {11, 11});
    CHECK(g2->interior_count() == 49);

    CHECK_THROWS_AS(grid1d(5), std::invalid_argument);
    CHECK_THROWS_AS(Grid::build(Box(std::vector<std::pair<double, double>>{{1.0, 0.0}}), {11}),
                    std::invalid_argument);
}

TEST_CASE("fourth difference is exact on quartics") {
    auto g = grid1d(21);
    GridFunction u = GridFunction::sample(g, [](const std::vector<double>& x) {
        return cplx(x[0] * x[0] * x[0] * x[0]);
    });
    auto Lu = apply_operator(g, {}, {}, 1.0, u);
    for (auto v : Lu) CHECK(std::abs(v - cplx(24.0)) < 1e-7);
}

TEST_CASE("zeroth and first order terms") {
    auto g = grid1d(15);
    cplx q0(2.0, 0.5);
    auto Lu = apply_operator(g, {}, constant(g, q0), 1.0, constant(g, cplx(1.0)));
    // the 1/dx^4 stencil cancels constants to rounding, not to the last bit
    for (auto v : Lu) CHECK(std::abs(v - q0) < 1e-9);

    GridFunction x = GridFunction::sample(g, [](const std::vector<double>& p) { return cplx(p[0]); });
    auto Lx = apply_operator(g, {constant(g, cplx(1.0))}, {}, 1.0, x);
    for (auto v : Lx) CHECK(std::abs(v - cplx(0.0, -1.0)) < 1e-10);
}

TEST_CASE("bilaplacian agrees with the fourth sum deep inside in 1-D") {
    auto g = grid1d(15);
    auto op4 = assemble(g, {}, {}, 0.5);
    auto opb = assemble_bilaplacian(g, 0.5);
    Eigen::MatrixXcd d4(op4.mat), db(opb.mat);
    // rows whose squared stencil cannot see the interior boundary
    for (long r = 2; r < g->interior_count() - 2; r++)
        CHECK((d4.row(r) - db.row(r)).norm() < 1e-9 * d4.row(r).norm());
}

TEST_CASE("bilaplacian value on a separable quadratic in 2-D") {
    auto g = Grid::build(Box::cube(2, 0.0, 1.0), {13, 13});
    GridFunction u = GridFunction::sample(g, [](const std::vector<double>& x) {
        return cplx(x[0] * x[0] * x[1] * x[1]);
    });
    auto ob = assemble_bilaplacian(g, 1.0);
    Eigen::VectorXcd ui(g->interior_count());
    for (long k = 0; k < g->interior_count(); k++) ui[k] = u.values[g->interior()[k]];
    Eigen::VectorXcd v = ob.mat * ui;
    // center node sits four layers from every face
    std::vector<int> center{6, 6};
    long row = g->interior_index(g->flat_index(center));
    CHECK(std::abs(v[row] - cplx(8.0)) < 1e-8);
}

TEST_CASE("h enters as its fourth power") {
    auto g = grid1d(15);
    auto op1 = assemble(g, {}, {}, 0.25);
    auto op2 = assemble(g, {}, {}, 0.5);
    Eigen::MatrixXcd d1(op1.mat), d2(op2.mat);
    CHECK((d2 - 16.0 * d1).norm() < 1e-10 * d2.norm());
}

TEST_CASE("conjugation by the zero weight is the identity") {
    auto g = grid1d(15);
    auto op = assemble(g, {}, {}, 0.5);
    Weight zero = Weight::general(PolySymbol(1));
    auto conj = conjugate(op, zero, 0.5);
    Eigen::MatrixXcd a(op.mat), b(conj.mat);
    CHECK((a - b).norm() == 0.0);
}

TEST_CASE("conjugation preserves the eigenvalue multiset") {
    auto g = grid1d(21);
    GridFunction q = constant(g, cplx(3.0));
    auto op = assemble(g, {}, q, 0.2);
    auto conj = conjugate(op, Weight::linear({Rat(1)}), 0.2);
    auto ev0 = eigenvalues_dense(op.mat);
    auto ev1 = eigenvalues_dense(conj.mat);
    REQUIRE(ev0.size() == ev1.size());
    double scale = 0.0;
    for (auto z : ev0) scale = std::max(scale, std::abs(z));
    for (std::size_t i = 0; i < ev0.size(); i++) CHECK(std::abs(ev0[i] - ev1[i]) <= 1e-8 * scale);
}

TEST_CASE("conjugation scales stencil couplings by weight increments") {
    auto g = grid1d(21);  // dx = 0.05
    double h = 0.1;
    auto op = assemble(g, {}, {}, h);
    auto conj = conjugate(op, Weight::linear({Rat(1)}), h);
    Eigen::MatrixXcd a(op.mat), b(conj.mat);
    long r = g->interior_count() / 2;
    for (long c = 0; c < g->interior_count(); c++) {
        if (std::abs(a(r, c)) == 0.0) continue;
        double factor = std::abs(b(r, c) / a(r, c));
        long off = c - r;
        CHECK(factor == doctest::Approx(std::exp(-0.5 * (double)off)).epsilon(1e-10));
    }
    CHECK_THROWS_AS(conjugate(op, Weight::linear({Rat(1)}), 0.3), std::invalid_argument);
}

TEST_CASE("sigma_min on explicit matrices") {
    SpMat id(3, 3);
    id.setIdentity();
    CHECK(sigma_min(id).value == doctest::Approx(1.0));

    SpMat d(2, 2);
    d.insert(0, 0) = cplx(2.0);
    d.insert(1, 1) = cplx(3.0);
    d.makeCompressed();
    SigmaResult s = sigma_min(d);
    CHECK(s.converged);
    CHECK(s.value == doctest::Approx(2.0));
    CHECK(sigma_min_dense(d) == doctest::Approx(2.0));
}

TEST_CASE("iterative sigma_min matches the dense oracle on a conjugated operator") {
    auto g = grid1d(41);
    double h = 0.2;
    auto conj = conjugate(assemble(g, {}, {}, h), Weight::linear({Rat(1)}), h);
    SigmaResult it = sigma_min(conj);
    double oracle = sigma_min_dense(conj);
    CHECK(it.converged);
    CHECK(std::fabs(it.value - oracle) <= 1e-6 * oracle);
}

TEST_CASE("sigma_min flags non-convergence at a starved iteration budget") {
    auto g = grid1d(41);
    auto conj = conjugate(assemble(g, {}, {}, 0.2), Weight::linear({Rat(1)}), 0.2);
    SigmaResult s = sigma_min(conj, 1e-14, 1);
    CHECK_FALSE(s.converged);
    CHECK(s.iterations == 1);
}

TEST_CASE("matrix is exactly symmetric for A = 0 and real q") {
    auto g = Grid::build(Box::cube(2, 0.0, 1.0), {9, 9});
    auto op = assemble(g, {}, constant(g, cplx(1.5)), 1.0);
    Eigen::MatrixXcd d(op.mat);
    CHECK((d - d.transpose()).norm() == 0.0);
}

TEST_CASE("stencil is exact on monomials of degree <= 5") {
    auto g = grid1d(21);
    for (int k = 0; k <= 5; k++) {
        GridFunction u = GridFunction::sample(
            g, [k](const std::vector<double>& x) { return cplx(std::pow(x[0], k)); });
        auto Lu = apply_operator(g, {}, {}, 1.0, u);
        for (long r = 0; r < g->interior_count(); r++) {
            double x = g->coord_axis(g->interior()[r], 0);
            double expect = (k == 4) ? 24.0 : (k == 5 ? 120.0 * x : 0.0);
            CHECK(std::abs(Lu[r] - cplx(expect)) < 1e-6);
        }
    }
}

TEST_CASE("discrete operator converges at second order on smooth fields") {
    double target = 16.0 * std::sin(1.0);  // (d^4/dx^4) sin(2x) at x = 1/2
    auto err = [&](int m) {
        auto g = grid1d(m);
        GridFunction u = GridFunction::sample(
            g, [](const std::vector<double>& x) { return cplx(std::sin(2.0 * x[0])); });
        auto Lu = apply_operator(g, {}, {}, 1.0, u);
        long node = g->flat_index({(m - 1) / 2});
        return std::abs(Lu[g->interior_index(node)] - cplx(target));
    };
    double e1 = err(21), e2 = err(41);
    CHECK(e1 / e2 > 3.0);
    CHECK(e1 / e2 < 5.2);
}

TEST_CASE("semiclassical norms") {
    auto g = grid1d(11);
    CHECK(norms(constant(g, cplx(1.0)), 0.3).l2 == doctest::Approx(1.0));

    GridFunction w = GridFunction::sample(
        g, [](const std::vector<double>& x) { return cplx(std::sin(3.0 * x[0])); });
    Norms n0 = norms(w, 0.0);
    CHECK(n0.h1scl == doctest::Approx(n0.l2));

    auto gf = grid1d(101);
    GridFunction s = GridFunction::sample(
        gf, [](const std::vector<double>& x) { return cplx(std::sin(M_PI * x[0])); });
    Norms n = norms(s, 0.3);
    double continuum = 0.5 + 0.09 * (M_PI * M_PI * 0.5);
    CHECK(std::fabs(n.h1scl * n.h1scl - continuum) < 1e-3);
    CHECK(n.h1scl >= n.l2);
}

TEST_CASE("exports are well formed") {
    auto g = grid1d(7);
    auto op = assemble(g, {}, {}, 1.0);
    std::string coord = to_coordinate_text(op);
    CHECK(coord.find(" ") != std::string::npos);
    GridFunction u = constant(g, cplx(1.0, -2.0));
    std::string csv = to_csv(u);
    CHECK(csv.rfind("x1,re,im\n", 0) == 0);
}
