#include <carlab/cauchy.hpp>

#include <carlab/rng.hpp>

#include <Eigen/SparseQR>

#include <algorithm>
#include <cmath>
#include <future>
#include <set>
#include <stdexcept>

namespace carlab {

namespace {

std::vector<long> face_node_ids(const Grid& g, const FaceId& face) {
    if (face.axis < 0 || face.axis >= g.dim()) throw std::invalid_argument("face axis out of range");
    if (face.side != 0 && face.side != 1) throw std::invalid_argument("face side must be 0 or 1");
    std::vector<long> out;
    int want = face.side == 0 ? 0 : g.nodes_on_axis(face.axis) - 1;
    for (long i = 0; i < g.node_count(); i++) {
        if (g.multi_index(i)[face.axis] == want) out.push_back(i);
    }
    return out;
}

// boundary surface measure: trapezoid weights over the non-face axes
double face_measure(const Grid& g, long node, int face_axis) {
    double w = 1.0;
    std::vector<int> idx = g.multi_index(node);
    for (int k = 0; k < g.dim(); k++) {
        if (k == face_axis) continue;
        double wk = (idx[k] == 0 || idx[k] == g.nodes_on_axis(k) - 1) ? 0.5 : 1.0;
        w *= wk * g.spacing(k);
    }
    return w;
}

// Outward normal difference of order k at a face node, written on the nodes
// 0..k+1 steps into the domain. Second-order one-sided stencils.
std::vector<std::pair<long, double>> normal_stencil(const Grid& g, const FaceId& face, long node,
                                                    int k) {
    static const std::vector<std::vector<double>> coeff = {
        {1.0},
        {1.5, -2.0, 0.5},           // (3 s0 - 4 s1 + s2) / 2
        {2.0, -5.0, 4.0, -1.0},
        {2.5, -9.0, 12.0, -7.0, 1.5},
    };
    double dx = g.spacing(face.axis);
    double scl = 1.0 / std::pow(dx, k);
    int dir = face.side == 0 ? +1 : -1;  // into the domain
    std::vector<int> idx = g.multi_index(node);
    std::vector<std::pair<long, double>> out;
    for (int j = 0; j < (int)coeff[k].size(); j++) {
        std::vector<int> id2 = idx;
        id2[face.axis] += dir * j;
        out.emplace_back(g.flat_index(id2), coeff[k][j] * scl);
    }
    return out;
}

std::vector<long> nodes_where_phi_above(const Grid& g, const Weight& phi, double level,
                                        bool interior_only) {
    PolySymbol::Compiled c = phi.phi().compile();
    int n = g.dim();
    std::vector<double> pt(2 * n, 0.0);
    std::vector<long> out;
    for (long i = 0; i < g.node_count(); i++) {
        if (interior_only && g.interior_index(i) < 0) continue;
        auto x = g.coord(i);
        std::copy(x.begin(), x.end(), pt.begin());
        if (c.evaluate(pt) > level) out.push_back(i);
    }
    return out;
}

}  // namespace

long CauchyProblem::gamma_node_count() const {
    long c = 0;
    for (const auto& fn : face_nodes) c += (long)fn.size();
    return c;
}

std::vector<long> CauchyProblem::omega0_nodes() const {
    return nodes_where_phi_above(*grid, phi, 0.0, false);
}

std::vector<long> CauchyProblem::omega_delta_nodes() const {
    return nodes_where_phi_above(*grid, phi, delta, false);
}

CauchyProblem manufacture(std::shared_ptr<const Grid> grid, const ScalarField& u_true,
                          const std::vector<GridFunction>& A, const GridFunction& q,
                          const std::vector<FaceId>& gamma, const Weight& phi, double delta,
                          SourceMode mode, const ScalarField& Lu_analytic) {
    if (!(delta > 0.0)) throw std::invalid_argument("delta must be positive");
    if (gamma.empty()) throw std::invalid_argument("Gamma must contain at least one face");
    if (phi.dim() != grid->dim()) throw std::invalid_argument("weight dimension mismatch");
    if (mode == SourceMode::Analytic && !Lu_analytic)
        throw std::invalid_argument("analytic source mode needs a closed form for L u_true");

    CauchyProblem p{grid, gamma, {}, {}, {}, {}, A, q, phi, delta, GridFunction(grid), true};
    p.u_true = GridFunction::sample(grid, u_true);

    p.omega0_rows = nodes_where_phi_above(*grid, phi, 0.0, true);
    if (p.omega0_rows.empty()) throw std::invalid_argument("Omega_0 = {phi > 0} is empty on the grid");
    if (nodes_where_phi_above(*grid, phi, delta, false).empty())
        throw std::invalid_argument("Omega_delta = {phi > delta} is empty on the grid");

    // boundary of Omega_0 must be accessible: every boundary node with
    // phi > 0 has to lie on some Gamma face
    {
        std::set<long> on_gamma;
        for (const auto& f : gamma)
            for (long id : face_node_ids(*grid, f)) on_gamma.insert(id);
        PolySymbol::Compiled c = phi.phi().compile();
        int n = grid->dim();
        std::vector<double> pt(2 * n, 0.0);
        for (long i = 0; i < grid->node_count(); i++) {
            std::vector<int> idx = grid->multi_index(i);
            bool on_boundary = false;
            for (int j = 0; j < n; j++)
                if (idx[j] == 0 || idx[j] == grid->nodes_on_axis(j) - 1) on_boundary = true;
            if (!on_boundary) continue;
            auto x = grid->coord(i);
            std::copy(x.begin(), x.end(), pt.begin());
            if (c.evaluate(pt) > 0.0 && !on_gamma.count(i))
                throw std::invalid_argument("boundary of Omega_0 is not contained in Gamma");
        }
    }

    if (mode == SourceMode::Discrete) {
        std::vector<cplx> Lu = apply_operator(grid, A, q, 1.0, p.u_true);
        p.f.reserve(p.omega0_rows.size());
        for (long node : p.omega0_rows) p.f.push_back(Lu[grid->interior_index(node)]);
    } else {
        p.f.reserve(p.omega0_rows.size());
        for (long node : p.omega0_rows) p.f.push_back(Lu_analytic(grid->coord(node)));
    }

    for (const auto& face : gamma) {
        p.face_nodes.push_back(face_node_ids(*grid, face));
        for (long node : p.face_nodes.back()) {
            for (int k = 0; k < 4; k++) {
                cplx v(0.0);
                for (auto [col, w] : normal_stencil(*grid, face, node, k))
                    v += w * p.u_true.values[col];
                p.g[k].push_back(v);
            }
        }
    }
    return p;
}

namespace {

struct Stack {
    std::vector<Eigen::Triplet<cplx>> trip;
    std::vector<cplx> rhs;
    long rows = 0;

    void add(long col, cplx v) { trip.emplace_back((int)rows, (int)col, v); }
    void close(cplx b) {
        rhs.push_back(b);
        rows++;
    }
};

}  // namespace

SolveResult solve(const CauchyProblem& p, double lambda, double gamma_weight) {
    if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be positive");
    if (!(gamma_weight > 0.0)) throw std::invalid_argument("gamma weight must be positive");
    const auto& grid = p.grid;
    int n = grid->dim();
    long N = grid->node_count();

    Stack st;

    // residual rows over Omega_0
    {
        SpMat R = assemble_rows_full(grid, p.A, p.q, 1.0);
        SpMat Rt = SpMat(R.transpose());  // row access
        for (std::size_t k = 0; k < p.omega0_rows.size(); k++) {
            long node = p.omega0_rows[k];
            long r = grid->interior_index(node);
            double w = std::sqrt(grid->quad_weight(node));
            for (SpMat::InnerIterator it(Rt, (int)r); it; ++it) st.add(it.row(), w * it.value());
            st.close(w * p.f[k]);
        }
    }

    // penalty rows for the four normal data sets
    {
        long cursor = 0;
        for (std::size_t fi = 0; fi < p.gamma.size(); fi++) {
            for (long node : p.face_nodes[fi]) {
                double wb = face_measure(*grid, node, p.gamma[fi].axis);
                double w = std::sqrt(gamma_weight * wb);
                for (int k = 0; k < 4; k++) {
                    for (auto [col, c] : normal_stencil(*grid, p.gamma[fi], node, k))
                        st.add(col, w * c);
                    st.close(w * p.g[k][cursor]);
                }
                cursor++;
            }
        }
    }

    // H1 regularization rows: mass and forward differences
    {
        double sl = std::sqrt(lambda);
        for (long i = 0; i < N; i++) {
            st.add(i, sl * std::sqrt(grid->quad_weight(i)));
            st.close(cplx(0.0));
        }
        for (long i = 0; i < N; i++) {
            std::vector<int> idx = grid->multi_index(i);
            for (int j = 0; j < n; j++) {
                if (idx[j] + 1 >= grid->nodes_on_axis(j)) continue;
                std::vector<int> id2 = idx;
                id2[j] += 1;
                long i2 = grid->flat_index(id2);
                double vol = grid->spacing(j);
                for (int k = 0; k < n; k++) {
                    if (k == j) continue;
                    double wk = (idx[k] == 0 || idx[k] == grid->nodes_on_axis(k) - 1) ? 0.5 : 1.0;
                    vol *= wk * grid->spacing(k);
                }
                double w = sl * std::sqrt(vol) / grid->spacing(j);
                st.add(i, -w);
                st.add(i2, w);
                st.close(cplx(0.0));
            }
        }
    }

    SpMat S(st.rows, N);
    S.setFromTriplets(st.trip.begin(), st.trip.end());
    S.makeCompressed();
    Eigen::VectorXcd b = Eigen::Map<const Eigen::VectorXcd>(st.rhs.data(), st.rows);

    Eigen::SparseQR<SpMat, Eigen::COLAMDOrdering<int>> qr(S);
    if (qr.info() != Eigen::Success) throw std::runtime_error("least-squares factorization failed");
    Eigen::VectorXcd u = qr.solve(b);

    SolveResult out;
    out.u = GridFunction(grid);
    std::copy(u.data(), u.data() + N, out.u.values.begin());
    out.stack_rows = st.rows;

    // minimizer characterization: S^H (S u - b) ~ 0
    Eigen::VectorXcd resid = S * u - b;
    double num = (S.adjoint() * resid).norm();
    double den = std::max((S.adjoint() * b).norm(), (S.adjoint() * (S * u)).norm());
    out.rel_residual = den > 0.0 ? num / den : num;
    out.converged = out.rel_residual <= 1e-8;
    return out;
}

namespace {

double l2_weighted(const Grid& g, const std::vector<long>& nodes, const std::vector<cplx>& vals,
                   bool boundary, int face_axis) {
    double s = 0.0;
    for (std::size_t i = 0; i < nodes.size(); i++) {
        double w = boundary ? face_measure(g, nodes[i], face_axis) : g.quad_weight(nodes[i]);
        s += w * std::norm(vals[i]);
    }
    return std::sqrt(s);
}

StabilityTrial run_trial(const CauchyProblem& p, double level, std::uint64_t seed, double lambda,
                         double gamma_weight) {
    Rng rng(seed);
    CauchyProblem noisy = p;

    auto rms = [](const std::vector<cplx>& v) {
        if (v.empty()) return 0.0;
        double s = 0.0;
        for (auto z : v) s += std::norm(z);
        return std::sqrt(s / (double)v.size());
    };
    auto perturb = [&](std::vector<cplx>& v) {
        double s = rms(v) * level;
        std::vector<cplx> delta(v.size());
        const double inv_sqrt2 = 0.70710678118654752440;
        for (auto& d : delta) d = s * inv_sqrt2 * cplx(rng.gaussian(), rng.gaussian());
        for (std::size_t i = 0; i < v.size(); i++) v[i] += delta[i];
        return delta;
    };

    std::vector<cplx> df = perturb(noisy.f);
    std::array<std::vector<cplx>, 4> dg;
    for (int k = 0; k < 4; k++) dg[k] = perturb(noisy.g[k]);

    StabilityTrial t;
    t.level = level;

    // F: size of the injected data perturbation, in the discrete norms
    t.F = l2_weighted(*p.grid, p.omega0_rows, df, false, 0);
    {
        long cursor = 0;
        for (std::size_t fi = 0; fi < p.gamma.size(); fi++) {
            long cnt = (long)p.face_nodes[fi].size();
            for (int k = 0; k < 4; k++) {
                std::vector<cplx> piece(dg[k].begin() + cursor, dg[k].begin() + cursor + cnt);
                t.F += l2_weighted(*p.grid, p.face_nodes[fi], piece, true, p.gamma[fi].axis);
            }
            cursor += cnt;
        }
    }

    SolveResult sr = solve(noisy, lambda, gamma_weight);
    t.converged = sr.converged;

    GridFunction diff(p.grid);
    for (long i = 0; i < p.grid->node_count(); i++)
        diff.values[i] = sr.u.values[i] - p.u_true.values[i];
    t.M = h1_norm_on(diff, p.omega0_nodes());
    t.error = h1_norm_on(diff, p.omega_delta_nodes());
    return t;
}

}  // namespace

StabilityFit stability_fit(const CauchyProblem& p, const std::vector<double>& noise_levels,
                           int trials_per_level, std::uint64_t seed, double lambda,
                           double gamma_weight) {
    if (!p.has_truth) throw std::invalid_argument("stability fit needs a manufactured ground truth");
    if (trials_per_level < 1) throw std::invalid_argument("need at least one trial per level");
    {
        std::vector<double> pos;
        for (double l : noise_levels) {
            if (l < 0.0) throw std::invalid_argument("noise levels must be non-negative");
            if (l > 0.0) pos.push_back(l);
        }
        if (pos.size() < 4) throw std::invalid_argument("need at least 4 positive noise levels");
        auto [lo, hi] = std::minmax_element(pos.begin(), pos.end());
        if (*hi / *lo < 100.0)
            throw std::invalid_argument("noise levels must span at least a factor of 100");
    }

    StabilityFit fit;
    fit.delta = p.delta;

    std::vector<std::future<StabilityTrial>> futures;
    for (std::size_t li = 0; li < noise_levels.size(); li++) {
        for (int t = 0; t < trials_per_level; t++) {
            std::uint64_t s = Rng::derive(seed, li * (std::size_t)trials_per_level + t);
            futures.push_back(std::async(std::launch::async, run_trial, std::cref(p),
                                         noise_levels[li], s, lambda, gamma_weight));
        }
    }
    for (auto& fu : futures) fit.trials.push_back(fu.get());

    // Phi = sup of phi over the bounding box of Omega_0
    {
        auto nodes = p.omega0_nodes();
        Box bb = Box::cube(p.grid->dim(), 0.0, 0.0);
        for (int j = 0; j < p.grid->dim(); j++) {
            double lo = HUGE_VAL, hi = -HUGE_VAL;
            for (long id : nodes) {
                double c = p.grid->coord_axis(id, j);
                lo = std::min(lo, c);
                hi = std::max(hi, c);
            }
            bb.iv[j] = {lo, std::max(hi, lo + 1e-12)};
        }
        fit.Phi = p.phi.sup_on_box(bb).value;
    }
    fit.theta_pred = (fit.Phi > p.delta) ? p.delta / (2.0 * fit.Phi - p.delta)
                                         : std::numeric_limits<double>::quiet_NaN();

    // log error vs log F over usable trials
    std::vector<double> lx, ly;
    for (auto& t : fit.trials) {
        bool usable = t.converged && t.F > 0.0 && t.error > 0.0;
        t.in_fit = usable;
        if (usable) {
            lx.push_back(std::log(t.F));
            ly.push_back(std::log(t.error));
        } else {
            fit.excluded++;
        }
    }
    if (lx.size() < 4) throw std::runtime_error("too few usable trials for the stability fit");
    int m = (int)lx.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int i = 0; i < m; i++) {
        sx += lx[i];
        sy += ly[i];
        sxx += lx[i] * lx[i];
        sxy += lx[i] * ly[i];
    }
    double den = m * sxx - sx * sx;
    if (!(std::fabs(den) > 0.0)) throw std::runtime_error("degenerate stability fit");
    fit.theta_hat = (m * sxy - sx * sy) / den;
    double intercept = (sy - fit.theta_hat * sx) / m;
    fit.C = std::exp(intercept);
    double ym = sy / m, ss_res = 0, ss_tot = 0;
    for (int i = 0; i < m; i++) {
        double pr = fit.theta_hat * lx[i] + intercept;
        ss_res += (ly[i] - pr) * (ly[i] - pr);
        ss_tot += (ly[i] - ym) * (ly[i] - ym);
    }
    fit.r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
    if (m > 2) {
        double se = std::sqrt(ss_res / (m - 2) / (sxx - sx * sx / m));
        fit.theta_half_width = 1.96 * se;
    }
    return fit;
}

std::vector<long> nodes_in_box(const Grid& g, const Box& b) {
    if (b.dim() != g.dim()) throw std::invalid_argument("mask box dimension mismatch");
    std::vector<long> out;
    for (long i = 0; i < g.node_count(); i++) {
        bool in = true;
        for (int j = 0; j < g.dim(); j++) {
            double c = g.coord_axis(i, j);
            double slack = 1e-9 * g.spacing(j);  // absorb coordinate rounding at the edges
            if (c < b.iv[j].first - slack || c > b.iv[j].second + slack) in = false;
        }
        if (in) out.push_back(i);
    }
    return out;
}

std::vector<long> nodes_in_ball(const Grid& g, const std::vector<double>& center, double radius) {
    if ((int)center.size() != g.dim()) throw std::invalid_argument("mask center dimension mismatch");
    std::vector<long> out;
    for (long i = 0; i < g.node_count(); i++) {
        double s = 0.0;
        for (int j = 0; j < g.dim(); j++) {
            double d = g.coord_axis(i, j) - center[j];
            s += d * d;
        }
        if (s < radius * radius) out.push_back(i);
    }
    return out;
}

double h1_norm_on(const GridFunction& v, const std::vector<long>& nodes) {
    const auto& g = v.grid;
    std::vector<std::uint8_t> mask(g->node_count(), 0);
    for (long id : nodes) mask[id] = 1;
    double s = 0.0;
    for (long id : nodes) s += g->quad_weight(id) * std::norm(v.values[id]);
    for (long id : nodes) {
        std::vector<int> idx = g->multi_index(id);
        for (int j = 0; j < g->dim(); j++) {
            if (idx[j] + 1 >= g->nodes_on_axis(j)) continue;
            std::vector<int> id2 = idx;
            id2[j] += 1;
            long i2 = g->flat_index(id2);
            if (!mask[i2]) continue;
            cplx d = (v.values[i2] - v.values[id]) / g->spacing(j);
            double vol = g->spacing(j);
            for (int k = 0; k < g->dim(); k++) {
                if (k == j) continue;
                double wk = (idx[k] == 0 || idx[k] == g->nodes_on_axis(k) - 1) ? 0.5 : 1.0;
                vol *= wk * g->spacing(k);
            }
            s += vol * std::norm(d);
        }
    }
    return std::sqrt(s);
}

CaccioppoliReport caccioppoli_ratio(const GridFunction& u, double r, double rho,
                                    const std::vector<GridFunction>& A, const GridFunction& q,
                                    double tol) {
    if (!u.grid) throw std::invalid_argument("grid function is empty");
    if (!(0.0 < rho && rho < r && r < 1.0)) throw std::invalid_argument("need 0 < rho < r < 1");
    const auto& g = u.grid;
    int n = g->dim();

    auto radius = [&](long id) {
        double s = 0.0;
        for (int j = 0; j < n; j++) {
            double c = g->coord_axis(id, j);
            s += c * c;
        }
        return std::sqrt(s);
    };

    // the field must solve the equation on the unit ball
    double umax = 0.0, res_max = 0.0;
    {
        std::vector<cplx> Lu = apply_operator(g, A, q, 1.0, u);
        for (long k = 0; k < g->interior_count(); k++) {
            long id = g->interior()[k];
            if (radius(id) >= 1.0) continue;
            umax = std::max(umax, std::abs(u.values[id]));
            res_max = std::max(res_max, std::abs(Lu[k]));
        }
        if (res_max > tol * (1.0 + umax))
            throw std::invalid_argument("u does not solve L u = 0 on the masked ball");
    }

    double cell = 1.0;
    for (int j = 0; j < n; j++) cell *= g->spacing(j);

    CaccioppoliReport rep;
    rep.max_equation_residual = res_max;

    // inner annulus: per-axis second and third central differences
    for (long k = 0; k < g->interior_count(); k++) {
        long id = g->interior()[k];
        double rr = radius(id);
        if (!(rr > rho && rr < r)) continue;
        std::vector<int> idx = g->multi_index(id);
        double acc = 0.0;
        for (int j = 0; j < n; j++) {
            double dx = g->spacing(j);
            auto at = [&](int off) {
                std::vector<int> id2 = idx;
                id2[j] += off;
                return u.values[g->flat_index(id2)];
            };
            cplx d2 = (at(-1) - 2.0 * at(0) + at(1)) / (dx * dx);
            cplx d3 = (-at(-2) + 2.0 * at(-1) - 2.0 * at(1) + at(2)) / (2.0 * dx * dx * dx);
            acc += std::norm(d2) + std::norm(d3);
        }
        rep.lhs += cell * acc;
        rep.lhs_nodes++;
    }
    if (rep.lhs_nodes == 0) throw std::invalid_argument("inner annulus contains no grid nodes");

    // outer annulus: values and first central differences
    for (long id = 0; id < g->node_count(); id++) {
        double rr = radius(id);
        if (!(rr > 0.5 * rho && rr < 2.0 * r)) continue;
        std::vector<int> idx = g->multi_index(id);
        bool can_diff = true;
        for (int j = 0; j < n; j++)
            if (idx[j] < 1 || idx[j] > g->nodes_on_axis(j) - 2) can_diff = false;
        if (!can_diff) continue;
        double acc = std::norm(u.values[id]);
        for (int j = 0; j < n; j++) {
            std::vector<int> lo = idx, hi = idx;
            lo[j] -= 1;
            hi[j] += 1;
            cplx d = (u.values[g->flat_index(hi)] - u.values[g->flat_index(lo)]) / (2.0 * g->spacing(j));
            acc += std::norm(d);
        }
        rep.rhs += cell * acc;
        rep.rhs_nodes++;
    }
    if (rep.rhs_nodes == 0 || !(rep.rhs > 0.0))
        throw std::invalid_argument("outer annulus contains no usable grid nodes");

    rep.ratio = rep.lhs * (r - rho) * (r - rho) / rep.rhs;
    return rep;
}

UcpGapReport ucp_gap(std::shared_ptr<const Grid> grid, const std::vector<long>& omega,
                     const std::vector<GridFunction>& A, const GridFunction& q) {
    std::vector<std::uint8_t> in_omega(grid->node_count(), 0);
    long inside = 0;
    for (long id : omega) {
        if (id < 0 || id >= grid->node_count()) throw std::invalid_argument("omega node out of range");
        if (!in_omega[id] && grid->interior_index(id) >= 0) inside++;
        in_omega[id] = 1;
    }
    if (inside == 0) throw std::invalid_argument("omega contains no interior nodes");
    if (inside == grid->interior_count())
        throw std::invalid_argument("omega covers the whole interior");

    DiscreteOperator op = assemble(grid, A, q, 1.0);

    std::vector<long> keep;  // interior indices of the surviving columns
    for (long k = 0; k < grid->interior_count(); k++)
        if (!in_omega[grid->interior()[k]]) keep.push_back(k);

    long rows = grid->interior_count();
    if (rows > 4000) throw std::invalid_argument("ucp gap probe is dense-only at desk scale");

    Eigen::MatrixXcd M(rows, (long)keep.size());
    Eigen::MatrixXcd D(op.mat);
    for (std::size_t c = 0; c < keep.size(); c++) M.col(c) = D.col(keep[c]);

    // L2 Gram normalization on both sides
    for (long rix = 0; rix < rows; rix++)
        M.row(rix) *= std::sqrt(grid->quad_weight(grid->interior()[rix]));
    for (std::size_t c = 0; c < keep.size(); c++)
        M.col(c) /= std::sqrt(grid->quad_weight(grid->interior()[keep[c]]));

    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(M);
    UcpGapReport rep;
    rep.gap = svd.singularValues().tail(1)(0);
    rep.omega_nodes = inside;
    rep.columns = (long)keep.size();
    return rep;
}

}  // namespace carlab
