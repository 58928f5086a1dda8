#include <carlab/fdgrid.hpp>

#include <carlab/rng.hpp>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace carlab {

std::shared_ptr<const Grid> Grid::build(const Box& box, const std::vector<int>& nodes) {
    if (box.dim() < 1) throw std::invalid_argument("grid needs at least one axis");
    if ((int)nodes.size() != box.dim()) throw std::invalid_argument("node count per axis mismatch");
    auto g = std::shared_ptr<Grid>(new Grid());
    g->box_ = box;
    g->m_ = nodes;
    int n = box.dim();
    g->dx_.resize(n);
    for (int j = 0; j < n; j++) {
        if (nodes[j] < 7) throw std::invalid_argument("need at least 7 nodes per axis");
        double lo = box.iv[j].first, hi = box.iv[j].second;
        if (!(lo < hi)) throw std::invalid_argument("degenerate box interval");
        g->dx_[j] = (hi - lo) / (nodes[j] - 1);
    }
    g->strides_.resize(n);
    long s = 1;
    for (int j = 0; j < n; j++) {
        g->strides_[j] = s;
        s *= nodes[j];
    }
    g->total_ = s;

    g->full_to_interior_.assign(g->total_, -1);
    std::vector<int> idx(n, 0);
    for (long node = 0; node < g->total_; node++) {
        bool inner = true;
        for (int j = 0; j < n; j++)
            if (idx[j] < 2 || idx[j] > nodes[j] - 3) inner = false;
        if (inner) {
            g->full_to_interior_[node] = (long)g->interior_.size();
            g->interior_.push_back(node);
        }
        for (int j = 0; j < n; j++) {
            if (++idx[j] < nodes[j]) break;
            idx[j] = 0;
        }
    }
    return g;
}

double Grid::max_spacing() const { return *std::max_element(dx_.begin(), dx_.end()); }

std::vector<int> Grid::multi_index(long node) const {
    std::vector<int> idx(dim());
    for (int j = 0; j < dim(); j++) idx[j] = (int)((node / strides_[j]) % m_[j]);
    return idx;
}

long Grid::flat_index(const std::vector<int>& idx) const {
    long node = 0;
    for (int j = 0; j < dim(); j++) {
        if (idx[j] < 0 || idx[j] >= m_[j]) throw std::out_of_range("grid index out of range");
        node += strides_[j] * idx[j];
    }
    return node;
}

std::vector<double> Grid::coord(long node) const {
    std::vector<double> x(dim());
    for (int j = 0; j < dim(); j++) x[j] = coord_axis(node, j);
    return x;
}

double Grid::coord_axis(long node, int j) const {
    long i = (node / strides_[j]) % m_[j];
    return box_.iv[j].first + dx_[j] * (double)i;
}

bool Grid::is_interior_multi(const std::vector<int>& idx) const {
    for (int j = 0; j < dim(); j++)
        if (idx[j] < 2 || idx[j] > m_[j] - 3) return false;
    return true;
}

double Grid::quad_weight(long node) const {
    double w = 1.0;
    for (int j = 0; j < dim(); j++) {
        long i = (node / strides_[j]) % m_[j];
        double wj = (i == 0 || i == m_[j] - 1) ? 0.5 : 1.0;
        w *= wj * dx_[j];
    }
    return w;
}

namespace {

void check_field(const std::shared_ptr<const Grid>& grid, const GridFunction& f, const char* what) {
    if (!f.grid) return;  // empty field means zero
    if (f.grid.get() != grid.get() || (long)f.values.size() != grid->node_count())
        throw std::invalid_argument(std::string(what) + " not sampled on this grid");
}

// rows at interior nodes, columns over all nodes
SpMat stencil_rows(const std::shared_ptr<const Grid>& grid, const std::vector<GridFunction>& A,
                   const GridFunction& q, double h) {
    int n = grid->dim();
    if (!A.empty() && (int)A.size() != n)
        throw std::invalid_argument("A must have one component per axis");
    for (const auto& Aj : A) check_field(grid, Aj, "A");
    check_field(grid, q, "q");

    double h4 = h * h * h * h;
    std::vector<Eigen::Triplet<cplx>> trip;
    trip.reserve(grid->interior_count() * (5 * n + 1));
    const int off4[5] = {-2, -1, 0, 1, 2};
    const double w4[5] = {1.0, -4.0, 6.0, -4.0, 1.0};

    for (long r = 0; r < grid->interior_count(); r++) {
        long node = grid->interior()[r];
        std::vector<int> idx = grid->multi_index(node);
        cplx diag(0.0);
        if (q.grid) diag += h4 * q.values[node];
        for (int j = 0; j < n; j++) {
            double inv4 = h4 / std::pow(grid->spacing(j), 4);
            std::vector<int> id2 = idx;
            for (int k = 0; k < 5; k++) {
                id2[j] = idx[j] + off4[k];
                long col = grid->flat_index(id2);
                if (off4[k] == 0)
                    diag += inv4 * w4[k];
                else
                    trip.emplace_back((int)r, (int)col, cplx(inv4 * w4[k]));
            }
            if (!A.empty() && A[j].grid) {
                cplx c = h4 * A[j].values[node] * cplx(0.0, -1.0) / (2.0 * grid->spacing(j));
                id2[j] = idx[j] - 1;
                trip.emplace_back((int)r, (int)grid->flat_index(id2), -c);
                id2[j] = idx[j] + 1;
                trip.emplace_back((int)r, (int)grid->flat_index(id2), c);
            }
            id2[j] = idx[j];
        }
        trip.emplace_back((int)r, (int)node, diag);
    }
    SpMat M(grid->interior_count(), grid->node_count());
    M.setFromTriplets(trip.begin(), trip.end());
    return M;
}

SpMat restrict_columns_to_interior(const std::shared_ptr<const Grid>& grid, const SpMat& rows) {
    std::vector<Eigen::Triplet<cplx>> trip;
    trip.reserve(rows.nonZeros());
    for (int k = 0; k < rows.outerSize(); ++k)
        for (SpMat::InnerIterator it(rows, k); it; ++it) {
            long ic = grid->interior_index(it.col());
            if (ic >= 0) trip.emplace_back((int)it.row(), (int)ic, it.value());
        }
    SpMat M(grid->interior_count(), grid->interior_count());
    M.setFromTriplets(trip.begin(), trip.end());
    return M;
}

}  // namespace

SpMat assemble_rows_full(const std::shared_ptr<const Grid>& grid,
                         const std::vector<GridFunction>& A, const GridFunction& q, double h) {
    if (!(h > 0.0 && h <= 1.0)) throw std::invalid_argument("h must lie in (0,1]");
    return stencil_rows(grid, A, q, h);
}

DiscreteOperator assemble(std::shared_ptr<const Grid> grid, const std::vector<GridFunction>& A,
                          const GridFunction& q, double h) {
    if (!(h > 0.0 && h <= 1.0)) throw std::invalid_argument("h must lie in (0,1]");
    DiscreteOperator op;
    op.grid = grid;
    op.h = h;
    op.kind = OpKind::FourthSum;
    op.mat = restrict_columns_to_interior(grid, stencil_rows(grid, A, q, h));
    op.A = A;
    op.q = q;
    return op;
}

DiscreteOperator assemble_bilaplacian(std::shared_ptr<const Grid> grid, double h) {
    if (!(h > 0.0 && h <= 1.0)) throw std::invalid_argument("h must lie in (0,1]");
    int n = grid->dim();
    std::vector<Eigen::Triplet<cplx>> trip;
    for (long r = 0; r < grid->interior_count(); r++) {
        long node = grid->interior()[r];
        std::vector<int> idx = grid->multi_index(node);
        for (int j = 0; j < n; j++) {
            double c = h * h / (grid->spacing(j) * grid->spacing(j));
            std::vector<int> id2 = idx;
            for (int off : {-1, 0, 1}) {
                id2[j] = idx[j] + off;
                long ic = grid->interior_index(grid->flat_index(id2));
                if (ic >= 0) trip.emplace_back((int)r, (int)ic, cplx(c * (off == 0 ? 2.0 : -1.0)));
            }
        }
    }
    SpMat K(grid->interior_count(), grid->interior_count());
    K.setFromTriplets(trip.begin(), trip.end());

    DiscreteOperator op;
    op.grid = grid;
    op.h = h;
    op.kind = OpKind::Bilaplacian;
    op.mat = (K * K).pruned();
    return op;
}

std::vector<cplx> apply_operator(const std::shared_ptr<const Grid>& grid,
                                 const std::vector<GridFunction>& A, const GridFunction& q,
                                 double h, const GridFunction& u) {
    check_field(grid, u, "u");
    if (!u.grid) throw std::invalid_argument("u must be sampled on the grid");
    SpMat rows = stencil_rows(grid, A, q, h);
    Eigen::VectorXcd uv = Eigen::Map<const Eigen::VectorXcd>(u.values.data(), (long)u.values.size());
    Eigen::VectorXcd r = rows * uv;
    return std::vector<cplx>(r.data(), r.data() + r.size());
}

DiscreteOperator conjugate(const DiscreteOperator& op, const Weight& w, double h) {
    if (h != op.h) throw std::invalid_argument("conjugation h must match the assembled operator");
    if (w.dim() != op.grid->dim()) throw std::invalid_argument("weight dimension mismatch");
    PolySymbol::Compiled phi = w.phi().compile();
    int n = op.grid->dim();
    std::vector<double> pt(2 * n, 0.0);
    std::vector<double> phival(op.grid->interior_count());
    for (long r = 0; r < op.grid->interior_count(); r++) {
        auto x = op.grid->coord(op.grid->interior()[r]);
        std::copy(x.begin(), x.end(), pt.begin());
        phival[r] = phi.evaluate(pt);
    }
    DiscreteOperator out = op;
    out.weight = w.describe();
    for (int k = 0; k < out.mat.outerSize(); ++k)
        for (SpMat::InnerIterator it(out.mat, k); it; ++it)
            it.valueRef() *= std::exp((phival[it.row()] - phival[it.col()]) / h);
    return out;
}

SigmaResult sigma_min(const SpMat& mat, double tol, int max_iter) {
    if (mat.rows() != mat.cols()) throw std::invalid_argument("sigma_min needs a square operator");
    if (mat.rows() == 0) throw std::invalid_argument("empty operator");
    SpMat A = mat;
    A.makeCompressed();
    SpMat AH = SpMat(mat.adjoint());
    AH.makeCompressed();
    Eigen::SparseLU<SpMat> luA, luAH;
    luA.compute(A);
    luAH.compute(AH);
    if (luA.info() != Eigen::Success || luAH.info() != Eigen::Success)
        return {0.0, false, 0};

    Rng rng(0x5eed5eedULL);
    Eigen::VectorXcd v(mat.rows());
    for (long i = 0; i < v.size(); i++) v[i] = cplx(rng.gaussian(), rng.gaussian());
    v.normalize();

    double sigma = 0.0, prev = -1.0;
    int it = 0;
    for (; it < max_iter; it++) {
        Eigen::VectorXcd z = luAH.solve(v);
        Eigen::VectorXcd y = luA.solve(z);
        double nrm = y.norm();
        if (!(nrm > 0.0) || !std::isfinite(nrm)) return {sigma, false, it};
        v = y / nrm;
        sigma = (A * v).norm();
        if (prev > 0.0 && std::fabs(sigma - prev) <= tol * sigma) return {sigma, true, it + 1};
        prev = sigma;
    }
    return {sigma, false, it};
}

SigmaResult sigma_min(const DiscreteOperator& op, double tol, int max_iter) {
    return sigma_min(op.mat, tol, max_iter);
}

double sigma_min_dense(const SpMat& mat) {
    Eigen::MatrixXcd D(mat);
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(D);
    return svd.singularValues().tail(1)(0);
}

double sigma_min_dense(const DiscreteOperator& op) { return sigma_min_dense(op.mat); }

SigmaResult sigma_min_h1scl(const DiscreteOperator& op) {
    const auto& grid = op.grid;
    long ni = grid->interior_count();
    if (ni > 3000) throw std::invalid_argument("h1scl norm mode is dense-only at desk scale");
    int n = grid->dim();
    double h = op.h;

    // G = I + h^2 sum_j D_j^T D_j over interior functions with zero extension;
    // every forward edge touching an interior node contributes
    Eigen::MatrixXd G = Eigen::MatrixXd::Identity(ni, ni);
    for (long node = 0; node < grid->node_count(); node++) {
        std::vector<int> idx = grid->multi_index(node);
        long a = grid->interior_index(node);
        for (int j = 0; j < n; j++) {
            if (idx[j] + 1 >= grid->nodes_on_axis(j)) continue;
            std::vector<int> id2 = idx;
            id2[j] += 1;
            long b = grid->interior_index(grid->flat_index(id2));
            if (a < 0 && b < 0) continue;
            double inv = h / grid->spacing(j);
            if (a >= 0) G(a, a) += inv * inv;
            if (b >= 0) G(b, b) += inv * inv;
            if (a >= 0 && b >= 0) {
                G(a, b) -= inv * inv;
                G(b, a) -= inv * inv;
            }
        }
    }
    Eigen::LLT<Eigen::MatrixXd> llt(G);
    if (llt.info() != Eigen::Success) throw std::runtime_error("H1scl Gram factorization failed");
    Eigen::MatrixXcd L = llt.matrixL().toDenseMatrix().cast<cplx>();
    Eigen::MatrixXcd D(op.mat);
    // sigma_G = smallest singular value of A * L^{-T}
    Eigen::MatrixXcd Mt = L.triangularView<Eigen::Lower>().solve(D.transpose());
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(Mt.transpose());
    double s = svd.singularValues().tail(1)(0);
    return {s, true, 1};
}

std::vector<cplx> eigenvalues_dense(const SpMat& mat) {
    Eigen::MatrixXcd D(mat);
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(D, false);
    std::vector<cplx> ev(es.eigenvalues().data(), es.eigenvalues().data() + D.rows());
    std::sort(ev.begin(), ev.end(), [](cplx a, cplx b) {
        if (a.real() != b.real()) return a.real() < b.real();
        return a.imag() < b.imag();
    });
    return ev;
}

Norms norms(const GridFunction& u, double h) {
    if (!u.grid) throw std::invalid_argument("grid function is empty");
    if (h < 0.0) throw std::invalid_argument("h must be non-negative");
    const auto& grid = u.grid;
    int n = grid->dim();
    double l2sq = 0.0;
    for (long i = 0; i < grid->node_count(); i++) l2sq += grid->quad_weight(i) * std::norm(u.values[i]);

    double gradsq = 0.0;
    for (long i = 0; i < grid->node_count(); i++) {
        std::vector<int> idx = grid->multi_index(i);
        for (int j = 0; j < n; j++) {
            if (idx[j] + 1 >= grid->nodes_on_axis(j)) continue;
            std::vector<int> id2 = idx;
            id2[j] += 1;
            cplx d = (u.values[grid->flat_index(id2)] - u.values[i]) / grid->spacing(j);
            // cell measure: dx along the edge, trapezoid transverse
            double w = grid->spacing(j);
            for (int k = 0; k < n; k++) {
                if (k == j) continue;
                long ik = idx[k];
                double wk = (ik == 0 || ik == grid->nodes_on_axis(k) - 1) ? 0.5 : 1.0;
                w *= wk * grid->spacing(k);
            }
            gradsq += w * std::norm(d);
        }
    }
    Norms out;
    out.l2 = std::sqrt(l2sq);
    out.h1scl = std::sqrt(l2sq + h * h * gradsq);
    return out;
}

std::string to_coordinate_text(const DiscreteOperator& op) {
    std::ostringstream os;
    os.precision(17);
    for (int k = 0; k < op.mat.outerSize(); ++k)
        for (SpMat::InnerIterator it(op.mat, k); it; ++it)
            os << it.row() << " " << it.col() << " " << it.value().real() << " "
               << it.value().imag() << "\n";
    return os.str();
}

std::string to_csv(const GridFunction& u) {
    std::ostringstream os;
    os.precision(17);
    int n = u.grid->dim();
    for (int j = 0; j < n; j++) os << "x" << (j + 1) << ",";
    os << "re,im\n";
    for (long i = 0; i < u.grid->node_count(); i++) {
        for (int j = 0; j < n; j++) os << u.grid->coord_axis(i, j) << ",";
        os << u.values[i].real() << "," << u.values[i].imag() << "\n";
    }
    return os.str();
}

}  // namespace carlab
