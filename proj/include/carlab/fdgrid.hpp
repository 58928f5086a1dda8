#pragma once

// Finite-difference discretization of h^4 (sum_j D^4_j + sum_j A_j D_j + q)
// and of the squared Laplacian on rectangular grids, exponential-weight
// conjugation, semiclassical norms, and smallest-singular-value machinery.
//
// Interior nodes sit at least two layers from every face so the five-point
// fourth-difference stencil fits; matrices act on interior nodes with zero
// extension, the discrete stand-in for compactly supported test functions.

#include <carlab/weights.hpp>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <complex>
#include <memory>
#include <string>
#include <vector>

namespace carlab {

using cplx = std::complex<double>;
using SpMat = Eigen::SparseMatrix<cplx>;

class Grid {
  public:
    static std::shared_ptr<const Grid> build(const Box& box, const std::vector<int>& nodes);

    int dim() const { return (int)m_.size(); }
    long node_count() const { return total_; }
    long interior_count() const { return (long)interior_.size(); }
    int nodes_on_axis(int j) const { return m_[j]; }
    double spacing(int j) const { return dx_[j]; }
    double max_spacing() const;
    const Box& box() const { return box_; }

    const std::vector<long>& interior() const { return interior_; }
    long interior_index(long node) const { return full_to_interior_[node]; }  // -1 outside

    std::vector<int> multi_index(long node) const;
    long flat_index(const std::vector<int>& idx) const;
    std::vector<double> coord(long node) const;
    double coord_axis(long node, int j) const;
    bool is_interior_multi(const std::vector<int>& idx) const;

    // product of per-axis trapezoid weights (weight * dx per axis)
    double quad_weight(long node) const;

  private:
    Grid() = default;
    Box box_;
    std::vector<int> m_;
    std::vector<double> dx_;
    std::vector<long> strides_;
    long total_ = 0;
    std::vector<long> interior_;
    std::vector<long> full_to_interior_;
};

struct GridFunction {
    std::shared_ptr<const Grid> grid;
    std::vector<cplx> values;  // one per full-grid node

    GridFunction() = default;
    explicit GridFunction(std::shared_ptr<const Grid> g)
        : grid(std::move(g)), values(grid->node_count(), cplx(0.0)) {}

    template <typename F>
    static GridFunction sample(std::shared_ptr<const Grid> g, F&& f) {
        GridFunction u(g);
        for (long i = 0; i < g->node_count(); i++) u.values[i] = f(g->coord(i));
        return u;
    }
};

enum class OpKind { FourthSum, Bilaplacian };

struct DiscreteOperator {
    std::shared_ptr<const Grid> grid;
    SpMat mat;  // interior x interior
    double h = 1.0;
    OpKind kind = OpKind::FourthSum;
    std::string weight;          // conjugation record, empty if unconjugated
    std::vector<GridFunction> A;  // coefficient fields used at assembly
    GridFunction q;
};

// Coefficients: A empty means A == 0; q empty means q == 0.
DiscreteOperator assemble(std::shared_ptr<const Grid> grid, const std::vector<GridFunction>& A,
                          const GridFunction& q, double h);
DiscreteOperator assemble_bilaplacian(std::shared_ptr<const Grid> grid, double h);

// Stencil rows over all grid nodes (interior rows x full columns); the
// Cauchy solver needs the unknown's boundary values to stay unknowns.
SpMat assemble_rows_full(const std::shared_ptr<const Grid>& grid,
                         const std::vector<GridFunction>& A, const GridFunction& q, double h);

// Apply the operator to a sampled function using its values on all nodes;
// returns one value per interior node.
std::vector<cplx> apply_operator(const std::shared_ptr<const Grid>& grid,
                                 const std::vector<GridFunction>& A, const GridFunction& q,
                                 double h, const GridFunction& u);

DiscreteOperator conjugate(const DiscreteOperator& op, const Weight& w, double h);

struct SigmaResult {
    double value = 0.0;
    bool converged = false;
    int iterations = 0;
};

// Smallest singular value by inverse iteration on the normal matrix.
SigmaResult sigma_min(const DiscreteOperator& op, double tol = 1e-9, int max_iter = 500);
SigmaResult sigma_min(const SpMat& mat, double tol = 1e-9, int max_iter = 500);

// Exact dense SVD oracle (interior sizes up to a few hundred).
double sigma_min_dense(const DiscreteOperator& op);
double sigma_min_dense(const SpMat& mat);

// Generalized variant: min ||A v||_2 / ||v||_{H1_scl} with the Gram
// I + h^2 sum_j D_j^T D_j on interior functions (zero extension). Dense.
SigmaResult sigma_min_h1scl(const DiscreteOperator& op);

std::vector<cplx> eigenvalues_dense(const SpMat& mat);

struct Norms {
    double l2 = 0.0;
    double h1scl = 0.0;
};

Norms norms(const GridFunction& u, double h);

// Coordinate text export: one entry per line, "row col re im".
std::string to_coordinate_text(const DiscreteOperator& op);
// CSV export: header then one node per line, coordinates then re, im.
std::string to_csv(const GridFunction& u);

}  // namespace carlab
