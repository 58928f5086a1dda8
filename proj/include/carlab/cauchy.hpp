#pragma once

// Regularized solver for the ill-posed Cauchy problem, empirical Holder
// stability fitting, the Caccioppoli annulus ratio, and the discrete
// weak-unique-continuation spectral gap probe.

#include <carlab/fdgrid.hpp>
#include <carlab/weights.hpp>

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace carlab {

struct FaceId {
    int axis = 0;
    int side = 1;  // 0 = min face, 1 = max face
    bool operator==(const FaceId&) const = default;
};

enum class SourceMode { Discrete, Analytic };

using ScalarField = std::function<cplx(const std::vector<double>&)>;

struct CauchyProblem {
    std::shared_ptr<const Grid> grid;
    std::vector<FaceId> gamma;
    std::vector<std::vector<long>> face_nodes;  // per gamma face, full node ids
    std::array<std::vector<cplx>, 4> g;         // normal data, concatenated over faces
    std::vector<long> omega0_rows;              // interior node ids with phi > 0
    std::vector<cplx> f;                        // source, aligned with omega0_rows
    std::vector<GridFunction> A;
    GridFunction q;
    Weight phi;
    double delta = 0.0;
    GridFunction u_true;
    bool has_truth = false;

    long gamma_node_count() const;
    std::vector<long> omega0_nodes() const;       // all nodes with phi > 0
    std::vector<long> omega_delta_nodes() const;  // all nodes with phi > delta
};

// Builds a discretely consistent problem from a closed-form field: f is the
// discrete operator applied to the sampled truth, g^k are one-sided normal
// differences of the sampled truth on Gamma. SourceMode::Analytic instead
// samples a closed-form L u_true, which leaves genuine discretization error
// in the problem (used by convergence studies).
CauchyProblem manufacture(std::shared_ptr<const Grid> grid, const ScalarField& u_true,
                          const std::vector<GridFunction>& A, const GridFunction& q,
                          const std::vector<FaceId>& gamma, const Weight& phi, double delta,
                          SourceMode mode = SourceMode::Discrete,
                          const ScalarField& Lu_analytic = {});

struct SolveResult {
    GridFunction u;
    bool converged = false;
    double rel_residual = 0.0;  // normal-equation residual, relative
    long stack_rows = 0;
};

// Minimizes ||Lu - f||^2_{Omega_0} + gamma_w sum_k ||dnu^k u - g^k||^2_Gamma
// + lambda ||u||^2_{H1} over all grid nodes.
SolveResult solve(const CauchyProblem& p, double lambda, double gamma_weight = 1e6);

struct StabilityTrial {
    double level = 0.0;
    double F = 0.0;
    double M = 0.0;
    double error = 0.0;
    bool converged = false;
    bool in_fit = false;
};

struct StabilityFit {
    std::vector<StabilityTrial> trials;
    double theta_hat = 0.0;
    double theta_half_width = 0.0;  // 95% band for the slope
    double C = 0.0;
    double r2 = 0.0;
    double theta_pred = 0.0;  // delta / (2 Phi - delta)
    double Phi = 0.0;
    double delta = 0.0;
    int excluded = 0;
};

StabilityFit stability_fit(const CauchyProblem& p, const std::vector<double>& noise_levels,
                           int trials_per_level, std::uint64_t seed, double lambda,
                           double gamma_weight = 1e6);

struct CaccioppoliReport {
    double lhs = 0.0;   // sum of |D^2 u|^2 + |D^3 u|^2 over B_r \ B_rho
    double rhs = 0.0;   // sum of |u|^2 + |Du|^2 over B_2r \ B_{rho/2}
    double ratio = 0.0; // lhs (r - rho)^2 / rhs
    long lhs_nodes = 0;
    long rhs_nodes = 0;
    double max_equation_residual = 0.0;
};

CaccioppoliReport caccioppoli_ratio(const GridFunction& u, double r, double rho,
                                    const std::vector<GridFunction>& A, const GridFunction& q,
                                    double tol = 1e-8);

struct UcpGapReport {
    double gap = 0.0;
    long omega_nodes = 0;
    long columns = 0;
};

UcpGapReport ucp_gap(std::shared_ptr<const Grid> grid, const std::vector<long>& omega,
                     const std::vector<GridFunction>& A, const GridFunction& q);

// node-center membership masks
std::vector<long> nodes_in_box(const Grid& g, const Box& b);
std::vector<long> nodes_in_ball(const Grid& g, const std::vector<double>& center, double radius);

// discrete H1 norm (h = 1) restricted to a node set
double h1_norm_on(const GridFunction& v, const std::vector<long>& nodes);

}  // namespace carlab
