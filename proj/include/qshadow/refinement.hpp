#pragma once

#include <optional>
#include <span>
#include <vector>

#include "qshadow/certification.hpp"

namespace qshadow {

struct RefinementConfig {
    double lambda = 0.4;
    double lambda_tilde = 0.0; ///< 0: (3 lambda + 1) / 4
    double lambda_0 = 0.0;     ///< 0: midpoint of (lambda, lambda_tilde)
    double epsilon = -1.0;     ///< certification epsilon; < 0: eps_cap
    double delta = 1.0;        ///< certification delta for the input pseudo-orbit
    double R = 0.0;            ///< 0: estimated from the map
    double delta_1 = 0.0;      ///< chart closeness threshold; 0: injectivity radius / 4
    double fp_tol = 1e-12;
    int max_iter = 10000;
};

/// RefinementConfig with every default made explicit.
struct RefinementConstants {
    double lambda;
    double lambda_tilde;
    double lambda_0;
    double R;
    double eps_cap; ///< min{(1-l0^2)/((l0^2+6)R), (l0-l)/(l0 R)}
    double epsilon;
    double delta;
    double delta_1;
};

/// Throws DomainError unless 0 < lambda < lambda_0 < lambda_tilde < 1.
RefinementConstants resolve(const RefinementConfig& cfg, const SmoothMap& f);
double epsilon_cap(double lambda, double lambda_0, double R);

/// Blocks of D_0(exp^-1_(y_(j+1)) o f o exp_(y_j)). On flat phase spaces
/// this equals Df(y_j) in the two bases. Throws DomainError when a residual
/// exceeds delta_1.
std::vector<BlockJacobian> chart_blocks(const SegmentedPseudoOrbit& po, const SplittingAssignment& sp,
                                        const SmoothMap& f, double delta_1);

/// P_j : E^u_j -> E^s_j (dim_s x dim_u), j = 0..N.
using GraphSequence = std::vector<Mat>;

/// One Jacobi sweep of the graph transform. The left boundary P_0 is kept,
/// (T P)_(j+1) = (C_j + D_j P_j)(A_j + B_j P_j)^-1. Throws
/// SingularMatrixError naming j when A_j + B_j P_j is singular.
GraphSequence graph_step(const GraphSequence& P, std::span<const BlockJacobian> blocks);

/// Q_j from Q_(j+1): (A_j - Q_(j+1) C_j) Q_j = Q_(j+1) D_j - B_j.
Mat stable_graph_step(const Mat& Q_next, const BlockJacobian& b);

struct GraphSolve {
    GraphSequence graphs;
    std::vector<double> updates; ///< sup-norm change per sweep
    int iterations = 0;
    bool converged = false;
    double invariance_residual = 0.0;
    double max_norm = 0.0; ///< max_j |P_j|
};

/// Iterates graph_step from P = 0 until the sup update drops below fp_tol.
GraphSolve solve_unstable_graphs(std::span<const BlockJacobian> blocks, double fp_tol = 1e-12,
                                 int max_iter = 10000);
/// Backward recursion from Q_N = 0; Q_j : E^s_j -> E^u_j (dim_u x dim_s).
GraphSolve solve_stable_graphs(std::span<const BlockJacobian> blocks);

double unstable_invariance_residual(const GraphSequence& P, std::span<const BlockJacobian> blocks);
double stable_invariance_residual(const GraphSequence& Q, std::span<const BlockJacobian> blocks);

struct RefinedSplitting {
    RefinementConstants constants;
    SplittingAssignment splittings;     ///< graph(P_j) (+) graph(Q_j), orthonormal bases
    std::vector<Mat> M;                 ///< unstable diagonal blocks
    std::vector<Mat> N;                 ///< stable diagonal blocks
    std::vector<BlockJacobian> blocks;  ///< measured blocks in the refined bases
    GraphSolve unstable;
    GraphSolve stable;
    Certificate input_certificate;
    Certificate certificate;            ///< diagonal blocks at (lambda_tilde, 0, delta)
    double max_off_diagonal = 0.0;
    bool sandwich_ok = false;           ///< (l0/lt) m(A) <= m(M) <= |M| <= (lt/l0)|A|
    bool expansion_ok = false;          ///< m(A + B P) >= m(A) - 3 eps_cap
    bool contraction_ok = false;        ///< |D + C Q| <= |D| + 3 eps_cap
    double min_angle = 0.0;             ///< min_j angle(G^u_j, G^s_j)
};

/// Throws PreconditionError when epsilon exceeds eps_cap or the input fails
/// certification at (lambda, epsilon, delta); ConvergenceError when the
/// graph transform does not settle within max_iter sweeps.
RefinedSplitting refine(const SegmentedPseudoOrbit& po, const SplittingAssignment& sp, const SmoothMap& f,
                        const RefinementConfig& cfg);

} // namespace qshadow
