#pragma once

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "qshadow/pseudo_orbit.hpp"

namespace qshadow {

/// Rounding allowances: an exactly invariant splitting still shows
/// off-diagonal blocks of order 1e-16, and a jump of exactly delta may be
/// measured a few ulps above delta. The off-diagonal allowance is relative
/// to the size of the diagonal blocks.
inline constexpr double off_diagonal_allowance = 1e-12;
inline constexpr double residual_allowance = 1e-14;

/// The inequalities of a quasi-semi-hyperbolic segment plus the pseudo-orbit jump bound.
enum class Condition {
    stable_product,   ///< prod_{j<k} |D_j| <= lambda^k, k = 1..n
    unstable_product, ///< prod_{j=k}^{n-1} m(A_j) >= lambda^(k-n), k = 0..n-1
    ratio,            ///< |D_j| / m(A_j) <= lambda^2
    off_diagonal,     ///< |B_j|, |C_j| <= epsilon
    residual,         ///< rho(f^(n_i) x_i, x_(i+1)) <= delta
};

std::string_view condition_name(Condition c);

/// One inequality instance. Product conditions are stored in log form
/// (lhs/rhs are logs); slack = rhs - lhs for "<=" and lhs - rhs for ">=".
struct Margin {
    Condition condition;
    int segment; ///< position within the window
    int step;    ///< k for products, local j for the others, -1 for residuals
    double lhs;
    double rhs;
    double slack;
};

struct Certificate {
    bool passed = false;
    double lambda = 0.0;
    double epsilon = 0.0;
    double delta = 0.0;
    std::vector<Margin> margins;
    std::vector<BlockJacobian> blocks; ///< one per flat step j = 0..N-1

    /// Smallest slack per condition that occurs in the certificate.
    std::vector<Margin> worst_per_condition() const;
    /// For a failed certificate the first violated inequality, ordered by
    /// condition, segment and step; otherwise the smallest slack.
    std::optional<Margin> binding() const;
};

/// Blocks of Df(y_j) read from splitting j to splitting j+1, j = 0..N-1. On
/// the flat phase spaces this is also the derivative of the chart map
/// exp^-1_(y_(j+1)) o f o exp_(y_j) at 0.
std::vector<BlockJacobian> derivative_blocks(const SegmentedPseudoOrbit& po, const SplittingAssignment& sp,
                                             const SmoothMap& f);

/// Checks the four segment conditions on precomputed blocks; `offsets` are
/// the segment boundaries (size m+1) and `residuals` the jumps (may be empty
/// to skip the delta check).
Certificate certify_blocks(std::span<const BlockJacobian> blocks, std::span<const int> offsets,
                           std::span<const double> residuals, double lambda, double epsilon, double delta);

Certificate certify_segment(const SegmentedPseudoOrbit& po, int segment, const SplittingAssignment& sp,
                            const SmoothMap& f, double lambda, double epsilon);

Certificate certify_pseudo_orbit(const SegmentedPseudoOrbit& po, const SplittingAssignment& sp, const SmoothMap& f,
                                 double lambda, double epsilon, double delta);

/// max_j |B_j|, |C_j| <= tol over the certificate's blocks.
bool is_quasi_hyperbolic(const Certificate& cert, double tol = 1e-10);

/// Smallest lambda in (0,1) passing every non-residual condition at fixed
/// epsilon, by bisection to absolute tolerance `tol`; nullopt when infeasible
/// at lambda = 1 - 1e-9.
std::optional<double> min_feasible_lambda(std::span<const BlockJacobian> blocks, std::span<const int> offsets,
                                          double epsilon, double tol = 1e-6);
std::optional<double> min_feasible_lambda(const SegmentedPseudoOrbit& po, const SplittingAssignment& sp,
                                          const SmoothMap& f, double epsilon, double tol = 1e-6);

} // namespace qshadow
