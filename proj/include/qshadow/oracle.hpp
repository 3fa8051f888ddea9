#pragma once

#include <cstdint>
#include <vector>

#include "qshadow/adapted_norms.hpp"
#include "qshadow/shadow_solver.hpp"

namespace qshadow {

/// e_(j+1) = L_j e_j + r_j, j = 0..N-1.
struct AffineSequenceSystem {
    std::vector<Mat> L;
    std::vector<Vec> r;

    int length() const { return static_cast<int>(L.size()); }
    AffineCharts charts() const { return AffineCharts(L, r); }
};

/// Bounded solution of the affine recursion on 0..N with P^s e_0 = 0 and
/// P^u e_N = 0: stable coordinates summed forward, unstable coordinates
/// summed backward. Requires every L_j to be block diagonal in `sp` with
/// m(U_j) > 1 and |S_j| < 1; throws DomainError otherwise.
std::vector<Vec> bounded_orbit_closed_form(const AffineSequenceSystem& sys, const Splitting& sp);

/// max_j |e_(j+1) - L_j e_j - r_j|
double affine_residual(const AffineSequenceSystem& sys, const std::vector<Vec>& e);

/// Random system with L_j = frame diag(U_j, S_j) frame^-1, m(U_j) >= expand,
/// |S_j| <= contract and |r_j| <= amp.
AffineSequenceSystem random_affine_system(const Splitting& sp, int length, double expand, double contract,
                                          double amp, std::uint64_t seed);

struct GridShadow {
    Point x;
    double distance = 0.0; ///< max_j rho(g^j x, y_j)
    double cell = 0.0;     ///< grid cell diameter
};

/// Exhaustive search over the grid [y_0 - radius, y_0 + radius]^n with
/// `grid_res` points per axis. Requires N <= 12 and grid_res <= 61.
GridShadow brute_force_shadow(const SmoothMap& g, const SegmentedPseudoOrbit& po, double radius, int grid_res);

/// All points of the cat map with A^p x = x, via the Smith normal form of
/// A^p - I in exact integer arithmetic. Requires 1 <= p <= 12.
std::vector<Point> cat_map_periodic_points(int period);

/// |det(A^p - I)| for the cat matrix, in integer arithmetic.
std::int64_t cat_map_fixed_point_count(int period);

/// Exact check that A^p x = x mod 1 for the rational point (num / den).
bool is_cat_periodic_exact(std::int64_t num_x, std::int64_t num_y, std::int64_t den, int period);

/// Tight bounds on the partial log-sums S_k = log(c_1 ... c_k), k = 0..n, of
/// any well-adapted balance sequence. The constraints S_0 = S_n = 0, S_k <= 0
/// and log a_k - log lambda <= S_k - S_(k-1) <= log b_k + log lambda form a
/// system of difference constraints; bounds are all-pairs shortest paths in
/// its constraint graph and infeasibility is a negative cycle (beyond 1e-12).
struct BalanceIntervals {
    bool feasible = false;
    std::vector<double> lower;
    std::vector<double> upper;
};
BalanceIntervals balance_intervals(const SequencePair& pair, double lambda);

} // namespace qshadow
