#pragma once

#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "qshadow/adapted_norms.hpp"
#include "qshadow/certification.hpp"

namespace qshadow {

/// Local representations F_j, G_j : X_j -> X_(j+1), j = 0..N-1.
class ChartSequence {
public:
    virtual ~ChartSequence() = default;
    virtual int length() const = 0;
    virtual int dim() const = 0;
    virtual Vec F(int j, const Vec& v) const = 0;
    virtual Vec G(int j, const Vec& v) const = 0;
    virtual Mat DF(int j, const Vec& v) const = 0;
};

/// F_j(v) = exp^-1_(y_(j+1)) f exp_(y_j)(v), same for g. Arguments outside
/// the injectivity ball raise DomainError.
class PseudoOrbitCharts final : public ChartSequence {
public:
    PseudoOrbitCharts(const SegmentedPseudoOrbit& po, MapPtr f, MapPtr g);

    int length() const override { return po_->total_length(); }
    int dim() const override { return po_->phase().dim(); }
    Vec F(int j, const Vec& v) const override { return local(*f_, j, v); }
    Vec G(int j, const Vec& v) const override { return local(*g_, j, v); }
    Mat DF(int j, const Vec& v) const override;

private:
    Vec local(const SmoothMap& m, int j, const Vec& v) const;

    const SegmentedPseudoOrbit* po_;
    MapPtr f_;
    MapPtr g_;
};

/// F_j(v) = G_j(v) = L_j v + r_j.
class AffineCharts final : public ChartSequence {
public:
    AffineCharts(std::vector<Mat> L, std::vector<Vec> r);

    int length() const override { return static_cast<int>(L_.size()); }
    int dim() const override { return static_cast<int>(L_.front().rows()); }
    Vec F(int j, const Vec& v) const override { return L_.at(static_cast<std::size_t>(j)) * v + r_[static_cast<std::size_t>(j)]; }
    Vec G(int j, const Vec& v) const override { return F(j, v); }
    Mat DF(int j, const Vec&) const override { return L_.at(static_cast<std::size_t>(j)); }

private:
    std::vector<Mat> L_;
    std::vector<Vec> r_;
};

/// Charts of a pseudo-orbit. The returned object refers to `po`, which must outlive it.
std::unique_ptr<ChartSequence> local_maps(const SegmentedPseudoOrbit& po, MapPtr f, MapPtr g);

/// P^u_(j+1)(F_j(P^s_j v_j + w) - F_j(P^s_j v_j)) for w in E^u_j.
Vec phi(const ChartSequence& charts, const SplittingAssignment& sp, int j, const Vec& v_j, const Vec& w);

/// Inverse of phi: the w in E^u_j with phi(w) = target, by Newton's method on
/// the unstable coordinates. Throws ConvergenceError naming j on failure.
Vec psi(const ChartSequence& charts, const SplittingAssignment& sp, int j, const Vec& v_j, const Vec& target);

enum class Boundary { finite, periodic };

/// One application of the shadowing operator to v = (v_0..v_N).
std::vector<Vec> operator_A(const ChartSequence& charts, const SplittingAssignment& sp, std::span<const Vec> v,
                            Boundary boundary);

struct SolverConfig {
    double lambda = 0.4;
    double lambda_tilde = 0.0; ///< 0: (3 lambda + 1) / 4
    double epsilon = 0.0;      ///< certification epsilon
    double delta = -1.0;       ///< certification delta; < 0: delta_0
    double eta = 0.0;          ///< 0: min(eps_1, injectivity radius / 4)
    double eps_1 = 0.0;        ///< 0: graph-transform cap at lambda_0 = (lambda + lambda_tilde) / 2
    double R = 0.0;            ///< 0: estimated from f
    double d = -1.0;           ///< |f - g|; < 0: estimated on a grid
    double tol_fix = 1e-12;
    int max_iter = 10000;
    double damping = 0.5;
    bool polish = true;        ///< periodic runs: Newton polish of the closure
};

struct SolverConstants {
    double lambda = 0.0;
    double lambda_tilde = 0.0;
    double R = 1.0;
    double eps_0 = 0.0; ///< (1 + lambda - 2 lambda_tilde) / (4R)
    double eps_1 = 0.0;
    double eta = 0.0;
    int a = 0;          ///< max segment length
    double C = 1.0;     ///< R^a
    double delta_1 = 0.0;
    double delta_0 = 0.0;
    double d_0 = 0.0;
};

SolverConstants solver_constants(const SolverConfig& cfg, const SmoothMap& f, int max_segment_length);

struct Preconditions {
    Certificate certificate;
    double max_residual = 0.0;
    double d = 0.0;
    bool certified = false;
    bool epsilon_ok = false; ///< epsilon <= eps_0
    bool delta_ok = false;   ///< max residual <= delta_0
    bool d_ok = false;       ///< |f - g| <= d_0

    bool all() const { return certified && epsilon_ok && delta_ok && d_ok; }
};

struct PolishResult {
    Point x;
    double closure = 0.0;
    int iterations = 0;
    bool converged = false;
};

struct ShadowingResult {
    std::vector<Vec> v;                   ///< v_0..v_N
    std::optional<Point> x;               ///< exp_(y_0)(v_0); empty for chart-only solves
    std::vector<double> distances;        ///< rho(g^j x, y_j) = |v_j|
    std::vector<double> orbit_residuals;  ///< |v_(j+1) - G_j(v_j)|_N
    std::vector<double> scale;            ///< l_j
    std::vector<double> update_history;   ///< scaled box-norm update per iteration
    int iterations = 0;
    bool converged = false;
    bool damped = false;
    bool adapted = false;                 ///< scale factors from a well-adapted sequence (else l = 1)
    int ball_violations = 0;              ///< iterates with some |v_j|_N > eta
    double max_norm_N = 0.0;              ///< max over all iterates of |v_j|_N
    SolverConstants constants;
    std::optional<Preconditions> preconditions;
    std::optional<double> periodic_closure;
    std::optional<PolishResult> polish;

    double max_distance() const;
    double max_orbit_residual() const;
};

/// Fixed-point iteration of the operator on generic charts; scale factors
/// come from the blocks of DF_j(0) at `lambda` when well-adapted weights
/// exist. `offsets` are the segment boundaries.
ShadowingResult solve_charts(const ChartSequence& charts, const SplittingAssignment& sp, std::span<const int> offsets,
                             const SolverConfig& cfg, Boundary boundary);

/// Shadows a finite pseudo-orbit of f by an orbit of g. Preconditions are
/// evaluated and reported; the iteration runs regardless.
ShadowingResult solve_finite(const SegmentedPseudoOrbit& po, const SplittingAssignment& sp, MapPtr f, MapPtr g,
                             const SolverConfig& cfg);

/// Periodic boundary conditions on closed data; the result carries the
/// closure rho(g^N x, x) and, when enabled, a Newton-polished periodic point.
ShadowingResult solve_periodic(const SegmentedPseudoOrbit& po, const SplittingAssignment& sp, MapPtr f, MapPtr g,
                               const SolverConfig& cfg);

struct WindowRow {
    int k = 0;
    Vec v0;
    double diff = 0.0; ///< |v_0^(k) - v_0^(previous k)|; NaN for the first row
    bool converged = false;
    int iterations = 0;
};

struct InfiniteResult {
    std::vector<WindowRow> table;
    bool converged = false; ///< last diff < 10 tol_fix
    ShadowingResult result; ///< largest window
    Point x;                ///< exp_(x_0)(v_0) of the largest window
};

/// Solves the windows [-k, k] for increasing k and tracks v_0 at seed x_0.
InfiniteResult solve_infinite(const PseudoOrbitGenerator& gen, std::span<const int> window_ks, MapPtr g,
                              const SplittingStrategy& strategy, const SolverConfig& cfg);

/// rho(g^N x, x) by direct iteration.
double closure_distance(const SmoothMap& g, const Point& x, int N);

/// Newton's method on exp^-1_p(g^N(p)) started at x.
PolishResult polish_periodic(const SmoothMap& g, const Point& x, int N, int max_steps = 30, double tol = 1e-14);

/// rho(g^j x, y_j), j = 0..N, by direct iteration.
std::vector<double> orbit_distances(const SmoothMap& g, const Point& x, const SegmentedPseudoOrbit& po);

} // namespace qshadow
