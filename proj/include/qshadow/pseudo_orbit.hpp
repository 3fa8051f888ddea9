#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <variant>
#include <vector>

#include "qshadow/splitting.hpp"
#include "qshadow/systems.hpp"

namespace qshadow {

/// A finite window {x_i, n_i}, i = first..first+m-1, of a pseudo-orbit,
/// flattened to y_0..y_N with y_j = f^(j - N_i)(x_i) on segment i and a
/// terminal point y_N (the seed that follows the last segment).
///
/// Offsets are relative to the window start, so offsets()[0] == 0 and
/// offsets()[m] == N. residuals()[i] = rho(f^(n_i) x_i, next seed).
class SegmentedPseudoOrbit {
public:
    /// `terminal` defaults to f^(n_last)(x_last), i.e. no jump after the last segment.
    static SegmentedPseudoOrbit flatten(const SmoothMap& f, std::vector<Point> seeds, std::vector<int> lengths,
                                        std::optional<Point> terminal = std::nullopt, int first_segment = 0);

    const Phase& phase() const { return phase_; }
    int segment_count() const { return static_cast<int>(seeds_.size()); }
    int first_segment() const { return first_segment_; }
    /// Flat index of seed x_0 (the segment labelled 0); 0 for windows starting at i = 0.
    int origin() const;

    std::span<const Point> seeds() const { return seeds_; }
    std::span<const int> lengths() const { return lengths_; }
    std::span<const int> offsets() const { return offsets_; }
    std::span<const Point> points() const { return points_; }
    std::span<const double> residuals() const { return residuals_; }

    const Point& point(int j) const { return points_.at(static_cast<std::size_t>(j)); }
    const Point& terminal() const { return points_.back(); }
    int total_length() const { return offsets_.back(); }
    int max_length() const;
    double max_residual() const;
    /// Segment position (0-based within the window) containing flat index j < N.
    int segment_of(int j) const;
    /// True when the terminal point equals the first seed (periodic data).
    bool is_closed() const { return points_.back() == points_.front(); }

    /// Recovers (seeds, lengths) from the flattened points and offsets.
    std::pair<std::vector<Point>, std::vector<int>> resegment() const;

private:
    SegmentedPseudoOrbit(Phase phase) : phase_(phase) {}

    Phase phase_;
    int first_segment_ = 0;
    std::vector<Point> seeds_;
    std::vector<int> lengths_;
    std::vector<int> offsets_;
    std::vector<Point> points_;
    std::vector<double> residuals_;
};

/// Unit vector for jump i, a pure function of (rng_seed, i).
Vec jump_direction(std::uint64_t rng_seed, std::int64_t i, int dim);

/// Two-sided pseudo-orbit source. Seeds with i >= 0 follow
/// x_(i+1) = exp(f^(n_i) x_i, amp u_i); seeds with i < 0 are obtained by the
/// inverse map so that the same law holds across every join. Lengths cycle
/// through `length_pattern`. The periodic variant cycles through fixed seeds.
class PseudoOrbitGenerator {
public:
    PseudoOrbitGenerator(MapPtr f, Point x0, std::vector<int> length_pattern, double jump_amp, std::uint64_t rng_seed);
    static PseudoOrbitGenerator periodic(MapPtr f, std::vector<Point> seeds, std::vector<int> lengths);

    const MapPtr& map() const { return f_; }
    int length(std::int64_t i) const;
    bool is_periodic() const { return !periodic_seeds_.empty(); }
    int period() const { return static_cast<int>(periodic_seeds_.size()); }

    /// Segments -k..k; the terminal point is the seed x_(k+1).
    SegmentedPseudoOrbit window(int k) const;
    /// Segments 0..m-1; the terminal point is the seed x_m.
    SegmentedPseudoOrbit forward(int m) const;

private:
    PseudoOrbitGenerator(MapPtr f) : f_(std::move(f)) {}
    std::vector<Point> seed_range(std::int64_t first, std::int64_t last) const;

    MapPtr f_;
    std::optional<Point> x0_;
    std::vector<int> pattern_;
    double jump_amp_ = 0.0;
    std::uint64_t rng_seed_ = 0;
    std::vector<Point> periodic_seeds_;
};

/// Finite pseudo-orbit with every residual equal to jump_amp.
SegmentedPseudoOrbit generate(MapPtr f, const Point& x_start, std::vector<int> lengths, double jump_amp,
                              std::uint64_t rng_seed);

/// Closed pseudo-orbit (terminal == x_0) whose m residuals all equal
/// jump_amp; x_0 is the Newton-corrected fixed point of the jump-composed
/// return map started at x_start.
SegmentedPseudoOrbit generate_periodic(const SmoothMap& f, const Point& x_start, std::vector<int> lengths,
                                       double jump_amp, std::uint64_t rng_seed);

/// One splitting per flat index 0..N.
class SplittingAssignment {
public:
    explicit SplittingAssignment(std::vector<Splitting> splittings);

    const Splitting& at(int j) const { return splittings_.at(static_cast<std::size_t>(j)); }
    int size() const { return static_cast<int>(splittings_.size()); }
    int dim_u() const { return splittings_.front().dim_u(); }
    std::span<const Splitting> all() const { return splittings_; }

private:
    std::vector<Splitting> splittings_;
};

/// Eigen-splitting of a constant derivative (linear maps only).
struct EigenStrategy {};
struct ConstantStrategy {
    Splitting splitting;
};
/// Caller-supplied bases, one per flat index.
struct UserStrategy {
    std::vector<Splitting> splittings;
};
/// Unstable factor pushed forward from f^-steps(y); stable factor pulled back from f^steps(y).
struct PowerIterationStrategy {
    int steps = 50;
    double min_gap = 1e-6;
    int dim_u = -1; ///< -1: count eigenvalues of modulus > 1 of Df(y_0)
};

using SplittingStrategy = std::variant<EigenStrategy, ConstantStrategy, UserStrategy, PowerIterationStrategy>;

SplittingAssignment assign_splittings(const SegmentedPseudoOrbit& po, const SmoothMap& f,
                                      const SplittingStrategy& strategy);

Splitting power_iteration_splitting(const SmoothMap& f, const Point& y, const PowerIterationStrategy& opts);

} // namespace qshadow
