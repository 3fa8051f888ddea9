#include "qshadow/pseudo_orbit.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "qshadow/errors.hpp"

namespace qshadow {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Uniform in (0,1] from the top 53 bits; independent of the standard
// library's distribution implementations.
double unit_uniform(std::mt19937_64& gen) {
    return (static_cast<double>(gen() >> 11) + 1.0) * 0x1.0p-53;
}

} // namespace

Vec jump_direction(std::uint64_t rng_seed, std::int64_t i, int dim) {
    std::mt19937_64 gen(splitmix64(rng_seed ^ splitmix64(static_cast<std::uint64_t>(i))));
    Vec u(dim);
    do {
        for (int k = 0; k < dim; k += 2) {
            const double r = std::sqrt(-2.0 * std::log(unit_uniform(gen)));
            const double t = 2.0 * std::numbers::pi * unit_uniform(gen);
            u[k] = r * std::cos(t);
            if (k + 1 < dim) {
                u[k + 1] = r * std::sin(t);
            }
        }
    } while (u.norm() < 1e-8);
    return u.normalized();
}

SegmentedPseudoOrbit SegmentedPseudoOrbit::flatten(const SmoothMap& f, std::vector<Point> seeds,
                                                   std::vector<int> lengths, std::optional<Point> terminal,
                                                   int first_segment) {
    if (seeds.empty()) {
        throw DomainError("flatten: empty pseudo-orbit");
    }
    if (seeds.size() != lengths.size()) {
        throw DimensionError("flatten: seeds and lengths differ in size");
    }
    if (std::any_of(lengths.begin(), lengths.end(), [](int n) { return n < 1; })) {
        throw DomainError("flatten: segment lengths must be positive");
    }
    const Phase& phase = f.phase();
    SegmentedPseudoOrbit po(phase);
    po.first_segment_ = first_segment;
    po.offsets_.push_back(0);
    std::vector<Point> ends;
    for (std::size_t i = 0; i < seeds.size(); ++i) {
        phase.check_dim(seeds[i].coords(), "flatten seed");
        Point y = phase.point(seeds[i].coords());
        for (int k = 0; k < lengths[i]; ++k) {
            po.points_.push_back(y);
            y = f.apply(y);
        }
        ends.push_back(y);
        po.offsets_.push_back(po.offsets_.back() + lengths[i]);
    }
    Point last = terminal ? phase.point(terminal->coords()) : ends.back();
    for (std::size_t i = 0; i < seeds.size(); ++i) {
        const Point& next = i + 1 < seeds.size() ? po.points_[static_cast<std::size_t>(po.offsets_[i + 1])] : last;
        po.residuals_.push_back(phase.distance(ends[i], next));
    }
    po.points_.push_back(std::move(last));
    po.seeds_.reserve(seeds.size());
    for (std::size_t i = 0; i < seeds.size(); ++i) {
        po.seeds_.push_back(po.points_[static_cast<std::size_t>(po.offsets_[i])]);
    }
    po.lengths_ = std::move(lengths);
    return po;
}

int SegmentedPseudoOrbit::origin() const {
    const int rel = -first_segment_;
    if (rel < 0 || rel > segment_count()) {
        throw DomainError("pseudo-orbit window does not contain segment 0");
    }
    return offsets_[static_cast<std::size_t>(rel)];
}

int SegmentedPseudoOrbit::max_length() const { return *std::max_element(lengths_.begin(), lengths_.end()); }

double SegmentedPseudoOrbit::max_residual() const {
    return *std::max_element(residuals_.begin(), residuals_.end());
}

int SegmentedPseudoOrbit::segment_of(int j) const {
    if (j < 0 || j >= total_length()) {
        throw DomainError("segment_of: flat index out of range");
    }
    auto it = std::upper_bound(offsets_.begin(), offsets_.end(), j);
    return static_cast<int>(it - offsets_.begin()) - 1;
}

std::pair<std::vector<Point>, std::vector<int>> SegmentedPseudoOrbit::resegment() const {
    std::vector<Point> seeds;
    std::vector<int> lengths;
    for (std::size_t i = 0; i + 1 < offsets_.size(); ++i) {
        seeds.push_back(points_[static_cast<std::size_t>(offsets_[i])]);
        lengths.push_back(offsets_[i + 1] - offsets_[i]);
    }
    return {seeds, lengths};
}

PseudoOrbitGenerator::PseudoOrbitGenerator(MapPtr f, Point x0, std::vector<int> length_pattern, double jump_amp,
                                           std::uint64_t rng_seed)
    : f_(std::move(f)), x0_(std::move(x0)), pattern_(std::move(length_pattern)), jump_amp_(jump_amp),
      rng_seed_(rng_seed) {
    if (pattern_.empty() || std::any_of(pattern_.begin(), pattern_.end(), [](int n) { return n < 1; })) {
        throw DomainError("generator: lengths must be a nonempty list of positive integers");
    }
    if (!(jump_amp_ >= 0.0)) {
        throw DomainError("generator: jump amplitude must be nonnegative");
    }
    if (jump_amp_ >= f_->phase().injectivity_radius()) {
        throw DomainError("generator: jump amplitude reaches the injectivity radius");
    }
}

PseudoOrbitGenerator PseudoOrbitGenerator::periodic(MapPtr f, std::vector<Point> seeds, std::vector<int> lengths) {
    if (seeds.empty() || seeds.size() != lengths.size()) {
        throw DomainError("periodic generator: seeds and lengths must be nonempty and equal in size");
    }
    PseudoOrbitGenerator g(std::move(f));
    g.periodic_seeds_ = std::move(seeds);
    g.pattern_ = std::move(lengths);
    return g;
}

int PseudoOrbitGenerator::length(std::int64_t i) const {
    const auto p = static_cast<std::int64_t>(pattern_.size());
    return pattern_[static_cast<std::size_t>(((i % p) + p) % p)];
}

std::vector<Point> PseudoOrbitGenerator::seed_range(std::int64_t first, std::int64_t last) const {
    std::vector<Point> out;
    if (is_periodic()) {
        const auto p = static_cast<std::int64_t>(periodic_seeds_.size());
        for (std::int64_t i = first; i <= last; ++i) {
            out.push_back(periodic_seeds_[static_cast<std::size_t>(((i % p) + p) % p)]);
        }
        return out;
    }
    const Phase& phase = f_->phase();
    const int dim = phase.dim();
    std::vector<Point> negative;  // x_-1, x_-2, ...
    Point x = *x0_;
    for (std::int64_t i = -1; i >= first; --i) {
        // f^(n_i) x_i = x_(i+1) - amp u_i
        Point end = phase.exp_at(x, -jump_amp_ * jump_direction(rng_seed_, i, dim));
        x = iterate(*f_, end, -length(i));
        negative.push_back(x);
    }
    for (auto it = negative.rbegin(); it != negative.rend(); ++it) {
        out.push_back(*it);
    }
    x = *x0_;
    for (std::int64_t i = 0; i <= last; ++i) {
        if (i >= first) {
            out.push_back(x);
        }
        x = phase.exp_at(iterate(*f_, x, length(i)), jump_amp_ * jump_direction(rng_seed_, i, dim));
    }
    return out;
}

SegmentedPseudoOrbit PseudoOrbitGenerator::window(int k) const {
    if (k < 0) {
        throw DomainError("window: k must be nonnegative");
    }
    std::vector<Point> seeds = seed_range(-k, k + 1);
    Point terminal = seeds.back();
    seeds.pop_back();
    std::vector<int> lengths;
    for (int i = -k; i <= k; ++i) {
        lengths.push_back(length(i));
    }
    return SegmentedPseudoOrbit::flatten(*f_, std::move(seeds), std::move(lengths), terminal, -k);
}

SegmentedPseudoOrbit PseudoOrbitGenerator::forward(int m) const {
    if (m < 1) {
        throw DomainError("forward: need at least one segment");
    }
    std::vector<Point> seeds = seed_range(0, m);
    Point terminal = seeds.back();
    seeds.pop_back();
    std::vector<int> lengths;
    for (int i = 0; i < m; ++i) {
        lengths.push_back(length(i));
    }
    return SegmentedPseudoOrbit::flatten(*f_, std::move(seeds), std::move(lengths), terminal, 0);
}

SegmentedPseudoOrbit generate(MapPtr f, const Point& x_start, std::vector<int> lengths, double jump_amp,
                              std::uint64_t rng_seed) {
    const int m = static_cast<int>(lengths.size());
    PseudoOrbitGenerator gen(std::move(f), x_start, std::move(lengths), jump_amp, rng_seed);
    return gen.forward(m);
}

SegmentedPseudoOrbit generate_periodic(const SmoothMap& f, const Point& x_start, std::vector<int> lengths,
                                       double jump_amp, std::uint64_t rng_seed) {
    if (lengths.empty()) {
        throw DomainError("generate_periodic: empty lengths");
    }
    if (!(jump_amp >= 0.0) || jump_amp >= f.phase().injectivity_radius()) {
        throw DomainError("generate_periodic: jump amplitude out of range");
    }
    const Phase& phase = f.phase();
    const int dim = phase.dim();
    const auto m = static_cast<std::int64_t>(lengths.size());
    // return map R(x) = composition of segment flows, each followed by its jump
    auto return_map = [&](const Vec& x0, Mat& jac) {
        Vec x = x0;
        jac = Mat::Identity(dim, dim);
        for (std::int64_t i = 0; i < m; ++i) {
            for (int k = 0; k < lengths[static_cast<std::size_t>(i)]; ++k) {
                jac = f.jacobian(x) * jac;
                x = phase.point(f.lift(x)).coords();
            }
            x += jump_amp * jump_direction(rng_seed, i, dim);
        }
        return x;
    };
    Vec x = x_start.coords();
    Mat jac;
    // rounding in the iterates is amplified by |D R|, so the closure floor scales with it
    double floor = 1e-15;
    for (int it = 0; it < 50; ++it) {
        Vec h = phase.wrap(return_map(x, jac) - x);
        floor = 1e-15 * std::max(1.0, jac.norm());
        if (h.norm() <= floor) {
            break;
        }
        const Mat lhs = jac - Mat::Identity(dim, dim);
        x -= lhs.fullPivLu().solve(h);
        x = phase.point(x).coords();
    }
    if (phase.wrap(return_map(x, jac) - x).norm() > 1e3 * floor) {
        throw ConvergenceError("generate_periodic: closure Newton did not converge");
    }
    std::vector<Point> seeds;
    Point y = phase.point(x);
    for (std::int64_t i = 0; i < m; ++i) {
        seeds.push_back(y);
        y = phase.exp_at(iterate(f, y, lengths[static_cast<std::size_t>(i)]),
                         jump_amp * jump_direction(rng_seed, i, dim));
    }
    Point first = seeds.front();
    return SegmentedPseudoOrbit::flatten(f, std::move(seeds), std::move(lengths), first, 0);
}

SplittingAssignment::SplittingAssignment(std::vector<Splitting> splittings) : splittings_(std::move(splittings)) {
    if (splittings_.empty()) {
        throw DomainError("splitting assignment is empty");
    }
    const int du = splittings_.front().dim_u();
    const int n = splittings_.front().dim();
    for (const auto& s : splittings_) {
        if (s.dim_u() != du || s.dim() != n) {
            throw DimensionError("splitting dimensions vary along the orbit");
        }
    }
}

namespace {

int count_unstable(const Mat& J) {
    Eigen::EigenSolver<Mat> es(J, false);
    int count = 0;
    for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k) {
        if (std::abs(es.eigenvalues()[k]) > 1.0) {
            ++count;
        }
    }
    return count;
}

Mat generic_basis(int dim, int cols) {
    // fixed, generic start vectors: not aligned with any coordinate subspace
    Mat b(dim, cols);
    for (int r = 0; r < dim; ++r) {
        for (int c = 0; c < cols; ++c) {
            b(r, c) = (r == c ? 1.0 : 0.0) + 0.3 / (1.0 + r + 2.0 * c);
        }
    }
    return b;
}

} // namespace

Splitting power_iteration_splitting(const SmoothMap& f, const Point& y, const PowerIterationStrategy& opts) {
    const int dim = f.dim();
    const int du = opts.dim_u >= 0 ? opts.dim_u : count_unstable(f.jacobian(y));
    const int ds = dim - du;
    // backward orbit y = q_0, q_1 = f^-1 q_0, ...
    std::vector<Vec> back{y.coords()};
    for (int k = 0; k < opts.steps; ++k) {
        back.push_back(f.lift_inverse(back.back()));
    }
    Mat U = orthonormalize(generic_basis(dim, du));
    for (int k = opts.steps; k >= 1; --k) {
        U = orthonormalize(f.jacobian(back[static_cast<std::size_t>(k)]) * U);
    }
    std::vector<Vec> fwd{y.coords()};
    for (int k = 0; k < opts.steps; ++k) {
        fwd.push_back(f.lift(fwd.back()));
    }
    Mat S = orthonormalize(generic_basis(dim, dim).rightCols(ds));
    for (int k = opts.steps - 1; k >= 0; --k) {
        S = orthonormalize(f.jacobian(fwd[static_cast<std::size_t>(k)]).fullPivLu().solve(S));
    }
    const double gap = std::sin(min_principal_angle(U, S));
    if (du > 0 && ds > 0 && gap < opts.min_gap) {
        throw ConvergenceError("power iteration does not separate the unstable and stable directions (gap " +
                               std::to_string(gap) + ")");
    }
    return Splitting::from_bases(U, S);
}

SplittingAssignment assign_splittings(const SegmentedPseudoOrbit& po, const SmoothMap& f,
                                      const SplittingStrategy& strategy) {
    const auto count = static_cast<std::size_t>(po.total_length() + 1);
    std::vector<Splitting> out;
    out.reserve(count);
    std::visit(
        [&](const auto& s) {
            using S = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<S, EigenStrategy>) {
                if (!f.constant_jacobian()) {
                    throw DomainError("eigen strategy needs a map with constant derivative");
                }
                const Splitting sp = eigen_splitting(f.jacobian(po.point(0)));
                out.assign(count, sp);
            } else if constexpr (std::is_same_v<S, ConstantStrategy>) {
                if (s.splitting.dim() != f.dim()) {
                    throw DimensionError("constant splitting does not match the phase dimension");
                }
                out.assign(count, s.splitting);
            } else if constexpr (std::is_same_v<S, UserStrategy>) {
                if (s.splittings.size() != count) {
                    throw DimensionError("user splittings: expected " + std::to_string(count) + " entries");
                }
                out = s.splittings;
            } else {
                for (std::size_t j = 0; j < count; ++j) {
                    if (j + 1 == count && po.is_closed()) {
                        out.push_back(out.front());
                    } else {
                        out.push_back(power_iteration_splitting(f, po.point(static_cast<int>(j)), s));
                    }
                }
            }
        },
        strategy);
    return SplittingAssignment(std::move(out));
}

} // namespace qshadow
