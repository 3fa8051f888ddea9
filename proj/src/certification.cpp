#include "qshadow/certification.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <utility>

#include "qshadow/errors.hpp"

namespace qshadow {

std::string_view condition_name(Condition c) {
    switch (c) {
    case Condition::stable_product: return "stable_product";
    case Condition::unstable_product: return "unstable_product";
    case Condition::ratio: return "ratio";
    case Condition::off_diagonal: return "off_diagonal";
    case Condition::residual: return "residual";
    }
    return "unknown";
}

std::vector<Margin> Certificate::worst_per_condition() const {
    std::map<Condition, Margin> worst;
    for (const auto& m : margins) {
        auto it = worst.find(m.condition);
        if (it == worst.end() || m.slack < it->second.slack) {
            worst.insert_or_assign(m.condition, m);
        }
    }
    std::vector<Margin> out;
    for (const auto& [c, m] : worst) {
        out.push_back(m);
    }
    return out;
}

std::optional<Margin> Certificate::binding() const {
    if (margins.empty()) {
        return std::nullopt;
    }
    if (!passed) {
        // first violated inequality in (condition, segment, step order)
        const Margin* first = nullptr;
        for (const auto& m : margins) {
            if (m.slack < 0.0 && (!first || std::pair(m.condition, m.segment) < std::pair(first->condition, first->segment))) {
                first = &m;
            }
        }
        if (first) {
            return *first;
        }
    }
    return *std::min_element(margins.begin(), margins.end(),
                             [](const Margin& a, const Margin& b) { return a.slack < b.slack; });
}

std::vector<BlockJacobian> derivative_blocks(const SegmentedPseudoOrbit& po, const SplittingAssignment& sp,
                                             const SmoothMap& f) {
    const int n = po.total_length();
    if (sp.size() != n + 1) {
        throw DimensionError("splitting assignment length does not match the pseudo-orbit");
    }
    std::vector<BlockJacobian> blocks;
    blocks.reserve(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) {
        blocks.push_back(block_decompose(f.jacobian(po.point(j)), sp.at(j), sp.at(j + 1)));
    }
    return blocks;
}

namespace {

// log of a norm, with log(0) = -inf and log(inf) = +inf
double safe_log(double x) { return std::log(x); }

void segment_margins(std::span<const BlockJacobian> blocks, int begin, int end, int segment, double lambda,
                     double epsilon, std::vector<Margin>& out) {
    const int n = end - begin;
    const double log_lambda = std::log(lambda);
    std::vector<double> log_d(static_cast<std::size_t>(n));
    std::vector<double> log_ma(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) {
        const auto& b = blocks[static_cast<std::size_t>(begin + j)];
        log_d[static_cast<std::size_t>(j)] = safe_log(op_norm(b.D));
        log_ma[static_cast<std::size_t>(j)] = safe_log(min_norm(b.A));
    }
    double acc = 0.0;
    for (int k = 1; k <= n; ++k) {
        acc += log_d[static_cast<std::size_t>(k - 1)];
        const double rhs = k * log_lambda;
        out.push_back({Condition::stable_product, segment, k, acc, rhs, rhs - acc});
    }
    acc = 0.0;
    for (int k = n - 1; k >= 0; --k) {
        acc += log_ma[static_cast<std::size_t>(k)];
        const double rhs = (k - n) * log_lambda;
        out.push_back({Condition::unstable_product, segment, k, acc, rhs, acc - rhs});
    }
    const double lambda_sq = lambda * lambda;
    for (int j = 0; j < n; ++j) {
        const auto& b = blocks[static_cast<std::size_t>(begin + j)];
        const double ratio = op_norm(b.D) / min_norm(b.A);
        out.push_back({Condition::ratio, segment, j, ratio, lambda_sq, lambda_sq - ratio});
    }
    for (int j = 0; j < n; ++j) {
        const auto& b = blocks[static_cast<std::size_t>(begin + j)];
        const double off = b.max_off_diagonal();
        const double rhs = epsilon + off_diagonal_allowance * std::max({1.0, op_norm(b.A), op_norm(b.D)});
        out.push_back({Condition::off_diagonal, segment, j, off, rhs, rhs - off});
    }
}

void check_lambda(double lambda) {
    if (!(lambda > 0.0 && lambda < 1.0)) {
        throw DomainError("lambda must lie in (0,1)");
    }
}

} // namespace

Certificate certify_blocks(std::span<const BlockJacobian> blocks, std::span<const int> offsets,
                           std::span<const double> residuals, double lambda, double epsilon, double delta) {
    check_lambda(lambda);
    if (!(epsilon >= 0.0) || !(delta >= 0.0)) {
        throw DomainError("epsilon and delta must be nonnegative");
    }
    if (offsets.size() < 2 || offsets.front() != 0 || offsets.back() != static_cast<int>(blocks.size())) {
        throw DimensionError("segment offsets do not match the block sequence");
    }
    Certificate cert;
    cert.lambda = lambda;
    cert.epsilon = epsilon;
    cert.delta = delta;
    cert.blocks.assign(blocks.begin(), blocks.end());
    for (std::size_t i = 0; i + 1 < offsets.size(); ++i) {
        segment_margins(blocks, offsets[i], offsets[i + 1], static_cast<int>(i), lambda, epsilon, cert.margins);
    }
    for (std::size_t i = 0; i < residuals.size(); ++i) {
        const double rhs = delta + residual_allowance;
        cert.margins.push_back({Condition::residual, static_cast<int>(i), -1, residuals[i], rhs, rhs - residuals[i]});
    }
    cert.passed = std::all_of(cert.margins.begin(), cert.margins.end(), [](const Margin& m) { return m.slack >= 0.0; });
    return cert;
}

Certificate certify_segment(const SegmentedPseudoOrbit& po, int segment, const SplittingAssignment& sp,
                            const SmoothMap& f, double lambda, double epsilon) {
    if (segment < 0 || segment >= po.segment_count()) {
        throw DomainError("certify_segment: segment index out of range");
    }
    const auto all = derivative_blocks(po, sp, f);
    const int begin = po.offsets()[static_cast<std::size_t>(segment)];
    const int end = po.offsets()[static_cast<std::size_t>(segment) + 1];
    std::vector<BlockJacobian> seg(all.begin() + begin, all.begin() + end);
    const int offs[2] = {0, end - begin};
    Certificate cert = certify_blocks(seg, offs, {}, lambda, epsilon, 0.0);
    for (auto& m : cert.margins) {
        m.segment = segment;
    }
    return cert;
}

Certificate certify_pseudo_orbit(const SegmentedPseudoOrbit& po, const SplittingAssignment& sp, const SmoothMap& f,
                                 double lambda, double epsilon, double delta) {
    const auto blocks = derivative_blocks(po, sp, f);
    return certify_blocks(blocks, po.offsets(), po.residuals(), lambda, epsilon, delta);
}

bool is_quasi_hyperbolic(const Certificate& cert, double tol) {
    return std::all_of(cert.blocks.begin(), cert.blocks.end(),
                       [tol](const BlockJacobian& b) { return b.max_off_diagonal() <= tol; });
}

std::optional<double> min_feasible_lambda(std::span<const BlockJacobian> blocks, std::span<const int> offsets,
                                          double epsilon, double tol) {
    auto feasible = [&](double lambda) { return certify_blocks(blocks, offsets, {}, lambda, epsilon, 0.0).passed; };
    double hi = 1.0 - 1e-9;
    if (!feasible(hi)) {
        return std::nullopt;
    }
    double lo = 0.0;
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        (feasible(mid) ? hi : lo) = mid;
    }
    return hi;
}

std::optional<double> min_feasible_lambda(const SegmentedPseudoOrbit& po, const SplittingAssignment& sp,
                                          const SmoothMap& f, double epsilon, double tol) {
    const auto blocks = derivative_blocks(po, sp, f);
    return min_feasible_lambda(blocks, po.offsets(), epsilon, tol);
}

} // namespace qshadow
