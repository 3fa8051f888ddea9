#include "qshadow/refinement.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <Eigen/LU>

#include "qshadow/errors.hpp"

namespace qshadow {

namespace {

Mat solve_checked(const Mat& lhs, const Mat& rhs, const char* what, int j) {
    Eigen::FullPivLU<Mat> lu(lhs);
    if (lhs.size() > 0 && (!lu.isInvertible() || std::abs(lu.rcond()) < 1e-14)) {
        throw SingularMatrixError(std::string(what) + " is singular at j = " + std::to_string(j));
    }
    return lu.solve(rhs);
}

double max_op_norm(const GraphSequence& g) {
    double m = 0.0;
    for (const auto& x : g) {
        m = std::max(m, op_norm(x));
    }
    return m;
}

} // namespace

double epsilon_cap(double lambda, double lambda_0, double R) {
    const double l2 = lambda_0 * lambda_0;
    return std::min((1.0 - l2) / ((l2 + 6.0) * R), (lambda_0 - lambda) / (lambda_0 * R));
}

RefinementConstants resolve(const RefinementConfig& cfg, const SmoothMap& f) {
    RefinementConstants k{};
    k.lambda = cfg.lambda;
    k.lambda_tilde = cfg.lambda_tilde > 0.0 ? cfg.lambda_tilde : (3.0 * cfg.lambda + 1.0) / 4.0;
    k.lambda_0 = cfg.lambda_0 > 0.0 ? cfg.lambda_0 : 0.5 * (k.lambda + k.lambda_tilde);
    if (!(0.0 < k.lambda && k.lambda < k.lambda_0 && k.lambda_0 < k.lambda_tilde && k.lambda_tilde < 1.0)) {
        throw DomainError("refinement requires 0 < lambda < lambda_0 < lambda_tilde < 1");
    }
    k.R = cfg.R > 0.0 ? cfg.R : estimate_bounds(f).R;
    k.eps_cap = epsilon_cap(k.lambda, k.lambda_0, k.R);
    k.epsilon = cfg.epsilon >= 0.0 ? cfg.epsilon : k.eps_cap;
    k.delta = cfg.delta;
    k.delta_1 = cfg.delta_1 > 0.0 ? cfg.delta_1 : 0.25 * f.phase().injectivity_radius();
    if (!std::isfinite(k.delta_1)) {
        k.delta_1 = 0.25;
    }
    return k;
}

std::vector<BlockJacobian> chart_blocks(const SegmentedPseudoOrbit& po, const SplittingAssignment& sp,
                                        const SmoothMap& f, double delta_1) {
    for (int i = 0; i < po.segment_count(); ++i) {
        if (po.residuals()[static_cast<std::size_t>(i)] > delta_1) {
            throw DomainError("chart_blocks: residual of segment " + std::to_string(i) + " exceeds delta_1");
        }
    }
    return derivative_blocks(po, sp, f);
}

GraphSequence graph_step(const GraphSequence& P, std::span<const BlockJacobian> blocks) {
    if (P.size() != blocks.size() + 1) {
        throw DimensionError("graph_step: need one graph per index 0..N");
    }
    GraphSequence out(P.size());
    out[0] = P[0];
    for (std::size_t j = 0; j < blocks.size(); ++j) {
        const auto& b = blocks[j];
        const Mat lhs = b.A + b.B * P[j];
        const Mat num = b.C + b.D * P[j];
        // X lhs = num  <=>  lhs^T X^T = num^T
        out[j + 1] = solve_checked(lhs.transpose(), num.transpose(), "A + B P", static_cast<int>(j)).transpose();
    }
    return out;
}

Mat stable_graph_step(const Mat& Q_next, const BlockJacobian& b) {
    return solve_checked(b.A - Q_next * b.C, Q_next * b.D - b.B, "A - Q C", -1);
}

double unstable_invariance_residual(const GraphSequence& P, std::span<const BlockJacobian> blocks) {
    double r = 0.0;
    for (std::size_t j = 0; j < blocks.size(); ++j) {
        const auto& b = blocks[j];
        r = std::max(r, op_norm(P[j + 1] * (b.A + b.B * P[j]) - (b.C + b.D * P[j])));
    }
    return r;
}

double stable_invariance_residual(const GraphSequence& Q, std::span<const BlockJacobian> blocks) {
    double r = 0.0;
    for (std::size_t j = 0; j < blocks.size(); ++j) {
        const auto& b = blocks[j];
        r = std::max(r, op_norm((b.A - Q[j + 1] * b.C) * Q[j] - (Q[j + 1] * b.D - b.B)));
    }
    return r;
}

GraphSolve solve_unstable_graphs(std::span<const BlockJacobian> blocks, double fp_tol, int max_iter) {
    if (blocks.empty()) {
        throw DimensionError("solve_unstable_graphs: empty block sequence");
    }
    const auto du = blocks.front().A.cols();
    const auto ds = blocks.front().D.cols();
    GraphSolve out;
    out.graphs.assign(blocks.size() + 1, Mat::Zero(ds, du));
    for (out.iterations = 1; out.iterations <= max_iter; ++out.iterations) {
        GraphSequence next = graph_step(out.graphs, blocks);
        double diff = 0.0;
        for (std::size_t j = 0; j < next.size(); ++j) {
            diff = std::max(diff, op_norm(next[j] - out.graphs[j]));
        }
        out.graphs = std::move(next);
        out.updates.push_back(diff);
        if (diff < fp_tol) {
            out.converged = true;
            break;
        }
    }
    out.iterations = std::min(out.iterations, max_iter);
    out.invariance_residual = unstable_invariance_residual(out.graphs, blocks);
    out.max_norm = max_op_norm(out.graphs);
    return out;
}

GraphSolve solve_stable_graphs(std::span<const BlockJacobian> blocks) {
    if (blocks.empty()) {
        throw DimensionError("solve_stable_graphs: empty block sequence");
    }
    const auto du = blocks.front().A.cols();
    const auto ds = blocks.front().D.cols();
    GraphSolve out;
    out.graphs.assign(blocks.size() + 1, Mat::Zero(du, ds));
    for (std::size_t j = blocks.size(); j-- > 0;) {
        out.graphs[j] = solve_checked(blocks[j].A - out.graphs[j + 1] * blocks[j].C,
                                      out.graphs[j + 1] * blocks[j].D - blocks[j].B, "A - Q C",
                                      static_cast<int>(j));
    }
    out.iterations = 1;
    out.converged = true;
    out.invariance_residual = stable_invariance_residual(out.graphs, blocks);
    out.max_norm = max_op_norm(out.graphs);
    return out;
}

RefinedSplitting refine(const SegmentedPseudoOrbit& po, const SplittingAssignment& sp, const SmoothMap& f,
                        const RefinementConfig& cfg) {
    const RefinementConstants k = resolve(cfg, f);
    if (k.epsilon > k.eps_cap) {
        throw PreconditionError("refine: epsilon = " + std::to_string(k.epsilon) + " exceeds eps_cap = " +
                                std::to_string(k.eps_cap));
    }
    Certificate input = certify_pseudo_orbit(po, sp, f, k.lambda, k.epsilon, k.delta);
    if (!input.passed) {
        const auto b = input.binding();
        throw PreconditionError("refine: input pseudo-orbit is not certified at lambda = " +
                                std::to_string(k.lambda) + " (binding: " +
                                std::string(condition_name(b->condition)) + ", segment " +
                                std::to_string(b->segment) + ", step " + std::to_string(b->step) + ")");
    }
    const auto blocks = chart_blocks(po, sp, f, k.delta_1);

    GraphSolve up = solve_unstable_graphs(blocks, cfg.fp_tol, cfg.max_iter);
    if (!up.converged) {
        const auto& u = up.updates;
        const double ratio = u.size() >= 2 && u[u.size() - 2] > 0.0 ? u.back() / u[u.size() - 2] : 0.0;
        throw ConvergenceError("refine: unstable graph transform did not converge, last contraction ratio " +
                               std::to_string(ratio));
    }
    GraphSolve down = solve_stable_graphs(blocks);

    const int N = po.total_length();
    std::vector<Splitting> refined;
    refined.reserve(static_cast<std::size_t>(N + 1));
    for (int j = 0; j <= N; ++j) {
        const auto& s = sp.at(j);
        const auto ju = static_cast<std::size_t>(j);
        refined.push_back(Splitting::from_bases(s.unstable() + s.stable() * up.graphs[ju],
                                                s.unstable() * down.graphs[ju] + s.stable()));
    }

    RefinedSplitting out{k,
                         SplittingAssignment(std::move(refined)),
                         {},
                         {},
                         {},
                         std::move(up),
                         std::move(down),
                         std::move(input),
                         {},
                         0.0,
                         true,
                         true,
                         true,
                         std::numbers::pi / 2};

    std::vector<BlockJacobian> diag;
    const double lo = k.lambda_0 / k.lambda_tilde;
    const double hi = k.lambda_tilde / k.lambda_0;
    for (int j = 0; j < N; ++j) {
        const auto ju = static_cast<std::size_t>(j);
        const Mat Df = f.jacobian(po.point(j));
        BlockJacobian b = block_decompose(Df, out.splittings.at(j), out.splittings.at(j + 1));
        out.max_off_diagonal = std::max(out.max_off_diagonal, b.max_off_diagonal());
        out.M.push_back(b.A);
        out.N.push_back(b.D);
        diag.push_back({b.A, Mat::Zero(b.B.rows(), b.B.cols()), Mat::Zero(b.C.rows(), b.C.cols()), b.D});
        out.blocks.push_back(std::move(b));

        const auto& orig = blocks[ju];
        const double mM = min_norm(out.M.back());
        const double nM = op_norm(out.M.back());
        if (!(lo * min_norm(orig.A) <= mM && mM <= nM && nM <= hi * op_norm(orig.A))) {
            out.sandwich_ok = false;
        }
        const Mat exp_block = orig.A + orig.B * out.unstable.graphs[ju];
        if (min_norm(exp_block) < min_norm(orig.A) - 3.0 * k.eps_cap) {
            out.expansion_ok = false;
        }
        const Mat con_block = orig.D + orig.C * out.stable.graphs[ju];
        if (op_norm(con_block) > op_norm(orig.D) + 3.0 * k.eps_cap) {
            out.contraction_ok = false;
        }
    }
    for (const auto& s : out.splittings.all()) {
        out.min_angle = std::min(out.min_angle, min_principal_angle(s.unstable(), s.stable()));
    }
    out.certificate = certify_blocks(diag, po.offsets(), po.residuals(), k.lambda_tilde, 0.0, k.delta);
    return out;
}

} // namespace qshadow
