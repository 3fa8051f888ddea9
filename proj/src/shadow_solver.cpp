#include "qshadow/shadow_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/LU>

#include "qshadow/errors.hpp"
#include "qshadow/refinement.hpp"

namespace qshadow {

PseudoOrbitCharts::PseudoOrbitCharts(const SegmentedPseudoOrbit& po, MapPtr f, MapPtr g)
    : po_(&po), f_(std::move(f)), g_(std::move(g)) {
    if (!f_ || !g_) {
        throw DomainError("local_maps: null map");
    }
    if (!(f_->phase() == po.phase()) || !(g_->phase() == po.phase())) {
        throw DimensionError("local_maps: maps and pseudo-orbit live on different phase spaces");
    }
}

Vec PseudoOrbitCharts::local(const SmoothMap& m, int j, const Vec& v) const {
    const Phase& ph = po_->phase();
    ph.check_dim(v, "chart argument");
    if (v.lpNorm<Eigen::Infinity>() >= ph.injectivity_radius()) {
        throw DomainError("chart argument outside the injectivity ball at j = " + std::to_string(j));
    }
    return ph.wrap(m.lift(po_->point(j).coords() + v) - po_->point(j + 1).coords());
}

Mat PseudoOrbitCharts::DF(int j, const Vec& v) const { return f_->jacobian(Vec(po_->point(j).coords() + v)); }

AffineCharts::AffineCharts(std::vector<Mat> L, std::vector<Vec> r) : L_(std::move(L)), r_(std::move(r)) {
    if (L_.empty() || L_.size() != r_.size()) {
        throw DimensionError("affine charts: need one residual per matrix");
    }
    for (std::size_t j = 0; j < L_.size(); ++j) {
        if (L_[j].rows() != L_[j].cols() || L_[j].rows() != L_.front().rows() || r_[j].size() != L_[j].rows()) {
            throw DimensionError("affine charts: inconsistent dimensions");
        }
    }
}

std::unique_ptr<ChartSequence> local_maps(const SegmentedPseudoOrbit& po, MapPtr f, MapPtr g) {
    return std::make_unique<PseudoOrbitCharts>(po, std::move(f), std::move(g));
}

Vec phi(const ChartSequence& charts, const SplittingAssignment& sp, int j, const Vec& v_j, const Vec& w) {
    const Vec s = sp.at(j).project_s(v_j);
    return sp.at(j + 1).project_u(charts.F(j, s + w) - charts.F(j, s));
}

Vec psi(const ChartSequence& charts, const SplittingAssignment& sp, int j, const Vec& v_j, const Vec& target) {
    const Splitting& src = sp.at(j);
    const Splitting& dst = sp.at(j + 1);
    const int du = src.dim_u();
    if (du == 0) {
        return Vec::Zero(src.dim());
    }
    const Vec s = src.project_s(v_j);
    const Vec base = charts.F(j, s);
    const Vec t = dst.unstable_coords(target);
    const double tol = 1e-13 * std::max(1.0, t.lpNorm<Eigen::Infinity>());
    const Mat proj = dst.frame_inverse().topRows(du);
    Vec a = Vec::Zero(du);
    for (int it = 0; it < 50; ++it) {
        const Vec x = s + src.unstable() * a;
        const Vec res = dst.unstable_coords(charts.F(j, x) - base) - t;
        if (res.lpNorm<Eigen::Infinity>() <= tol) {
            return src.unstable() * a;
        }
        const Mat J = proj * charts.DF(j, x) * src.unstable();
        Eigen::FullPivLU<Mat> lu(J);
        if (!lu.isInvertible()) {
            throw ConvergenceError("psi: singular local derivative at j = " + std::to_string(j));
        }
        a -= lu.solve(res);
    }
    const Vec x = s + src.unstable() * a;
    if ((dst.unstable_coords(charts.F(j, x) - base) - t).lpNorm<Eigen::Infinity>() <= tol) {
        return src.unstable() * a;
    }
    throw ConvergenceError("psi: Newton iteration did not converge at j = " + std::to_string(j));
}

std::vector<Vec> operator_A(const ChartSequence& charts, const SplittingAssignment& sp, std::span<const Vec> v,
                            Boundary boundary) {
    const int N = charts.length();
    if (static_cast<int>(v.size()) != N + 1 || sp.size() != N + 1) {
        throw DimensionError("operator_A: need v_0..v_N and one splitting per index");
    }
    const int n = charts.dim();
    std::vector<Vec> ws(static_cast<std::size_t>(N + 1), Vec::Zero(n));
    std::vector<Vec> wu(static_cast<std::size_t>(N + 1), Vec::Zero(n));
    for (int j = 0; j < N; ++j) {
        const auto ju = static_cast<std::size_t>(j);
        const Vec gv = charts.G(j, v[ju]);
        ws[ju + 1] = sp.at(j + 1).project_s(gv);
        const Vec s = sp.at(j).project_s(v[ju]);
        const Vec target = sp.at(j + 1).project_u(-gv + charts.F(j, v[ju]) - charts.F(j, s) + v[ju + 1]);
        wu[ju] = psi(charts, sp, j, v[ju], target);
    }
    const auto Nu = static_cast<std::size_t>(N);
    if (boundary == Boundary::periodic) {
        ws[0] = ws[Nu];
        wu[Nu] = wu[0];
    }
    std::vector<Vec> w(Nu + 1);
    for (std::size_t j = 0; j <= Nu; ++j) {
        w[j] = wu[j] + ws[j];
    }
    return w;
}

double ShadowingResult::max_distance() const {
    return distances.empty() ? 0.0 : *std::max_element(distances.begin(), distances.end());
}

double ShadowingResult::max_orbit_residual() const {
    return orbit_residuals.empty() ? 0.0 : *std::max_element(orbit_residuals.begin(), orbit_residuals.end());
}

SolverConstants solver_constants(const SolverConfig& cfg, const SmoothMap& f, int max_segment_length) {
    SolverConstants k;
    k.lambda = cfg.lambda;
    k.lambda_tilde = cfg.lambda_tilde > 0.0 ? cfg.lambda_tilde : (3.0 * cfg.lambda + 1.0) / 4.0;
    if (!(0.0 < k.lambda && k.lambda < 1.0 && k.lambda < k.lambda_tilde &&
          k.lambda_tilde < 0.5 * (1.0 + k.lambda))) {
        throw DomainError("solver requires 0 < lambda < lambda_tilde < (1 + lambda) / 2");
    }
    k.R = cfg.R > 0.0 ? cfg.R : estimate_bounds(f).R;
    k.eps_0 = (1.0 + k.lambda - 2.0 * k.lambda_tilde) / (4.0 * k.R);
    k.eps_1 = cfg.eps_1 > 0.0 ? cfg.eps_1 : epsilon_cap(k.lambda, 0.5 * (k.lambda + k.lambda_tilde), k.R);
    k.eta = cfg.eta > 0.0 ? cfg.eta : std::min(k.eps_1, 0.25 * f.phase().injectivity_radius());
    k.a = max_segment_length;
    k.C = std::pow(k.R, k.a);
    k.delta_1 = 0.25 * (1.0 - k.lambda_tilde) * k.eta;
    k.delta_0 = k.delta_1 / k.C;
    k.d_0 = (1.0 - k.lambda_tilde) * k.eta / (4.0 * k.C);
    return k;
}

namespace {

std::vector<double> chart_scale(const ChartSequence& charts, const SplittingAssignment& sp,
                                std::span<const int> offsets, double lambda, bool& adapted) {
    const int N = charts.length();
    adapted = false;
    if (lambda > 0.0 && lambda < 1.0) {
        try {
            std::vector<BlockJacobian> blocks;
            blocks.reserve(static_cast<std::size_t>(N));
            for (int j = 0; j < N; ++j) {
                blocks.push_back(block_decompose(charts.DF(j, Vec::Zero(charts.dim())), sp.at(j), sp.at(j + 1)));
            }
            const auto h = adapted_weights(blocks, offsets, lambda);
            adapted = true;
            return scale_factors(h, offsets);
        } catch (const Error&) {
        }
    }
    return std::vector<double>(static_cast<std::size_t>(N + 1), 1.0);
}

ShadowingResult run_fixed_point(const ChartSequence& charts, const SplittingAssignment& sp, std::span<const int> offsets,
                        const SolverConfig& cfg, Boundary boundary, double eta) {
    const int N = charts.length();
    if (offsets.empty() || offsets.back() != N) {
        throw DimensionError("solver: offsets do not match the chart sequence");
    }
    ShadowingResult out;
    out.scale = chart_scale(charts, sp, offsets, cfg.lambda, out.adapted);
    const auto& l = out.scale;
    const auto n1 = static_cast<std::size_t>(N + 1);
    std::vector<Vec> v(n1, Vec::Zero(charts.dim()));
    int growth = 0;
    for (out.iterations = 1; out.iterations <= cfg.max_iter; ++out.iterations) {
        std::vector<Vec> w = operator_A(charts, sp, v, boundary);
        if (out.damped) {
            for (std::size_t j = 0; j < n1; ++j) {
                w[j] = (1.0 - cfg.damping) * v[j] + cfg.damping * w[j];
            }
        }
        double upd = 0.0;
        bool outside = false;
        for (std::size_t j = 0; j < n1; ++j) {
            upd = std::max(upd, box_norm(w[j] - v[j], sp.at(static_cast<int>(j))) / l[j]);
            const double nN = w[j].norm() / l[j];
            out.max_norm_N = std::max(out.max_norm_N, nN);
            outside = outside || nN > eta;
        }
        out.ball_violations += outside ? 1 : 0;
        v = std::move(w);
        if (!out.update_history.empty() && upd > out.update_history.back()) {
            ++growth;
        } else {
            growth = 0;
        }
        out.update_history.push_back(upd);
        if (upd < cfg.tol_fix) {
            out.converged = true;
            break;
        }
        if (growth >= 3 && !out.damped) {
            out.damped = true;
            growth = 0;
        }
    }
    out.iterations = std::min(out.iterations, cfg.max_iter);
    out.distances.resize(n1);
    for (std::size_t j = 0; j < n1; ++j) {
        out.distances[j] = v[j].norm();
    }
    out.orbit_residuals.resize(static_cast<std::size_t>(N));
    for (int j = 0; j < N; ++j) {
        const auto ju = static_cast<std::size_t>(j);
        out.orbit_residuals[ju] = (v[ju + 1] - charts.G(j, v[ju])).norm() / l[ju + 1];
    }
    out.v = std::move(v);
    return out;
}

ShadowingResult solve_pseudo_orbit(const SegmentedPseudoOrbit& po, const SplittingAssignment& sp, MapPtr f,
                                   MapPtr g, const SolverConfig& cfg, Boundary boundary) {
    if (sp.size() != po.total_length() + 1) {
        throw DimensionError("solver: need one splitting per flat index");
    }
    const SolverConstants k = solver_constants(cfg, *f, po.max_length());
    Preconditions pre;
    pre.certificate = certify_pseudo_orbit(po, sp, *f, k.lambda, cfg.epsilon, cfg.delta < 0.0 ? k.delta_0 : cfg.delta);
    pre.max_residual = po.max_residual();
    pre.d = cfg.d >= 0.0 ? cfg.d : (f == g ? 0.0 : sup_distance(*f, *g));
    pre.certified = pre.certificate.passed;
    pre.epsilon_ok = cfg.epsilon <= k.eps_0;
    pre.delta_ok = pre.max_residual <= k.delta_0;
    pre.d_ok = pre.d <= k.d_0;

    PseudoOrbitCharts charts(po, f, g);
    ShadowingResult out = run_fixed_point(charts, sp, po.offsets(), cfg, boundary, k.eta);
    out.constants = k;
    out.preconditions = std::move(pre);
    out.x = po.phase().exp_at(po.point(0), out.v.front());
    return out;
}

} // namespace

ShadowingResult solve_charts(const ChartSequence& charts, const SplittingAssignment& sp, std::span<const int> offsets,
                             const SolverConfig& cfg, Boundary boundary) {
    const double eta = cfg.eta > 0.0 ? cfg.eta : std::numeric_limits<double>::infinity();
    ShadowingResult out = run_fixed_point(charts, sp, offsets, cfg, boundary, eta);
    out.constants.lambda = cfg.lambda;
    out.constants.eta = eta;
    return out;
}

ShadowingResult solve_finite(const SegmentedPseudoOrbit& po, const SplittingAssignment& sp, MapPtr f, MapPtr g,
                             const SolverConfig& cfg) {
    return solve_pseudo_orbit(po, sp, std::move(f), std::move(g), cfg, Boundary::finite);
}

ShadowingResult solve_periodic(const SegmentedPseudoOrbit& po, const SplittingAssignment& sp, MapPtr f, MapPtr g,
                               const SolverConfig& cfg) {
    if (!po.is_closed()) {
        throw DomainError("solve_periodic: the pseudo-orbit does not close up");
    }
    ShadowingResult out = solve_pseudo_orbit(po, sp, f, g, cfg, Boundary::periodic);
    const int N = po.total_length();
    out.periodic_closure = closure_distance(*g, *out.x, N);
    if (cfg.polish) {
        out.polish = polish_periodic(*g, *out.x, N);
    }
    return out;
}

InfiniteResult solve_infinite(const PseudoOrbitGenerator& gen, std::span<const int> window_ks, MapPtr g,
                              const SplittingStrategy& strategy, const SolverConfig& cfg) {
    if (window_ks.empty() || !std::is_sorted(window_ks.begin(), window_ks.end()) || window_ks.front() < 0) {
        throw DomainError("solve_infinite: window sizes must be nonnegative and increasing");
    }
    const MapPtr& f = gen.map();
    SolverConfig c = cfg;
    if (c.R <= 0.0) {
        c.R = estimate_bounds(*f).R;
    }
    if (c.d < 0.0) {
        c.d = f == g ? 0.0 : sup_distance(*f, *g);
    }
    InfiniteResult out;
    for (int k : window_ks) {
        const SegmentedPseudoOrbit po = gen.window(k);
        const SplittingAssignment sp = assign_splittings(po, *f, strategy);
        ShadowingResult r = solve_finite(po, sp, f, g, c);
        WindowRow row;
        row.k = k;
        const int o = po.origin();
        row.v0 = r.v[static_cast<std::size_t>(o)];
        row.diff = out.table.empty() ? std::numeric_limits<double>::quiet_NaN()
                                     : (row.v0 - out.table.back().v0).norm();
        row.converged = r.converged;
        row.iterations = r.iterations;
        out.table.push_back(row);
        out.x = po.phase().exp_at(po.point(o), row.v0);
        out.result = std::move(r);
    }
    out.converged = out.table.size() >= 2 && out.table.back().diff < 10.0 * cfg.tol_fix;
    return out;
}

double closure_distance(const SmoothMap& g, const Point& x, int N) {
    return g.phase().distance(iterate(g, x, N), x);
}

PolishResult polish_periodic(const SmoothMap& g, const Point& x, int N, int max_steps, double tol) {
    const Phase& ph = g.phase();
    const int n = ph.dim();
    PolishResult best{x, closure_distance(g, x, N), 0, false};
    Point p = x;
    int stalled = 0;
    for (int it = 1; it <= max_steps && best.closure > tol; ++it) {
        Vec q = p.coords();
        Mat J = Mat::Identity(n, n);
        for (int k = 0; k < N; ++k) {
            J = g.jacobian(q) * J;
            q = ph.point(g.lift(q)).coords();
        }
        const Vec h = ph.wrap(q - p.coords());
        Eigen::FullPivLU<Mat> lu(J - Mat::Identity(n, n));
        if (!lu.isInvertible()) {
            break;
        }
        p = ph.point(Vec(p.coords() - lu.solve(h)));
        const double c = closure_distance(g, p, N);
        if (c < best.closure) {
            best = {p, c, it, false};
            stalled = 0;
        } else if (++stalled >= 2) {
            break;
        }
    }
    best.converged = best.closure <= 1e-10;
    return best;
}

std::vector<double> orbit_distances(const SmoothMap& g, const Point& x, const SegmentedPseudoOrbit& po) {
    std::vector<double> d;
    Point p = x;
    for (int j = 0; j <= po.total_length(); ++j) {
        d.push_back(po.phase().distance(p, po.point(j)));
        p = g.apply(p);
    }
    return d;
}

} // namespace qshadow
