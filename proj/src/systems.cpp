#include "qshadow/systems.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "qshadow/errors.hpp"

namespace qshadow {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double spectral_norm(const Mat& m) {
    if (m.size() == 0) {
        return 0.0;
    }
    Eigen::JacobiSVD<Mat> svd(m);
    return svd.singularValues()(0);
}

// Calls visit(p) for every point of the uniform grid on [0,1)^n.
template <typename Visit>
void for_each_grid_point(int dim, int res, Visit&& visit) {
    std::vector<int> idx(static_cast<std::size_t>(dim), 0);
    Vec p(dim);
    while (true) {
        for (int k = 0; k < dim; ++k) {
            p[k] = static_cast<double>(idx[k]) / res;
        }
        visit(p);
        int k = 0;
        while (k < dim && ++idx[k] == res) {
            idx[k] = 0;
            ++k;
        }
        if (k == dim) {
            break;
        }
    }
}

int effective_resolution(int dim, int res) {
    const double cap = std::pow(2.0, 22.0 / dim);
    return std::max(1, std::min(res, static_cast<int>(std::floor(cap))));
}

} // namespace

Vec SmoothMap::lift_inverse(const Vec& x) const {
    // Newton on lift(y) = x started from the inverse of the derivative at x.
    Vec y = x;
    Mat J = jacobian(y);
    y = J.fullPivLu().solve(x);
    for (int it = 0; it < 60; ++it) {
        Vec r = lift(y) - x;
        if (r.lpNorm<Eigen::Infinity>() <= 1e-15 * (1.0 + x.lpNorm<Eigen::Infinity>())) {
            return y;
        }
        y -= jacobian(y).fullPivLu().solve(r);
    }
    Vec r = lift(y) - x;
    if (r.norm() > 1e-12) {
        throw ConvergenceError("lift_inverse: Newton did not converge for " + name());
    }
    return y;
}

Point SmoothMap::apply(const Point& p) const {
    phase_.check_dim(p.coords(), "apply");
    return phase_.point(lift(p.coords()));
}

Point SmoothMap::apply_inverse(const Point& p) const {
    phase_.check_dim(p.coords(), "apply_inverse");
    return phase_.point(lift_inverse(p.coords()));
}

LinearMap::LinearMap(Phase phase, Mat matrix) : SmoothMap(phase), matrix_(std::move(matrix)) {
    if (matrix_.rows() != phase.dim() || matrix_.cols() != phase.dim()) {
        throw DimensionError("linear map matrix does not match the phase dimension");
    }
    Eigen::FullPivLU<Mat> lu(matrix_);
    if (!lu.isInvertible()) {
        throw SingularMatrixError("linear map matrix is singular");
    }
    inverse_ = lu.inverse();
    if (phase.is_torus()) {
        const bool integral = (matrix_.array() - matrix_.array().round()).abs().maxCoeff() == 0.0;
        if (!integral || std::abs(std::abs(matrix_.determinant()) - 1.0) > 1e-12) {
            throw DomainError("a linear torus map needs an integer matrix with determinant +-1");
        }
        inverse_ = inverse_.array().round().matrix();
    }
}

PerturbedCatMap::PerturbedCatMap(double amplitude) : SmoothMap(Phase::torus(2)), amplitude_(amplitude) {}

Vec PerturbedCatMap::lift(const Vec& x) const {
    Vec y(2);
    y[0] = 2.0 * x[0] + x[1] + amplitude_ * std::sin(kTwoPi * x[1]) / kTwoPi;
    y[1] = x[0] + x[1] + amplitude_ * std::sin(kTwoPi * x[0]) / kTwoPi;
    return y;
}

Mat PerturbedCatMap::jacobian(const Vec& x) const {
    Mat J(2, 2);
    J << 2.0, 1.0 + amplitude_ * std::cos(kTwoPi * x[1]),
         1.0 + amplitude_ * std::cos(kTwoPi * x[0]), 1.0;
    return J;
}

Vec PerturbedCatMap::lift_inverse(const Vec& x) const {
    if (amplitude_ == 0.0) {
        Vec y(2);
        y << x[0] - x[1], -x[0] + 2.0 * x[1];
        return y;
    }
    return SmoothMap::lift_inverse(x);
}

ShiftedMap::ShiftedMap(MapPtr base, Vec shift) : SmoothMap(base->phase()), base_(std::move(base)), shift_(std::move(shift)) {
    phase().check_dim(shift_, "shift");
}

Mat cat_matrix() {
    Mat A(2, 2);
    A << 2.0, 1.0, 1.0, 1.0;
    return A;
}

MapPtr cat_map() { return std::make_shared<LinearMap>(Phase::torus(2), cat_matrix()); }

MapPtr perturbed_cat_map(double amplitude) { return std::make_shared<PerturbedCatMap>(amplitude); }

MapPtr linear_map(Phase phase, Mat matrix) { return std::make_shared<LinearMap>(phase, std::move(matrix)); }

MapPtr shifted_map(MapPtr base, Vec shift) { return std::make_shared<ShiftedMap>(std::move(base), std::move(shift)); }

Point iterate(const SmoothMap& f, Point p, int n) {
    for (int k = 0; k < n; ++k) {
        p = f.apply(p);
    }
    for (int k = 0; k > n; --k) {
        p = f.apply_inverse(p);
    }
    return p;
}

SystemBounds estimate_bounds(const SmoothMap& f, int grid_res, double scale) {
    SystemBounds out;
    out.scale = scale;
    auto norms_at = [&](const Vec& p) {
        Mat J = f.jacobian(p);
        Eigen::JacobiSVD<Mat> svd(J);
        const auto& s = svd.singularValues();
        const double smin = s(s.size() - 1);
        if (!(smin > 0.0)) {
            throw SingularMatrixError("derivative is singular at a sample point of " + f.name());
        }
        return std::max(s(0), 1.0 / smin);
    };
    if (f.constant_jacobian()) {
        out.R = std::max(1.0, norms_at(Vec::Zero(f.dim())));
        out.grid_res = 1;
        return out;
    }
    const int res = effective_resolution(f.dim(), grid_res);
    out.grid_res = res;
    double R = 1.0;
    double lip = 0.0;
    for_each_grid_point(f.dim(), res, [&](const Vec& p) {
        R = std::max(R, norms_at(p));
        const Mat J = f.jacobian(p);
        for (int k = 0; k < f.dim(); ++k) {
            Vec q = p;
            q[k] += scale;
            lip = std::max(lip, spectral_norm(f.jacobian(q) - J));
        }
    });
    out.R = R;
    out.lip_modulus = lip;
    return out;
}

double sup_distance(const SmoothMap& f, const SmoothMap& g, int grid_res) {
    if (grid_res < 64) {
        throw DomainError("sup_distance needs at least 64 grid points per axis");
    }
    if (!(f.phase() == g.phase())) {
        throw DimensionError("sup_distance: maps live on different phase spaces");
    }
    const Phase& phase = f.phase();
    const int res = effective_resolution(f.dim(), grid_res);
    double best = 0.0;
    for_each_grid_point(f.dim(), res, [&](const Vec& p) {
        best = std::max(best, phase.wrap(g.lift(p) - f.lift(p)).norm());
    });
    return best;
}

} // namespace qshadow
