#include "qshadow/splitting.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <vector>

#include "qshadow/errors.hpp"

namespace qshadow {

Mat orthonormalize(const Mat& basis) {
    if (basis.cols() == 0) {
        return basis;
    }
    Eigen::HouseholderQR<Mat> qr(basis);
    Mat q = qr.householderQ() * Mat::Identity(basis.rows(), basis.cols());
    const Mat r = qr.matrixQR().topRows(basis.cols()).triangularView<Eigen::Upper>();
    const double scale = std::max(1.0, basis.norm());
    for (Eigen::Index k = 0; k < basis.cols(); ++k) {
        if (std::abs(r(k, k)) <= 1e-13 * scale) {
            throw SingularMatrixError("basis is rank deficient");
        }
        if (r(k, k) < 0.0) {
            q.col(k) = -q.col(k);
        }
    }
    return q;
}

Splitting::Splitting(Mat u, Mat s) : u_(std::move(u)), s_(std::move(s)) {
    frame_.resize(u_.rows(), u_.cols() + s_.cols());
    frame_ << u_, s_;
    Eigen::JacobiSVD<Mat> svd(frame_);
    const auto& sv = svd.singularValues();
    if (sv(sv.size() - 1) <= 1e-12 * sv(0)) {
        throw SingularMatrixError("splitting factors are not complementary");
    }
    frame_inv_ = frame_.inverse();
}

Splitting Splitting::from_bases(const Mat& unstable, const Mat& stable) {
    if (unstable.rows() != stable.rows() || unstable.cols() + stable.cols() != unstable.rows()) {
        throw DimensionError("splitting bases must have dim_u + dim_s = dim");
    }
    return Splitting(orthonormalize(unstable), orthonormalize(stable));
}

Splitting Splitting::axes(int dim, int dim_u) {
    if (dim_u < 0 || dim_u > dim) {
        throw DimensionError("axes splitting: dim_u out of range");
    }
    Mat id = Mat::Identity(dim, dim);
    return Splitting(id.leftCols(dim_u), id.rightCols(dim - dim_u));
}

Vec Splitting::unstable_coords(const Vec& v) const {
    return frame_inv_.topRows(dim_u()) * v;
}

Vec Splitting::stable_coords(const Vec& v) const {
    return frame_inv_.bottomRows(dim_s()) * v;
}

double Splitting::norm_equivalence() const {
    // |Ua + Sb| <= |a| + |b| <= 2 |v|_B and |v|_B <= |frame^-1| |v|.
    return std::max(2.0, op_norm(frame_inv_));
}

Mat BlockJacobian::assemble(const Splitting& src, const Splitting& dst) const {
    Mat K(A.rows() + C.rows(), A.cols() + B.cols());
    K << A, B, C, D;
    return dst.frame() * K * src.frame_inverse();
}

double BlockJacobian::max_off_diagonal() const {
    return std::max(op_norm(B), op_norm(C));
}

BlockJacobian block_decompose(const Mat& J, const Splitting& src, const Splitting& dst) {
    if (J.rows() != dst.dim() || J.cols() != src.dim()) {
        throw DimensionError("block_decompose: Jacobian does not match the splittings");
    }
    Eigen::JacobiSVD<Mat> svd(J);
    const auto& sv = svd.singularValues();
    if (!(sv(sv.size() - 1) > 1e-14 * sv(0))) {
        throw SingularMatrixError("block_decompose: Jacobian is singular");
    }
    const Mat K = dst.frame_inverse() * J * src.frame();
    const int du = src.dim_u();
    const int ds = src.dim_s();
    const int tu = dst.dim_u();
    const int ts = dst.dim_s();
    return BlockJacobian{K.topLeftCorner(tu, du), K.topRightCorner(tu, ds), K.bottomLeftCorner(ts, du),
                         K.bottomRightCorner(ts, ds)};
}

double min_norm(const Mat& m) {
    if (m.size() == 0) {
        return std::numeric_limits<double>::infinity();
    }
    Eigen::JacobiSVD<Mat> svd(m);
    const auto& s = svd.singularValues();
    // rectangular blocks: a tall matrix has cols() singular values, a wide one is never injective
    if (m.rows() < m.cols()) {
        return 0.0;
    }
    return s(s.size() - 1);
}

double op_norm(const Mat& m) {
    if (m.size() == 0) {
        return 0.0;
    }
    Eigen::JacobiSVD<Mat> svd(m);
    return svd.singularValues()(0);
}

double box_norm(const Vec& v, const Splitting& sp) {
    if (v.size() != sp.dim()) {
        throw DimensionError("box_norm: vector and splitting dimensions differ");
    }
    return std::max(sp.unstable_coords(v).norm(), sp.stable_coords(v).norm());
}

Splitting eigen_splitting(const Mat& J) {
    Eigen::EigenSolver<Mat> es(J);
    if (es.info() != Eigen::Success) {
        throw SingularMatrixError("eigen_splitting: eigendecomposition failed");
    }
    const auto values = es.eigenvalues();
    const auto vectors = es.eigenvectors();
    std::vector<Eigen::Index> unstable;
    std::vector<Eigen::Index> stable;
    for (Eigen::Index k = 0; k < values.size(); ++k) {
        const std::complex<double> mu = values[k];
        if (std::abs(mu.imag()) > 1e-12 * std::abs(mu)) {
            throw DomainError("eigen_splitting: complex spectrum is not supported");
        }
        const double a = std::abs(mu.real());
        if (std::abs(a - 1.0) < 1e-12) {
            throw DomainError("eigen_splitting: eigenvalue on the unit circle");
        }
        (a > 1.0 ? unstable : stable).push_back(k);
    }
    // order by decreasing modulus inside each factor for reproducible bases
    auto by_modulus = [&](Eigen::Index x, Eigen::Index y) {
        return std::abs(values[x].real()) > std::abs(values[y].real());
    };
    std::sort(unstable.begin(), unstable.end(), by_modulus);
    std::sort(stable.begin(), stable.end(), by_modulus);
    auto gather = [&](const std::vector<Eigen::Index>& idx) {
        Mat basis(J.rows(), static_cast<Eigen::Index>(idx.size()));
        for (std::size_t c = 0; c < idx.size(); ++c) {
            Vec col = vectors.col(idx[c]).real();
            // sign convention: largest-magnitude entry positive
            Eigen::Index imax = 0;
            col.cwiseAbs().maxCoeff(&imax);
            if (col[imax] < 0.0) {
                col = -col;
            }
            basis.col(static_cast<Eigen::Index>(c)) = col.normalized();
        }
        return basis;
    };
    return Splitting::from_bases(gather(unstable), gather(stable));
}

double min_principal_angle(const Mat& a, const Mat& b) {
    if (a.cols() == 0 || b.cols() == 0) {
        return std::numbers::pi / 2.0;
    }
    Eigen::JacobiSVD<Mat> svd(a.transpose() * b);
    const double c = std::clamp(svd.singularValues()(0), 0.0, 1.0);
    if (c < std::sqrt(0.5)) {
        return std::acos(c);
    }
    // small angles: acos loses half the digits, read the sine off the residual instead
    const Mat& wide = a.cols() >= b.cols() ? a : b;
    const Mat& narrow = a.cols() >= b.cols() ? b : a;
    Eigen::JacobiSVD<Mat> res(narrow - wide * (wide.transpose() * narrow));
    const Eigen::Index k = res.singularValues().size() - 1;
    return std::asin(std::clamp(res.singularValues()(k), 0.0, 1.0));
}

} // namespace qshadow
