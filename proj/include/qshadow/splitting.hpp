#pragma once

#include <utility>

#include "qshadow/phase.hpp"

namespace qshadow {

/// T_x M = E^u (+) E^s, each factor stored as an orthonormal basis.
class Splitting {
public:
    /// Orthonormalizes both bases (QR with a positive-diagonal convention, so
    /// an already orthonormal basis is returned unchanged). Throws
    /// SingularMatrixError when the concatenated basis is rank deficient.
    static Splitting from_bases(const Mat& unstable, const Mat& stable);

    /// Coordinate axes: the first `dim_u` axes span E^u.
    static Splitting axes(int dim, int dim_u);

    int dim() const { return static_cast<int>(frame_.rows()); }
    int dim_u() const { return static_cast<int>(u_.cols()); }
    int dim_s() const { return static_cast<int>(s_.cols()); }

    const Mat& unstable() const { return u_; }
    const Mat& stable() const { return s_; }
    /// [U S]
    const Mat& frame() const { return frame_; }
    const Mat& frame_inverse() const { return frame_inv_; }

    /// Coefficients (a, b) with v = U a + S b.
    Vec unstable_coords(const Vec& v) const;
    Vec stable_coords(const Vec& v) const;
    /// Oblique projections P^u, P^s (along the complementary factor).
    Vec project_u(const Vec& v) const { return u_ * unstable_coords(v); }
    Vec project_s(const Vec& v) const { return s_ * stable_coords(v); }
    Vec compose(const Vec& a, const Vec& b) const { return u_ * a + s_ * b; }

    /// kappa with |v|/kappa <= |v|_B <= kappa |v|.
    double norm_equivalence() const;

private:
    Splitting(Mat u, Mat s);

    Mat u_;
    Mat s_;
    Mat frame_;
    Mat frame_inv_;
};

/// Derivative L : T_x -> T_y written against splittings at x (source) and y (target):
/// L = [[A, B], [C, D]] with A: E^u_x -> E^u_y, B: E^s_x -> E^u_y, C: E^u_x -> E^s_y, D: E^s_x -> E^s_y.
struct BlockJacobian {
    Mat A;
    Mat B;
    Mat C;
    Mat D;

    /// Ambient matrix dst.frame * [[A,B],[C,D]] * src.frame^-1.
    Mat assemble(const Splitting& src, const Splitting& dst) const;
    double max_off_diagonal() const;
};

BlockJacobian block_decompose(const Mat& J, const Splitting& src, const Splitting& dst);

/// Smallest singular value; +infinity for an empty block.
double min_norm(const Mat& m);
/// Largest singular value; 0 for an empty block.
double op_norm(const Mat& m);
/// max(|v^u|, |v^s|)
double box_norm(const Vec& v, const Splitting& sp);

/// Unstable factor = eigenvectors with |eigenvalue| > 1. Throws when the
/// spectrum is not real or meets the unit circle.
Splitting eigen_splitting(const Mat& J);

/// Columns orthonormalized with positive R diagonal; throws on rank deficiency.
Mat orthonormalize(const Mat& basis);

/// Smallest principal angle between the column spans of two orthonormal bases.
double min_principal_angle(const Mat& a, const Mat& b);

} // namespace qshadow
