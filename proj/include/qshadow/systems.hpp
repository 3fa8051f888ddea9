#pragma once

#include <memory>
#include <string>

#include "qshadow/phase.hpp"

namespace qshadow {

/// A C^1 diffeomorphism of a flat phase space, given through a lift to the
/// covering space R^n and its derivative.
class SmoothMap {
public:
    explicit SmoothMap(Phase phase) : phase_(phase) {}
    virtual ~SmoothMap() = default;

    const Phase& phase() const { return phase_; }
    int dim() const { return phase_.dim(); }

    /// Lifted evaluation; the result is not canonicalized.
    virtual Vec lift(const Vec& x) const = 0;
    virtual Mat jacobian(const Vec& x) const = 0;

    /// Lift of the inverse. The default solves lift(y) = x by Newton's method.
    virtual Vec lift_inverse(const Vec& x) const;
    virtual bool has_exact_inverse() const { return false; }
    virtual bool constant_jacobian() const { return false; }
    virtual std::string name() const = 0;

    Point apply(const Point& p) const;
    Point apply_inverse(const Point& p) const;
    Mat jacobian(const Point& p) const { return jacobian(p.coords()); }

private:
    Phase phase_;
};

using MapPtr = std::shared_ptr<const SmoothMap>;

/// x -> Mx. On the torus M must be an integer matrix with det = +-1.
class LinearMap final : public SmoothMap {
public:
    LinearMap(Phase phase, Mat matrix);

    Vec lift(const Vec& x) const override { return matrix_ * x; }
    Mat jacobian(const Vec&) const override { return matrix_; }
    Vec lift_inverse(const Vec& x) const override { return inverse_ * x; }
    bool has_exact_inverse() const override { return true; }
    bool constant_jacobian() const override { return true; }
    std::string name() const override { return "linear"; }

    const Mat& matrix() const { return matrix_; }

private:
    Mat matrix_;
    Mat inverse_;
};

/// f(x) = Ax + c (sin 2 pi x2, sin 2 pi x1) / (2 pi) mod 1 with A = [[2,1],[1,1]].
class PerturbedCatMap final : public SmoothMap {
public:
    explicit PerturbedCatMap(double amplitude);

    Vec lift(const Vec& x) const override;
    Mat jacobian(const Vec& x) const override;
    bool has_exact_inverse() const override { return amplitude_ == 0.0; }
    bool constant_jacobian() const override { return amplitude_ == 0.0; }
    Vec lift_inverse(const Vec& x) const override;
    std::string name() const override { return "perturbed_cat"; }

    double amplitude() const { return amplitude_; }

private:
    double amplitude_;
};

/// g = f + shift, the standard C^0-small perturbation.
class ShiftedMap final : public SmoothMap {
public:
    ShiftedMap(MapPtr base, Vec shift);

    Vec lift(const Vec& x) const override { return base_->lift(x) + shift_; }
    Mat jacobian(const Vec& x) const override { return base_->jacobian(x); }
    Vec lift_inverse(const Vec& x) const override { return base_->lift_inverse(x - shift_); }
    bool has_exact_inverse() const override { return base_->has_exact_inverse(); }
    bool constant_jacobian() const override { return base_->constant_jacobian(); }
    std::string name() const override { return "shifted_" + base_->name(); }

    const Vec& shift() const { return shift_; }
    const MapPtr& base() const { return base_; }

private:
    MapPtr base_;
    Vec shift_;
};

Mat cat_matrix();
MapPtr cat_map();
MapPtr perturbed_cat_map(double amplitude);
MapPtr linear_map(Phase phase, Mat matrix);
MapPtr shifted_map(MapPtr base, Vec shift);

/// f^n(p); negative n iterates the inverse.
Point iterate(const SmoothMap& f, Point p, int n);

/// Grid estimates of R = sup max(|Df|, |Df^-1|) and of the modulus of
/// continuity of Df at scale `scale`. Maps with constant derivative are
/// evaluated exactly. Grids cover [0,1)^n with `grid_res` points per axis,
/// reduced so that the total stays below 2^22 samples.
struct SystemBounds {
    double R = 1.0;
    double lip_modulus = 0.0;
    int grid_res = 0;
    double scale = 0.0;
};

SystemBounds estimate_bounds(const SmoothMap& f, int grid_res = 256, double scale = 1e-2);

/// max over a uniform [0,1)^n grid of rho(f(p), g(p)); a lower estimate of
/// the true sup distance. Requires grid_res >= 64.
double sup_distance(const SmoothMap& f, const SmoothMap& g, int grid_res = 256);

} // namespace qshadow
