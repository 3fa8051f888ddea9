#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <limits>

namespace qshadow {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

enum class PhaseKind { torus, euclidean };

/// A point of a flat phase space. Torus coordinates are kept in [0,1).
class Point {
public:
    Point() = default;

    const Vec& coords() const { return coords_; }
    double operator[](Eigen::Index i) const { return coords_[i]; }
    Eigen::Index dim() const { return coords_.size(); }

    bool operator==(const Point& other) const {
        return coords_.size() == other.coords_.size() && coords_ == other.coords_;
    }

private:
    friend class Phase;
    explicit Point(Vec coords) : coords_(std::move(coords)) {}

    Vec coords_;
};

/// Flat phase space: the torus R^n/Z^n or Euclidean R^n. The exponential
/// map is translation, so every chart is a shifted copy of the tangent space.
class Phase {
public:
    static Phase torus(int dim);
    static Phase euclidean(int dim);

    PhaseKind kind() const { return kind_; }
    int dim() const { return dim_; }
    bool is_torus() const { return kind_ == PhaseKind::torus; }

    /// Radius below which exp_at is injective (1/2 on the unit torus).
    double injectivity_radius() const {
        return is_torus() ? 0.5 : std::numeric_limits<double>::infinity();
    }

    /// Canonical representative; idempotent.
    Point point(const Vec& coords) const;
    Point point(std::initializer_list<double> coords) const;

    /// Shortest lift of a displacement: on the torus every coordinate is
    /// mapped into (-1/2, 1/2].
    Vec wrap(const Vec& displacement) const;

    Point exp_at(const Point& p, const Vec& v) const;
    /// Throws DomainError when rho(p, q) >= injectivity radius.
    Vec exp_inv_at(const Point& p, const Point& q) const;
    double distance(const Point& p, const Point& q) const;

    void check_dim(const Vec& v, const char* what) const;

    bool operator==(const Phase& other) const = default;

private:
    Phase(PhaseKind kind, int dim) : kind_(kind), dim_(dim) {}

    PhaseKind kind_;
    int dim_;
};

} // namespace qshadow
