#include "qshadow/phase.hpp"

#include <cmath>
#include <string>

#include "qshadow/errors.hpp"

namespace qshadow {

namespace {

void require_dim(int dim) {
    if (dim < 2) {
        throw DimensionError("phase dimension must be at least 2, got " + std::to_string(dim));
    }
}

double canonical_coordinate(double x) {
    double r = x - std::floor(x);
    // x slightly below an integer can round up to exactly 1.0
    if (r >= 1.0) {
        r = 0.0;
    }
    return r;
}

} // namespace

Phase Phase::torus(int dim) {
    require_dim(dim);
    return Phase(PhaseKind::torus, dim);
}

Phase Phase::euclidean(int dim) {
    require_dim(dim);
    return Phase(PhaseKind::euclidean, dim);
}

void Phase::check_dim(const Vec& v, const char* what) const {
    if (v.size() != dim_) {
        throw DimensionError(std::string(what) + ": expected dimension " + std::to_string(dim_) +
                             ", got " + std::to_string(v.size()));
    }
}

Point Phase::point(const Vec& coords) const {
    check_dim(coords, "point");
    if (!is_torus()) {
        return Point(coords);
    }
    Vec c(coords.size());
    for (Eigen::Index i = 0; i < coords.size(); ++i) {
        c[i] = canonical_coordinate(coords[i]);
    }
    return Point(std::move(c));
}

Point Phase::point(std::initializer_list<double> coords) const {
    Vec v(static_cast<Eigen::Index>(coords.size()));
    Eigen::Index i = 0;
    for (double c : coords) {
        v[i++] = c;
    }
    return point(v);
}

Vec Phase::wrap(const Vec& displacement) const {
    if (!is_torus()) {
        return displacement;
    }
    Vec d(displacement.size());
    for (Eigen::Index i = 0; i < d.size(); ++i) {
        d[i] = displacement[i] - std::ceil(displacement[i] - 0.5);
    }
    return d;
}

Point Phase::exp_at(const Point& p, const Vec& v) const {
    check_dim(v, "exp_at");
    return point(p.coords() + v);
}

Vec Phase::exp_inv_at(const Point& p, const Point& q) const {
    Vec d = wrap(q.coords() - p.coords());
    if (is_torus() && d.norm() >= injectivity_radius()) {
        throw DomainError("exp_inv_at: points are " + std::to_string(d.norm()) +
                          " apart, beyond the injectivity radius");
    }
    return d;
}

double Phase::distance(const Point& p, const Point& q) const {
    return wrap(q.coords() - p.coords()).norm();
}

} // namespace qshadow
