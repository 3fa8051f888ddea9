#include "doctest.h"

#include <random>

#include "qshadow/errors.hpp"
#include "qshadow/phase.hpp"

using namespace qshadow;

TEST_CASE("torus points are canonicalized into [0,1)") {
    const Phase t = Phase::torus(2);
    const Point p = t.point({1.25, -0.25});
    CHECK(p[0] == doctest::Approx(0.25));
    CHECK(p[1] == doctest::Approx(0.75));
    CHECK(t.point(p.coords()) == p);
    CHECK(t.point({1.0, 0.0})[0] == 0.0);
}

TEST_CASE("dimension checks") {
    CHECK_THROWS_AS(Phase::torus(1), DimensionError);
    const Phase t = Phase::torus(2);
    CHECK_THROWS_AS(t.point({0.1, 0.2, 0.3}), DimensionError);
    CHECK_THROWS_AS(t.exp_at(t.point({0.1, 0.2}), Vec::Zero(3)), DimensionError);
}

TEST_CASE("exp on the torus is translation mod 1") {
    const Phase t = Phase::torus(2);
    const Point p = t.point({0.9, 0.9});
    CHECK(t.exp_at(p, Vec::Zero(2)) == p);
    const Point q = t.exp_at(p, Vec::Constant(2, 0.2));
    CHECK(q[0] == doctest::Approx(0.1).epsilon(1e-14));
    CHECK(q[1] == doctest::Approx(0.1).epsilon(1e-14));
}

TEST_CASE("exp_inv undoes exp for short vectors") {
    const Phase t = Phase::torus(2);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::uniform_real_distribution<double> w(-0.17, 0.17);
    for (int i = 0; i < 1000; ++i) {
        const Point p = t.point({u(rng), u(rng)});
        Vec v(2);
        v << w(rng), w(rng);
        CHECK((t.exp_inv_at(p, t.exp_at(p, v)) - v).norm() <= 1e-14);
    }
}

TEST_CASE("exp_inv beyond the injectivity radius is rejected") {
    const Phase t = Phase::torus(2);
    CHECK_THROWS_AS(t.exp_inv_at(t.point({0.0, 0.0}), t.point({0.5, 0.0})), DomainError);
    CHECK(t.injectivity_radius() == 0.5);
}

TEST_CASE("torus wrap picks the representative in (-1/2, 1/2]") {
    const Phase t = Phase::torus(2);
    Vec d(2);
    d << 0.7, -0.5;
    const Vec w = t.wrap(d);
    CHECK(w[0] == doctest::Approx(-0.3));
    CHECK(w[1] == doctest::Approx(0.5));
}

TEST_CASE("distances") {
    const Phase t = Phase::torus(2);
    const Point p = t.point({0.3, 0.4});
    CHECK(t.distance(p, p) == 0.0);
    CHECK(t.distance(t.point({0.95, 0.0}), t.point({0.05, 0.0})) == doctest::Approx(0.1).epsilon(1e-12));
    const Phase e = Phase::euclidean(2);
    CHECK(e.distance(e.point({0.0, 0.0}), e.point({3.0, 4.0})) == doctest::Approx(5.0));
    CHECK(e.exp_inv_at(e.point({0.0, 0.0}), e.point({30.0, 40.0}))[1] == 40.0);
}
