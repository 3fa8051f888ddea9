#include "doctest.h"

#include <cmath>

#include "qshadow/errors.hpp"
#include "qshadow/oracle.hpp"

using namespace qshadow;

namespace {

// |det(A^p - I)| = L_(2p) - 2 with Lucas numbers L_0 = 2, L_1 = 1
std::int64_t lucas(int n) {
    std::int64_t a = 2;
    std::int64_t b = 1;
    for (int i = 0; i < n; ++i) {
        const std::int64_t c = a + b;
        a = b;
        b = c;
    }
    return a;
}

} // namespace

TEST_CASE("cat map periodic point counts") {
    for (int p = 1; p <= 12; ++p) {
        CHECK(cat_map_fixed_point_count(p) == lucas(2 * p) - 2);
    }
    for (int p = 1; p <= 6; ++p) {
        const auto pts = cat_map_periodic_points(p);
        CHECK(static_cast<std::int64_t>(pts.size()) == cat_map_fixed_point_count(p));
        for (const auto& x : pts) {
            CHECK(closure_distance(*cat_map(), x, p) <= 1e-12);
        }
    }
    CHECK_THROWS_AS(cat_map_periodic_points(0), DomainError);
    CHECK_THROWS_AS(cat_map_periodic_points(13), DomainError);
}

TEST_CASE("period two points of the cat map") {
    const auto pts = cat_map_periodic_points(2);
    REQUIRE(pts.size() == 5);
    const double expected[5][2] = {{0, 0}, {0.2, 0.4}, {0.4, 0.8}, {0.6, 0.2}, {0.8, 0.6}};
    for (const auto& e : expected) {
        bool found = false;
        for (const auto& x : pts) {
            found = found || (std::abs(x[0] - e[0]) < 1e-15 && std::abs(x[1] - e[1]) < 1e-15);
        }
        CHECK(found);
    }
    CHECK(is_cat_periodic_exact(1, 2, 5, 2));
    CHECK(is_cat_periodic_exact(0, 0, 1, 1));
    CHECK_FALSE(is_cat_periodic_exact(2, 1, 5, 2));
    CHECK_FALSE(is_cat_periodic_exact(1, 2, 5, 1));
}

TEST_CASE("closed form of a scalar affine recursion") {
    // e_(j+1) = 2 e_j + r on the unstable axis and 0.5 e_j + r on the stable axis
    const Splitting sp = Splitting::axes(2, 1);
    Mat L(2, 2);
    L << 2, 0, 0, 0.5;
    AffineSequenceSystem sys;
    for (int j = 0; j < 3; ++j) {
        sys.L.push_back(L);
        Vec r(2);
        r << 1, 1;
        sys.r.push_back(r);
    }
    const auto e = bounded_orbit_closed_form(sys, sp);
    // unstable: e_3 = 0, e_2 = -1/2, e_1 = -3/4, e_0 = -7/8; stable: 0, 1, 3/2, 7/4
    CHECK(e[0][0] == doctest::Approx(-0.875));
    CHECK(e[1][0] == doctest::Approx(-0.75));
    CHECK(e[3][0] == 0.0);
    CHECK(e[0][1] == 0.0);
    CHECK(e[2][1] == doctest::Approx(1.5));
    CHECK(e[3][1] == doctest::Approx(1.75));
    CHECK(affine_residual(sys, e) <= 1e-15);
}

TEST_CASE("closed form preconditions") {
    const Splitting sp = Splitting::axes(2, 1);
    AffineSequenceSystem sys;
    Mat L(2, 2);
    L << 2, 0.3, 0, 0.5;
    sys.L.push_back(L);
    sys.r.push_back(Vec::Zero(2));
    CHECK_THROWS_AS(bounded_orbit_closed_form(sys, sp), DomainError);
    sys.L[0] << 0.9, 0, 0, 0.5;
    CHECK_THROWS_AS(bounded_orbit_closed_form(sys, sp), DomainError);
}

TEST_CASE("random affine systems respect their rates") {
    Mat Q = Mat::Random(3, 3);
    const Splitting sp = Splitting::from_bases(Q.leftCols(2), Q.rightCols(1));
    const auto sys = random_affine_system(sp, 30, 2.0, 0.5, 1e-2, 9);
    CHECK(sys.length() == 30);
    for (int j = 0; j < 30; ++j) {
        const auto b = block_decompose(sys.L[static_cast<std::size_t>(j)], sp, sp);
        CHECK(b.max_off_diagonal() < 1e-12);
        CHECK(min_norm(b.A) >= 2.0 - 1e-12);
        CHECK(op_norm(b.D) <= 0.5 + 1e-12);
        CHECK(sys.r[static_cast<std::size_t>(j)].norm() <= 1e-2 + 1e-15);
    }
    const auto again = random_affine_system(sp, 30, 2.0, 0.5, 1e-2, 9);
    CHECK(again.L[7] == sys.L[7]);
}

TEST_CASE("grid search finds a genuine orbit") {
    const auto f = cat_map();
    const Point x0 = f->phase().point({0.31, 0.52});
    const auto po = generate(f, x0, {6}, 0.0, 1);
    const auto best = brute_force_shadow(*f, po, 0.02, 41);
    CHECK(best.cell == doctest::Approx(0.001 * std::sqrt(2.0)));
    CHECK(best.distance <= 1e-12);
    CHECK(f->phase().distance(best.x, x0) <= 1e-12);
    CHECK_THROWS_AS(brute_force_shadow(*f, generate(f, x0, {13}, 0.0, 1), 0.02, 41), DomainError);
}
