#include "doctest.h"

#include <random>

#include "qshadow/errors.hpp"
#include "qshadow/pseudo_orbit.hpp"

using namespace qshadow;

TEST_CASE("flatten offsets") {
    const auto f = cat_map();
    const Phase& t = f->phase();
    const auto po = SegmentedPseudoOrbit::flatten(*f, {t.point({0.1, 0.2}), t.point({0.3, 0.1}), t.point({0.7, 0.6})},
                                                  {2, 3, 1});
    const std::vector<int> expected{0, 2, 5, 6};
    CHECK(std::vector<int>(po.offsets().begin(), po.offsets().end()) == expected);
    CHECK(po.total_length() == 6);
    CHECK(po.points().size() == 7);
    CHECK(po.segment_of(4) == 1);
    CHECK(po.max_length() == 3);
}

TEST_CASE("a genuine orbit has zero residual") {
    const auto f = cat_map();
    const Point x0 = f->phase().point({0.1, 0.2});
    const auto po = SegmentedPseudoOrbit::flatten(*f, {x0, iterate(*f, x0, 3)}, {3, 2});
    CHECK(po.residuals()[0] == 0.0);
    CHECK(po.max_residual() == 0.0);
}

TEST_CASE("generated jumps have the prescribed size") {
    const auto f = cat_map();
    const auto po = generate(f, f->phase().point({0.1, 0.2}), {3, 3, 3, 3}, 1e-4, 42);
    for (double r : po.residuals()) {
        CHECK(std::abs(r - 1e-4) <= 1e-15);
    }
    CHECK(po.max_residual() == doctest::Approx(1e-4).epsilon(1e-10));
    const auto again = generate(f, f->phase().point({0.1, 0.2}), {3, 3, 3, 3}, 1e-4, 42);
    for (int j = 0; j <= po.total_length(); ++j) {
        CHECK(po.point(j) == again.point(j));
    }
}

TEST_CASE("zero jumps give a segmented genuine orbit") {
    const auto f = perturbed_cat_map(0.02);
    const auto po = generate(f, f->phase().point({0.4, 0.1}), {2, 5}, 0.0, 1);
    CHECK(po.max_residual() <= 1e-15);
}

TEST_CASE("within-segment orbit property and resegmenting") {
    const auto f = perturbed_cat_map(0.01);
    const auto po = generate(f, f->phase().point({0.3, 0.3}), {4, 1, 3}, 1e-3, 7);
    for (int i = 0; i < po.segment_count(); ++i) {
        for (int j = po.offsets()[i]; j + 1 < po.offsets()[i + 1]; ++j) {
            CHECK(f->phase().distance(f->apply(po.point(j)), po.point(j + 1)) <= 1e-14);
        }
    }
    const auto [seeds, lengths] = po.resegment();
    CHECK(std::vector<int>(po.lengths().begin(), po.lengths().end()) == lengths);
    for (std::size_t i = 0; i < seeds.size(); ++i) {
        CHECK(seeds[i] == po.seeds()[i]);
    }
}

TEST_CASE("two-sided windows agree on their overlap") {
    const auto f = cat_map();
    const PseudoOrbitGenerator gen(f, f->phase().point({0.1, 0.2}), {1, 2}, 1e-4, 3);
    const auto w2 = gen.window(2);
    const auto w4 = gen.window(4);
    CHECK(w2.first_segment() == -2);
    CHECK(w4.seeds()[2] == w2.seeds()[0]);
    CHECK(w2.point(w2.origin()) == w4.point(w4.origin()));
    for (double r : w4.residuals()) {
        CHECK(std::abs(r - 1e-4) <= 1e-14);
    }
}

TEST_CASE("closed pseudo-orbits") {
    const auto f = cat_map();
    const auto po = generate_periodic(*f, f->phase().point({0.2, 0.7}), {3, 2, 4}, 1e-4, 5);
    CHECK(po.is_closed());
    for (double r : po.residuals()) {
        CHECK(std::abs(r - 1e-4) <= 1e-12);
    }
}

TEST_CASE("splitting strategies") {
    const auto f = cat_map();
    const auto po = generate(f, f->phase().point({0.1, 0.2}), {2, 2}, 1e-4, 1);
    const auto eig = assign_splittings(po, *f, EigenStrategy{});
    CHECK(eig.size() == 5);
    const Splitting ref = eigen_splitting(cat_matrix());
    for (const auto& s : eig.all()) {
        CHECK((s.frame() - ref.frame()).norm() < 1e-14);
    }
    std::vector<Splitting> user(5, Splitting::axes(2, 1));
    const auto same = assign_splittings(po, *f, UserStrategy{user});
    CHECK((same.at(3).frame() - Mat::Identity(2, 2)).norm() == 0.0);
    CHECK_THROWS(assign_splittings(po, *f, UserStrategy{std::vector<Splitting>(2, Splitting::axes(2, 1))}));
}

TEST_CASE("power iteration stays close to the unperturbed eigen-splitting") {
    const auto f = perturbed_cat_map(0.01);
    const auto po = generate(f, f->phase().point({0.15, 0.35}), {3, 3}, 1e-4, 2);
    const auto sp = assign_splittings(po, *f, PowerIterationStrategy{});
    const Splitting ref = eigen_splitting(cat_matrix());
    for (const auto& s : sp.all()) {
        CHECK(min_principal_angle(s.unstable(), ref.unstable()) < 0.05);
        CHECK(min_principal_angle(s.stable(), ref.stable()) < 0.05);
    }
}

TEST_CASE("power-iteration splittings are invariant along orbits") {
    const auto f = perturbed_cat_map(0.05);
    const auto po = generate(f, f->phase().point({0.6, 0.25}), {4}, 0.0, 2);
    const auto sp = assign_splittings(po, *f, PowerIterationStrategy{60});
    for (int j = 0; j < 4; ++j) {
        const Vec image = f->jacobian(po.point(j)) * sp.at(j).unstable().col(0);
        CHECK(min_principal_angle(image.normalized(), sp.at(j + 1).unstable()) < 1e-10);
    }
}
