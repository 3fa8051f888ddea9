#include "doctest.h"

#include <cmath>

#include "qshadow/certification.hpp"
#include "qshadow/errors.hpp"

using namespace qshadow;

namespace {

const double golden_sq_inv = (3.0 - std::sqrt(5.0)) / 2.0;

SegmentedPseudoOrbit cat_orbit(std::vector<int> lengths, double jump) {
    return generate(cat_map(), cat_map()->phase().point({0.1, 0.2}), std::move(lengths), jump, 7);
}

} // namespace

TEST_CASE("cat map passes with its eigen-splitting") {
    const auto f = cat_map();
    const auto po = cat_orbit({4, 4, 4}, 0.0);
    const auto sp = assign_splittings(po, *f, EigenStrategy{});
    const auto cert = certify_pseudo_orbit(po, sp, *f, 0.62, 0.0, 0.0);
    CHECK(cert.passed);
    CHECK(is_quasi_hyperbolic(cert));
    CHECK(cert.blocks.size() == 12);
    const auto mfl = min_feasible_lambda(po, sp, *f, 0.0);
    REQUIRE(mfl.has_value());
    CHECK(std::abs(*mfl - golden_sq_inv) <= 1e-6);
}

TEST_CASE("cat map binding condition below the threshold") {
    const auto f = cat_map();
    const auto po = cat_orbit({4, 4}, 0.0);
    const auto sp = assign_splittings(po, *f, EigenStrategy{});
    const auto cert = certify_pseudo_orbit(po, sp, *f, 0.3, 0.0, 0.0);
    CHECK_FALSE(cert.passed);
    const auto b = cert.binding();
    REQUIRE(b.has_value());
    CHECK(b->condition == Condition::stable_product);
    CHECK(b->segment == 0);
    CHECK(b->step == 1);
    CHECK(b->slack < 0.0);
}

TEST_CASE("diagonal map on the plane") {
    Mat M(2, 2);
    M << 4, 0, 0, 0.25;
    const auto f = linear_map(Phase::euclidean(2), M);
    const auto po = generate(f, f->phase().point({0.3, -0.2}), {3, 2}, 0.0, 1);
    const auto sp = assign_splittings(po, *f, ConstantStrategy{Splitting::axes(2, 1)});
    const auto mfl = min_feasible_lambda(po, sp, *f, 0.0);
    REQUIRE(mfl.has_value());
    CHECK(std::abs(*mfl - 0.25) <= 1e-6);
    CHECK(certify_pseudo_orbit(po, sp, *f, 0.26, 0.0, 0.0).passed);
    CHECK_FALSE(certify_pseudo_orbit(po, sp, *f, 0.24, 0.0, 0.0).passed);
}

TEST_CASE("identity is never quasi-hyperbolic") {
    const auto f = linear_map(Phase::euclidean(2), Mat::Identity(2, 2));
    const auto po = generate(f, f->phase().point({0.0, 0.0}), {3}, 0.0, 1);
    const auto sp = assign_splittings(po, *f, ConstantStrategy{Splitting::axes(2, 1)});
    const auto cert = certify_pseudo_orbit(po, sp, *f, 0.9, 0.0, 0.0);
    CHECK_FALSE(cert.passed);
    CHECK(cert.binding()->condition == Condition::stable_product);
    CHECK_FALSE(min_feasible_lambda(po, sp, *f, 0.0).has_value());
}

TEST_CASE("jump bound") {
    const auto f = cat_map();
    const auto po = cat_orbit({4, 4, 4}, 1e-4);
    const auto sp = assign_splittings(po, *f, EigenStrategy{});
    CHECK(certify_pseudo_orbit(po, sp, *f, 0.5, 0.0, 1e-4).passed);
    const auto cert = certify_pseudo_orbit(po, sp, *f, 0.5, 0.0, 9e-5);
    CHECK_FALSE(cert.passed);
    CHECK(cert.binding()->condition == Condition::residual);
    int residual_margins = 0;
    for (const auto& m : cert.margins) {
        if (m.condition == Condition::residual) {
            ++residual_margins;
            CHECK(m.step == -1);
        }
    }
    CHECK(residual_margins == 3);
}

TEST_CASE("off-diagonal bound") {
    const auto f = cat_map();
    const auto po = cat_orbit({3}, 0.0);
    Mat U(2, 1);
    U << 1, 0;
    Mat S(2, 1);
    S << 0, 1;
    const auto sp = assign_splittings(po, *f, ConstantStrategy{Splitting::from_bases(U, S)});
    const auto cert = certify_pseudo_orbit(po, sp, *f, 0.9, 0.5, 0.0);
    CHECK_FALSE(cert.passed);
    CHECK_FALSE(is_quasi_hyperbolic(cert));
    bool off_failed = false;
    for (const auto& m : cert.margins) {
        if (m.condition == Condition::off_diagonal && m.slack < 0.0) {
            off_failed = true;
            CHECK(m.lhs == doctest::Approx(1.0));
        }
    }
    CHECK(off_failed);
}

TEST_CASE("margin bookkeeping") {
    const auto f = cat_map();
    const auto po = cat_orbit({2, 3}, 1e-5);
    const auto sp = assign_splittings(po, *f, EigenStrategy{});
    const auto cert = certify_pseudo_orbit(po, sp, *f, 0.5, 0.0, 1e-4);
    // per segment of length n: n stable, n unstable, n ratio, n off-diagonal; one jump each
    CHECK(cert.margins.size() == 4 * 5 + 2);
    const auto worst = cert.worst_per_condition();
    CHECK(worst.size() == 5);
    for (const auto& m : cert.margins) {
        if (m.condition == Condition::stable_product) {
            CHECK(m.rhs == doctest::Approx(m.step * std::log(0.5)));
        }
    }
    const auto seg = certify_segment(po, 1, sp, *f, 0.5, 0.0);
    CHECK(seg.passed);
    CHECK(seg.margins.size() == 12);
    for (const auto& m : seg.margins) {
        CHECK(m.segment == 1);
    }
}

TEST_CASE("certification errors") {
    const auto f = cat_map();
    const auto po = cat_orbit({2}, 0.0);
    const auto sp = assign_splittings(po, *f, EigenStrategy{});
    CHECK_THROWS_AS(certify_pseudo_orbit(po, sp, *f, 1.0, 0.0, 0.0), DomainError);
    CHECK_THROWS_AS(certify_pseudo_orbit(po, sp, *f, 0.5, -1.0, 0.0), DomainError);
    const SplittingAssignment short_sp(std::vector<Splitting>(2, Splitting::axes(2, 1)));
    CHECK_THROWS_AS(certify_pseudo_orbit(po, short_sp, *f, 0.5, 0.0, 0.0), DimensionError);
    CHECK_THROWS_AS(certify_segment(po, 3, sp, *f, 0.5, 0.0), DomainError);
}
