#include "doctest.h"

#include <cmath>
#include <random>

#include "qshadow/errors.hpp"
#include "qshadow/oracle.hpp"
#include "qshadow/shadow_solver.hpp"

using namespace qshadow;

namespace {

Vec vec2(double a, double b) {
    Vec v(2);
    v << a, b;
    return v;
}

SolverConfig cat_config() {
    SolverConfig cfg;
    cfg.lambda = 0.4;
    cfg.lambda_tilde = 0.55;
    cfg.delta = 1.1e-4;
    return cfg;
}

} // namespace

TEST_CASE("psi inverts phi") {
    const auto f = perturbed_cat_map(0.02);
    const auto po = generate(f, f->phase().point({0.3, 0.6}), {3, 3}, 1e-4, 4);
    const auto sp = assign_splittings(po, *f, PowerIterationStrategy{});
    const auto charts = local_maps(po, f, f);
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-1e-3, 1e-3);
    for (int j = 0; j < po.total_length(); ++j) {
        const Vec v = vec2(u(rng), u(rng));
        const Vec w = sp.at(j).unstable() * u(rng);
        const Vec t = phi(*charts, sp, j, v, w);
        CHECK((sp.at(j + 1).project_s(t)).norm() < 1e-15);
        const Vec back = psi(*charts, sp, j, v, t);
        CHECK((back - w).norm() <= 1e-13);
    }
}

TEST_CASE("charts of a genuine orbit fix the origin") {
    const auto f = cat_map();
    const auto po = generate(f, f->phase().point({0.1, 0.2}), {5}, 0.0, 1);
    const auto charts = local_maps(po, f, f);
    for (int j = 0; j < 5; ++j) {
        CHECK(charts->F(j, Vec::Zero(2)).norm() < 1e-15);
        CHECK((charts->DF(j, Vec::Zero(2)) - cat_matrix()).norm() < 1e-15);
    }
    CHECK_THROWS_AS(charts->F(0, vec2(0.6, 0.0)), DomainError);
}

TEST_CASE("delta bump on the plane is shadowed by the origin") {
    Mat M(2, 2);
    M << 2, 0, 0, 0.5;
    const Phase plane = Phase::euclidean(2);
    const auto f = linear_map(plane, M);
    const double delta = 1e-3;
    const std::vector<Point> seeds{plane.point({0, 0}), plane.point({delta, delta}), plane.point({0, 0}),
                                   plane.point({0, 0})};
    const auto po = SegmentedPseudoOrbit::flatten(*f, seeds, {1, 1, 1, 1}, plane.point({0, 0}));
    const auto sp = assign_splittings(po, *f, ConstantStrategy{Splitting::axes(2, 1)});
    SolverConfig cfg;
    cfg.lambda = 0.55;
    cfg.delta = 2 * delta;
    const auto r = solve_finite(po, sp, f, f, cfg);
    CHECK(r.converged);
    REQUIRE(r.x.has_value());
    CHECK(r.x->coords().norm() <= 1e-10);
    CHECK(r.max_distance() == doctest::Approx(std::sqrt(2.0) * delta).epsilon(1e-9));
    CHECK(r.max_orbit_residual() <= 1e-12);
}

TEST_CASE("affine systems match the closed form") {
    std::mt19937_64 rng(3);
    for (int t = 0; t < 20; ++t) {
        const int n = 2 + t % 3;
        const int du = 1 + t % (n - 1);
        Mat Q = Mat::Random(n, n);
        const Splitting sp = Splitting::from_bases(Q.leftCols(du), Q.rightCols(n - du));
        const auto sys = random_affine_system(sp, 10 + t, 2.5, 0.4, 1e-3, 100 + t);
        const auto exact = bounded_orbit_closed_form(sys, sp);
        CHECK(affine_residual(sys, exact) <= 1e-12);
        const auto charts = sys.charts();
        const SplittingAssignment sa(std::vector<Splitting>(static_cast<std::size_t>(sys.length() + 1), sp));
        const std::vector<int> offs{0, sys.length()};
        SolverConfig cfg;
        cfg.lambda = 0.5;
        const auto r = solve_charts(charts, sa, offs, cfg, Boundary::finite);
        CHECK(r.converged);
        double err = 0.0;
        for (std::size_t j = 0; j < exact.size(); ++j) {
            err = std::max(err, (r.v[j] - exact[j]).cwiseAbs().maxCoeff());
        }
        CHECK(err <= 1e-8);
    }
}

TEST_CASE("operator fixed point") {
    const auto f = cat_map();
    const auto g = shifted_map(f, vec2(1e-4, 0));
    const auto po = generate(f, f->phase().point({0.1, 0.2}), {4, 4, 4, 4, 4}, 1e-4, 7);
    const auto sp = assign_splittings(po, *f, EigenStrategy{});
    const auto r = solve_finite(po, sp, f, g, cat_config());
    REQUIRE(r.converged);
    const auto charts = local_maps(po, f, g);
    const auto image = operator_A(*charts, sp, r.v, Boundary::finite);
    double diff = 0.0;
    for (std::size_t j = 0; j < image.size(); ++j) {
        diff = std::max(diff, (image[j] - r.v[j]).norm());
    }
    CHECK(diff <= 1e-11);
    CHECK(sp.at(0).stable_coords(r.v.front()).norm() <= 1e-15);
    CHECK(sp.at(20).unstable_coords(r.v.back()).norm() <= 1e-15);
}

TEST_CASE("cat window with a shifted map") {
    const auto f = cat_map();
    const auto g = shifted_map(f, vec2(1e-4, 0));
    const auto po = generate(f, f->phase().point({0.1, 0.2}), {4, 4, 4, 4, 4}, 1e-4, 7);
    const auto sp = assign_splittings(po, *f, EigenStrategy{});
    const auto r = solve_finite(po, sp, f, g, cat_config());
    CHECK(r.converged);
    CHECK(r.adapted);
    CHECK(r.ball_violations == 0);
    CHECK(r.max_distance() <= r.constants.eps_1);
    CHECK(r.max_orbit_residual() <= 1e-11);
    REQUIRE(r.preconditions.has_value());
    CHECK(r.preconditions->all());
    CHECK(r.constants.lambda_tilde == 0.55);
    CHECK(r.constants.eps_0 == doctest::Approx((1 + 0.4 - 1.1) / (4 * r.constants.R)));
    CHECK(r.constants.C == doctest::Approx(std::pow(r.constants.R, 4)));
    // the chart solution is a genuine g-orbit; direct iteration amplifies
    // rounding in x by up to |Df|^j
    const auto direct = orbit_distances(*g, *r.x, po);
    const double grow = op_norm(cat_matrix());
    for (std::size_t j = 0; j < direct.size(); ++j) {
        const double allowance = 8 * 2.2e-16 * std::pow(grow, static_cast<double>(j)) + 1e-15;
        CHECK(std::abs(direct[j] - r.distances[j]) <= allowance);
    }
}

TEST_CASE("zero jumps and no perturbation") {
    const auto f = cat_map();
    const auto po = generate(f, f->phase().point({0.1, 0.2}), {4, 4}, 0.0, 7);
    const auto sp = assign_splittings(po, *f, EigenStrategy{});
    const auto r = solve_finite(po, sp, f, f, cat_config());
    CHECK(r.converged);
    CHECK(r.max_distance() <= 1e-14);
}

TEST_CASE("periodic data") {
    const auto f = cat_map();
    const auto g = shifted_map(f, vec2(1e-4, 0));
    const auto po = generate_periodic(*f, f->phase().point({0.2, 0.7}), {2, 2, 2}, 1e-4, 5);
    const auto sp = assign_splittings(po, *f, EigenStrategy{});
    const auto r = solve_periodic(po, sp, f, g, cat_config());
    CHECK(r.converged);
    CHECK((r.v.front() - r.v.back()).norm() <= 1e-10);
    REQUIRE(r.periodic_closure.has_value());
    CHECK(*r.periodic_closure <= 1e-10);
    REQUIRE(r.polish.has_value());
    CHECK(r.polish->converged);
    CHECK(r.polish->closure <= 1e-12);

    const auto open = generate(f, f->phase().point({0.2, 0.7}), {2, 2}, 1e-4, 5);
    CHECK_THROWS_AS(solve_periodic(open, assign_splittings(open, *f, EigenStrategy{}), f, g, cat_config()),
                    DomainError);
}

TEST_CASE("polishing a rational periodic point") {
    const auto g = cat_map();
    const Point p = g->phase().point({0.2 + 1e-7, 0.4});
    CHECK(closure_distance(*g, p, 2) > 1e-7);
    const auto pol = polish_periodic(*g, p, 2);
    CHECK(pol.converged);
    CHECK(pol.closure <= 1e-12);
    CHECK(g->phase().distance(pol.x, g->phase().point({0.2, 0.4})) <= 1e-12);
}

TEST_CASE("growing windows settle") {
    const auto f = cat_map();
    const auto g = shifted_map(f, vec2(1e-4, 0));
    const PseudoOrbitGenerator gen(f, f->phase().point({0.1, 0.2}), {2}, 1e-4, 3);
    const std::vector<int> ks{2, 4, 6};
    const auto inf = solve_infinite(gen, ks, g, EigenStrategy{}, cat_config());
    REQUIRE(inf.table.size() == 3);
    CHECK(std::isnan(inf.table[0].diff));
    CHECK(inf.table[2].diff < inf.table[1].diff);
    CHECK(inf.table[2].converged);
}
