#include "doctest.h"

#include "qshadow/config.hpp"
#include "qshadow/errors.hpp"

using namespace qshadow;

namespace {

const char* base_config = R"({
  "system": {"type": "cat"},
  "pseudo_orbit": {"x0": [0.1, 0.2], "lengths": [4, 4, 4], "jump_amp": 1e-4, "rng_seed": 7},
  "certification": {"lambda": 0.4, "epsilon": 0.0, "delta": 1.1e-4},
  "solver": {"lambda_tilde": 0.55},
  "perturbation": {"type": "shift", "shift": [1e-4, 0]}
})";

RunConfig with(const std::string& patch) {
    auto doc = nlohmann::json::parse(base_config);
    doc.merge_patch(nlohmann::json::parse(patch));
    return parse_config(doc.dump());
}

} // namespace

TEST_CASE("a complete document") {
    const auto c = parse_config(base_config);
    CHECK(c.system.type == "cat");
    CHECK(c.pseudo_orbit.lengths == std::vector<int>{4, 4, 4});
    CHECK(c.pseudo_orbit.jump_amp == 1e-4);
    CHECK(c.pseudo_orbit.rng_seed == 7);
    CHECK(c.certification.lambda == 0.4);
    CHECK(c.solver.lambda_tilde == 0.55);
    CHECK(c.perturbation.type == "shift");
    CHECK_FALSE(c.sweep.has_value());
    CHECK(c.raw["system"]["type"] == "cat");
}

TEST_CASE("defaults") {
    const auto c = parse_config(R"({"system": {"type": "cat"}, "pseudo_orbit": {"x0": [0, 0], "lengths": [2]}})");
    CHECK(c.certification.lambda == 0.5);
    CHECK(c.splitting.strategy == "eigen");
    CHECK(c.perturbation.type == "none");
    CHECK(c.solver.tol_fix == 1e-12);
}

TEST_CASE("rejected documents") {
    CHECK_THROWS_AS(parse_config("{not json"), ConfigError);
    CHECK_THROWS_AS(parse_config("[]"), ConfigError);
    CHECK_THROWS_AS(with(R"({"bogus": 1})"), ConfigError);
    CHECK_THROWS_AS(with(R"({"system": {"colour": "red"}})"), ConfigError);
    CHECK_THROWS_AS(with(R"({"system": {"type": "henon"}})"), ConfigError);
    CHECK_THROWS_AS(with(R"({"certification": {"lambda": 1.5}})"), ConfigError);
    CHECK_THROWS_AS(with(R"({"certification": {"lambda": "half"}})"), ConfigError);
    CHECK_THROWS_AS(with(R"({"pseudo_orbit": {"lengths": [0]}})"), ConfigError);
    CHECK_THROWS_AS(with(R"({"pseudo_orbit": {"x0": [0.1]}})"), ConfigError);
    CHECK_THROWS_AS(with(R"({"perturbation": {"shift": [1, 2, 3]}})"), ConfigError);
    CHECK_THROWS_AS(with(R"({"sweep": {"axis": "delta", "values": [1e-3, 1e-4]}})"), ConfigError);
    CHECK_THROWS_AS(with(R"({"sweep": {"axis": "colour", "values": [1]}})"), ConfigError);
    CHECK_THROWS_AS(with(R"({"solver": {"tol_fix": -1}})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"system": {"type": "cat"}})"), ConfigError);
    CHECK_THROWS_AS(load_config("/nonexistent/config.json"), ConfigError);
}

TEST_CASE("linear systems") {
    const auto c = parse_config(R"({
      "system": {"type": "linear", "matrix": [[4, 0], [0, 0.25]], "phase": "euclidean"},
      "pseudo_orbit": {"seeds": [[0, 0], [0.1, 0]], "lengths": [1, 2]},
      "splitting": {"strategy": "axes", "dim_u": 1}
    })");
    const auto f = build_system(c.system);
    CHECK_FALSE(f->phase().is_torus());
    const auto po = build_pseudo_orbit(c, f);
    CHECK(po.total_length() == 3);
    CHECK(po.residuals()[0] == doctest::Approx(0.1));
    const auto sp = assign_splittings(po, *f, build_strategy(c));
    CHECK((sp.at(0).frame() - Mat::Identity(2, 2)).norm() == 0.0);
    CHECK_THROWS_AS(build_system(parse_config(R"({"system": {"type": "linear", "matrix": [[2, 0], [0, 0.5]]},
        "pseudo_orbit": {"x0": [0, 0], "lengths": [1]}})").system), ConfigError);
}

TEST_CASE("builders") {
    const auto c = parse_config(base_config);
    const auto f = build_system(c.system);
    const auto g = build_perturbation(c, f);
    CHECK(g != f);
    CHECK(f->phase().distance(g->apply(f->phase().point({0.3, 0.3})), f->apply(f->phase().point({0.3, 0.3}))) ==
          doctest::Approx(1e-4));
    const auto po = build_pseudo_orbit(c, f);
    CHECK(po.segment_count() == 3);
    CHECK(po.max_residual() == doctest::Approx(1e-4).epsilon(1e-9));
    const auto s = solver_config(c);
    CHECK(s.lambda == 0.4);
    CHECK(s.lambda_tilde == 0.55);
    CHECK(s.delta == 1.1e-4);
    const auto r = refinement_config(c);
    CHECK(r.lambda == 0.4);
    CHECK(r.delta == 1.1e-4);
    const auto none = parse_config(R"({"system": {"type": "cat"}, "pseudo_orbit": {"x0": [0, 0], "lengths": [2]}})");
    CHECK(build_perturbation(none, f) == f);
}

TEST_CASE("periodic and windowed pseudo-orbits") {
    const auto p = with(R"({"pseudo_orbit": {"periodic": true}})");
    const auto f = build_system(p.system);
    CHECK(build_pseudo_orbit(p, f).is_closed());
    const auto w = with(R"({"pseudo_orbit": {"windows": [2, 4]}})");
    const auto gen = build_generator(w, f);
    CHECK(gen.window(2).segment_count() == 5);
}
