#include "doctest.h"

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "json.hpp"

namespace {

const std::string dir = QSHADOW_TEST_DIR;

std::string write_file(const std::string& name, const std::string& text) {
    const std::string path = dir + "/" + name;
    std::ofstream(path) << text;
    return path;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int run(const std::string& args) {
    const std::string cmd = std::string(QSHADOW_CLI) + " " + args + " 2>/dev/null";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

const char* cat_config = R"({
  "system": {"type": "cat"},
  "pseudo_orbit": {"x0": [0.1, 0.2], "lengths": [4, 4, 4, 4, 4], "jump_amp": 1e-4, "rng_seed": 7},
  "certification": {"lambda": 0.4, "epsilon": 0.0, "delta": 1.1e-4},
  "solver": {"lambda_tilde": 0.55},
  "perturbation": {"type": "shift", "shift": [1e-4, 0]}
})";

} // namespace

TEST_CASE("certify") {
    const auto cfg = write_file("cli_certify.json", cat_config);
    const auto out = dir + "/cli_certify_out.json";
    REQUIRE(run("certify --config " + cfg + " --out " + out) == 0);
    const auto doc = nlohmann::json::parse(read_file(out));
    CHECK(doc["command"] == "certify");
    CHECK(doc["certificate"]["passed"] == true);
    CHECK(std::abs(doc["min_feasible_lambda"].get<double>() - 0.381966) < 1e-6);
    CHECK(doc["config"]["system"]["type"] == "cat");

    const auto csv = dir + "/cli_certify_out.csv";
    REQUIRE(run("certify --config " + cfg + " --format csv --out " + csv) == 0);
    CHECK(read_file(csv).rfind("segment,step,condition,lhs,rhs,margin", 0) == 0);
}

TEST_CASE("failing certificate exits with 1") {
    auto doc = nlohmann::json::parse(cat_config);
    doc["certification"]["lambda"] = 0.3;
    const auto cfg = write_file("cli_fail.json", doc.dump());
    const auto out = dir + "/cli_fail_out.json";
    CHECK(run("certify --config " + cfg + " --out " + out) == 1);
    const auto rep = nlohmann::json::parse(read_file(out));
    CHECK(rep["certificate"]["binding"]["condition"] == "stable_product");
}

TEST_CASE("shadow and refine") {
    const auto cfg = write_file("cli_shadow.json", cat_config);
    const auto out = dir + "/cli_shadow_out.json";
    REQUIRE(run("shadow --config " + cfg + " --out " + out) == 0);
    const auto doc = nlohmann::json::parse(read_file(out));
    CHECK(doc["shadowing"]["converged"] == true);
    CHECK(doc["shadowing"]["max_distance"].get<double>() < doc["shadowing"]["constants"]["eps_1"].get<double>());

    auto pdoc = nlohmann::json::parse(cat_config);
    pdoc["system"] = {{"type", "perturbed_cat"}, {"amplitude", 0.005}};
    pdoc["certification"] = {{"lambda", 0.4}, {"epsilon", 0.01}, {"delta", 1.1e-4}};
    pdoc["refinement"] = {{"lambda_tilde", 0.5}};
    const auto rcfg = write_file("cli_refine.json", pdoc.dump());
    const auto rout = dir + "/cli_refine_out.json";
    REQUIRE(run("refine --config " + rcfg + " --out " + rout) == 0);
    const auto rep = nlohmann::json::parse(read_file(rout));
    CHECK(rep["refinement"]["is_quasi_hyperbolic"] == true);
}

TEST_CASE("non-convergence exits with 2") {
    auto doc = nlohmann::json::parse(cat_config);
    doc["solver"]["max_iter"] = 2;
    const auto cfg = write_file("cli_slow.json", doc.dump());
    CHECK(run("shadow --config " + cfg + " --out " + dir + "/cli_slow_out.json") == 2);
}

TEST_CASE("configuration errors exit with 3 and write nothing") {
    const auto bad = write_file("cli_bad.json", "{\"system\": ");
    const auto out = dir + "/cli_bad_out.json";
    std::remove(out.c_str());
    CHECK(run("certify --config " + bad + " --out " + out) == 3);
    CHECK_FALSE(std::ifstream(out).good());
    const auto unknown = write_file("cli_unknown.json", R"({"system": {"type": "cat"}, "bogus": 1,
        "pseudo_orbit": {"x0": [0, 0], "lengths": [2]}})");
    CHECK(run("certify --config " + unknown) == 3);
    CHECK(run("certify --config " + dir + "/does_not_exist.json") == 3);
    CHECK(run("certify") == 3);
    CHECK(run("frobnicate --config x") == 3);
    const auto good = write_file("cli_good.json", cat_config);
    CHECK(run("certify --config " + good + " --format xml") == 3);
    CHECK(run("certify --config " + good + " --out /nonexistent_dir/out.json") == 3);
}

TEST_CASE("periodic needs closed data") {
    const auto cfg = write_file("cli_open.json", cat_config);
    CHECK(run("periodic --config " + cfg + " --out " + dir + "/cli_open_out.json") == 3);
    auto doc = nlohmann::json::parse(cat_config);
    doc["pseudo_orbit"]["periodic"] = true;
    doc["pseudo_orbit"]["lengths"] = {2, 2, 2};
    const auto pcfg = write_file("cli_periodic.json", doc.dump());
    const auto out = dir + "/cli_periodic_out.json";
    REQUIRE(run("periodic --config " + pcfg + " --out " + out) == 0);
    const auto rep = nlohmann::json::parse(read_file(out));
    CHECK(rep["shadowing"]["periodic_closure"].get<double>() <= 1e-10);
    CHECK(rep["shadowing"]["newton_polish"]["closure"].get<double>() <= 1e-12);
}

TEST_CASE("sweep output is reproducible and monotone in delta") {
    auto doc = nlohmann::json::parse(cat_config);
    doc["sweep"] = {{"axis", "delta"}, {"values", {1e-5, 1e-4, 1e-3}}};
    const auto cfg = write_file("cli_sweep.json", doc.dump());
    const auto a = dir + "/cli_sweep_a.csv";
    const auto b = dir + "/cli_sweep_b.csv";
    REQUIRE(run("sweep --config " + cfg + " --jobs 2 --out " + a) == 0);
    REQUIRE(run("sweep --config " + cfg + " --jobs 1 --out " + b) == 0);
    const std::string text = read_file(a);
    CHECK(text == read_file(b));
    std::istringstream lines(text);
    std::string line;
    std::getline(lines, line);
    CHECK(line == "axis_value,certified,converged,max_shadow_distance,iterations,wall_ms");
    double prev = -1.0;
    int rows = 0;
    while (std::getline(lines, line)) {
        std::vector<std::string> cells;
        std::stringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) {
            cells.push_back(cell);
        }
        REQUIRE(cells.size() >= 4);
        const double d = std::stod(cells[3]);
        CHECK(d > prev);
        prev = d;
        ++rows;
    }
    CHECK(rows == 3);
    const auto c = dir + "/cli_sweep_c.csv";
    REQUIRE(run("sweep --config " + cfg + " --seed 9 --out " + c) == 0);
    CHECK(read_file(c) != text);
}

TEST_CASE("version") {
    CHECK(run("--version > /dev/null") == 0);
}
