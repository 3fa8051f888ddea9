#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "qshadow/pseudo_orbit.hpp"
#include "qshadow/refinement.hpp"
#include "qshadow/shadow_solver.hpp"

namespace qshadow {

struct SystemSpec {
    std::string type = "cat"; ///< cat | perturbed_cat | linear
    double amplitude = 0.0;
    Mat matrix;
    bool torus = true;
};

struct PseudoOrbitSpec {
    std::vector<Vec> seeds;           ///< explicit seeds; empty selects the generator
    std::vector<int> lengths;
    std::optional<Vec> terminal;
    std::optional<Vec> x0;            ///< generator start
    double jump_amp = 0.0;
    std::uint64_t rng_seed = 0;
    bool periodic = false;
    std::vector<int> windows;         ///< nonempty: two-sided windows [-k, k]
};

struct SplittingSpec {
    std::string strategy = "eigen";   ///< eigen | power | axes
    int dim_u = -1;
    int steps = 50;
};

struct CertificationSpec {
    double lambda = 0.5;
    double epsilon = 0.0;
    double delta = 0.0;
};

struct RefinementSpec {
    double lambda_tilde = 0.0;
    double lambda_0 = 0.0;
    double fp_tol = 1e-12;
    int max_iter = 10000;
};

struct SolverSpec {
    double eta = 0.0;
    double lambda_tilde = 0.0;
    double tol_fix = 1e-12;
    int max_iter = 10000;
    bool polish = true;
};

struct PerturbationSpec {
    std::string type = "none";        ///< none | shift | perturbed | system
    Vec shift;
    double amplitude = 0.0;
    std::optional<SystemSpec> system;
};

struct SweepSpec {
    std::string axis;                 ///< delta | d | epsilon | lambda
    std::vector<double> values;
};

struct RunConfig {
    SystemSpec system;
    PseudoOrbitSpec pseudo_orbit;
    SplittingSpec splitting;
    CertificationSpec certification;
    RefinementSpec refinement;
    SolverSpec solver;
    PerturbationSpec perturbation;
    std::optional<SweepSpec> sweep;
    std::optional<std::string> output_path;
    nlohmann::json raw; ///< the parsed document, echoed in reports
};

/// Validates the whole document before returning; unknown keys, wrong
/// types and out-of-range values raise ConfigError.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

MapPtr build_system(const SystemSpec& spec);
/// g for the run; returns f itself when the perturbation is "none".
MapPtr build_perturbation(const RunConfig& cfg, const MapPtr& f);
SegmentedPseudoOrbit build_pseudo_orbit(const RunConfig& cfg, const MapPtr& f);
PseudoOrbitGenerator build_generator(const RunConfig& cfg, const MapPtr& f);
SplittingStrategy build_strategy(const RunConfig& cfg);

RefinementConfig refinement_config(const RunConfig& cfg);
SolverConfig solver_config(const RunConfig& cfg);

} // namespace qshadow
