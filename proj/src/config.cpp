#include "qshadow/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "qshadow/errors.hpp"

namespace qshadow {

namespace {

using nlohmann::json;

void require_object(const json& j, const std::string& where) {
    if (!j.is_object()) {
        throw ConfigError(where + ": expected an object");
    }
}

void check_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
    require_object(j, where);
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [key, _] : j.items()) {
        if (!ok.count(key)) {
            throw ConfigError(where + ": unknown key '" + key + "'");
        }
    }
}

double get_number(const json& j, const std::string& where) {
    if (!j.is_number()) {
        throw ConfigError(where + ": expected a number");
    }
    const double v = j.get<double>();
    if (!std::isfinite(v)) {
        throw ConfigError(where + ": expected a finite number");
    }
    return v;
}

int get_int(const json& j, const std::string& where) {
    if (!j.is_number_integer()) {
        throw ConfigError(where + ": expected an integer");
    }
    return j.get<int>();
}

bool get_bool(const json& j, const std::string& where) {
    if (!j.is_boolean()) {
        throw ConfigError(where + ": expected a boolean");
    }
    return j.get<bool>();
}

std::string get_string(const json& j, const std::string& where) {
    if (!j.is_string()) {
        throw ConfigError(where + ": expected a string");
    }
    return j.get<std::string>();
}

Vec get_vec(const json& j, const std::string& where) {
    if (!j.is_array() || j.empty()) {
        throw ConfigError(where + ": expected a nonempty array of numbers");
    }
    Vec v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) {
        v[static_cast<Eigen::Index>(i)] = get_number(j[i], where);
    }
    return v;
}

std::vector<int> get_int_list(const json& j, const std::string& where) {
    if (!j.is_array()) {
        throw ConfigError(where + ": expected an array of integers");
    }
    std::vector<int> out;
    for (const auto& x : j) {
        out.push_back(get_int(x, where));
    }
    return out;
}

void in_open_unit(double v, const std::string& where) {
    if (!(v > 0.0 && v < 1.0)) {
        throw ConfigError(where + ": must lie in (0, 1)");
    }
}

void nonnegative(double v, const std::string& where) {
    if (v < 0.0) {
        throw ConfigError(where + ": must be nonnegative");
    }
}

SystemSpec parse_system(const json& j, const std::string& where) {
    check_keys(j, where, {"type", "amplitude", "matrix", "phase"});
    SystemSpec s;
    if (j.contains("type")) {
        s.type = get_string(j["type"], where + ".type");
    }
    if (s.type != "cat" && s.type != "perturbed_cat" && s.type != "linear") {
        throw ConfigError(where + ".type: expected cat, perturbed_cat or linear");
    }
    if (j.contains("amplitude")) {
        s.amplitude = get_number(j["amplitude"], where + ".amplitude");
    }
    if (j.contains("phase")) {
        const std::string p = get_string(j["phase"], where + ".phase");
        if (p != "torus" && p != "euclidean") {
            throw ConfigError(where + ".phase: expected torus or euclidean");
        }
        s.torus = p == "torus";
    }
    if (s.type == "linear") {
        if (!j.contains("matrix") || !j["matrix"].is_array() || j["matrix"].empty()) {
            throw ConfigError(where + ".matrix: required for linear systems");
        }
        const auto& m = j["matrix"];
        const auto n = static_cast<Eigen::Index>(m.size());
        s.matrix.resize(n, n);
        for (Eigen::Index r = 0; r < n; ++r) {
            const Vec row = get_vec(m[static_cast<std::size_t>(r)], where + ".matrix");
            if (row.size() != n) {
                throw ConfigError(where + ".matrix: must be square");
            }
            s.matrix.row(r) = row.transpose();
        }
    } else {
        if (j.contains("matrix")) {
            throw ConfigError(where + ".matrix: only valid for linear systems");
        }
        if (!s.torus) {
            throw ConfigError(where + ".phase: cat maps live on the torus");
        }
    }
    return s;
}

} // namespace

RunConfig parse_config(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("malformed JSON: ") + e.what());
    }
    check_keys(doc, "config",
               {"system", "pseudo_orbit", "splitting", "certification", "refinement", "solver", "perturbation",
                "sweep", "output"});
    RunConfig c;
    c.raw = doc;
    if (!doc.contains("system") || !doc.contains("pseudo_orbit")) {
        throw ConfigError("config: 'system' and 'pseudo_orbit' are required");
    }
    c.system = parse_system(doc["system"], "system");
    const int dim = c.system.type == "linear" ? static_cast<int>(c.system.matrix.rows()) : 2;

    {
        const json& j = doc["pseudo_orbit"];
        check_keys(j, "pseudo_orbit",
                   {"seeds", "lengths", "terminal", "x0", "jump_amp", "rng_seed", "periodic", "windows"});
        auto& p = c.pseudo_orbit;
        if (!j.contains("lengths")) {
            throw ConfigError("pseudo_orbit.lengths: required");
        }
        p.lengths = get_int_list(j["lengths"], "pseudo_orbit.lengths");
        if (p.lengths.empty() || std::any_of(p.lengths.begin(), p.lengths.end(), [](int n) { return n < 1; })) {
            throw ConfigError("pseudo_orbit.lengths: need at least one positive length");
        }
        auto check_dim = [&](const Vec& v, const std::string& where) {
            if (v.size() != dim) {
                throw ConfigError(where + ": dimension mismatch with the system");
            }
        };
        if (j.contains("seeds")) {
            if (!j["seeds"].is_array()) {
                throw ConfigError("pseudo_orbit.seeds: expected an array of points");
            }
            for (const auto& s : j["seeds"]) {
                p.seeds.push_back(get_vec(s, "pseudo_orbit.seeds"));
                check_dim(p.seeds.back(), "pseudo_orbit.seeds");
            }
            if (p.seeds.size() != p.lengths.size()) {
                throw ConfigError("pseudo_orbit: seeds and lengths must have equal size");
            }
            if (j.contains("x0") || j.contains("jump_amp") || j.contains("windows")) {
                throw ConfigError("pseudo_orbit: x0, jump_amp and windows apply to generated orbits only");
            }
        } else {
            if (!j.contains("x0")) {
                throw ConfigError("pseudo_orbit: either seeds or x0 is required");
            }
            p.x0 = get_vec(j["x0"], "pseudo_orbit.x0");
            check_dim(*p.x0, "pseudo_orbit.x0");
        }
        if (j.contains("terminal")) {
            if (p.seeds.empty()) {
                throw ConfigError("pseudo_orbit.terminal: applies to explicit seeds only");
            }
            p.terminal = get_vec(j["terminal"], "pseudo_orbit.terminal");
            check_dim(*p.terminal, "pseudo_orbit.terminal");
        }
        if (j.contains("jump_amp")) {
            p.jump_amp = get_number(j["jump_amp"], "pseudo_orbit.jump_amp");
            nonnegative(p.jump_amp, "pseudo_orbit.jump_amp");
        }
        if (j.contains("rng_seed")) {
            if (!j["rng_seed"].is_number_unsigned() && !(j["rng_seed"].is_number_integer() && j["rng_seed"].get<std::int64_t>() >= 0)) {
                throw ConfigError("pseudo_orbit.rng_seed: expected a nonnegative integer");
            }
            p.rng_seed = j["rng_seed"].get<std::uint64_t>();
        }
        if (j.contains("periodic")) {
            p.periodic = get_bool(j["periodic"], "pseudo_orbit.periodic");
        }
        if (j.contains("windows")) {
            p.windows = get_int_list(j["windows"], "pseudo_orbit.windows");
            if (p.windows.empty() || !std::is_sorted(p.windows.begin(), p.windows.end()) || p.windows.front() < 0 ||
                std::adjacent_find(p.windows.begin(), p.windows.end()) != p.windows.end()) {
                throw ConfigError("pseudo_orbit.windows: expected strictly increasing nonnegative integers");
            }
            if (p.periodic) {
                throw ConfigError("pseudo_orbit: windows and periodic are exclusive");
            }
        }
        if (p.terminal && p.periodic) {
            throw ConfigError("pseudo_orbit: terminal and periodic are exclusive");
        }
    }

    if (doc.contains("splitting")) {
        const json& j = doc["splitting"];
        check_keys(j, "splitting", {"strategy", "dim_u", "steps"});
        if (j.contains("strategy")) {
            c.splitting.strategy = get_string(j["strategy"], "splitting.strategy");
        }
        if (c.splitting.strategy != "eigen" && c.splitting.strategy != "power" && c.splitting.strategy != "axes") {
            throw ConfigError("splitting.strategy: expected eigen, power or axes");
        }
        if (j.contains("dim_u")) {
            c.splitting.dim_u = get_int(j["dim_u"], "splitting.dim_u");
            if (c.splitting.dim_u < 0 || c.splitting.dim_u > dim) {
                throw ConfigError("splitting.dim_u: out of range");
            }
        }
        if (j.contains("steps")) {
            c.splitting.steps = get_int(j["steps"], "splitting.steps");
            if (c.splitting.steps < 1) {
                throw ConfigError("splitting.steps: must be positive");
            }
        }
    }
    if (c.splitting.strategy == "axes" && c.splitting.dim_u < 0) {
        throw ConfigError("splitting.dim_u: required for the axes strategy");
    }

    if (doc.contains("certification")) {
        const json& j = doc["certification"];
        check_keys(j, "certification", {"lambda", "epsilon", "delta"});
        if (j.contains("lambda")) {
            c.certification.lambda = get_number(j["lambda"], "certification.lambda");
        }
        if (j.contains("epsilon")) {
            c.certification.epsilon = get_number(j["epsilon"], "certification.epsilon");
        }
        if (j.contains("delta")) {
            c.certification.delta = get_number(j["delta"], "certification.delta");
        }
    }
    in_open_unit(c.certification.lambda, "certification.lambda");
    nonnegative(c.certification.epsilon, "certification.epsilon");
    nonnegative(c.certification.delta, "certification.delta");

    if (doc.contains("refinement")) {
        const json& j = doc["refinement"];
        check_keys(j, "refinement", {"lambda_tilde", "lambda_0", "fp_tol", "max_iter"});
        auto& r = c.refinement;
        if (j.contains("lambda_tilde")) {
            r.lambda_tilde = get_number(j["lambda_tilde"], "refinement.lambda_tilde");
            in_open_unit(r.lambda_tilde, "refinement.lambda_tilde");
        }
        if (j.contains("lambda_0")) {
            r.lambda_0 = get_number(j["lambda_0"], "refinement.lambda_0");
            in_open_unit(r.lambda_0, "refinement.lambda_0");
        }
        if (j.contains("fp_tol")) {
            r.fp_tol = get_number(j["fp_tol"], "refinement.fp_tol");
            if (!(r.fp_tol > 0.0)) {
                throw ConfigError("refinement.fp_tol: must be positive");
            }
        }
        if (j.contains("max_iter")) {
            r.max_iter = get_int(j["max_iter"], "refinement.max_iter");
            if (r.max_iter < 1) {
                throw ConfigError("refinement.max_iter: must be positive");
            }
        }
    }

    if (doc.contains("solver")) {
        const json& j = doc["solver"];
        check_keys(j, "solver", {"eta", "lambda_tilde", "tol_fix", "max_iter", "polish"});
        auto& s = c.solver;
        if (j.contains("eta")) {
            s.eta = get_number(j["eta"], "solver.eta");
            if (!(s.eta > 0.0)) {
                throw ConfigError("solver.eta: must be positive");
            }
        }
        if (j.contains("lambda_tilde")) {
            s.lambda_tilde = get_number(j["lambda_tilde"], "solver.lambda_tilde");
            in_open_unit(s.lambda_tilde, "solver.lambda_tilde");
        }
        if (j.contains("tol_fix")) {
            s.tol_fix = get_number(j["tol_fix"], "solver.tol_fix");
            if (!(s.tol_fix > 0.0)) {
                throw ConfigError("solver.tol_fix: must be positive");
            }
        }
        if (j.contains("max_iter")) {
            s.max_iter = get_int(j["max_iter"], "solver.max_iter");
            if (s.max_iter < 1) {
                throw ConfigError("solver.max_iter: must be positive");
            }
        }
        if (j.contains("polish")) {
            s.polish = get_bool(j["polish"], "solver.polish");
        }
    }

    if (doc.contains("perturbation")) {
        const json& j = doc["perturbation"];
        check_keys(j, "perturbation", {"type", "shift", "amplitude", "system"});
        auto& p = c.perturbation;
        if (j.contains("type")) {
            p.type = get_string(j["type"], "perturbation.type");
        }
        if (p.type != "none" && p.type != "shift" && p.type != "perturbed" && p.type != "system") {
            throw ConfigError("perturbation.type: expected none, shift, perturbed or system");
        }
        if (j.contains("shift")) {
            p.shift = get_vec(j["shift"], "perturbation.shift");
            if (p.shift.size() != dim) {
                throw ConfigError("perturbation.shift: dimension mismatch with the system");
            }
        }
        if (j.contains("amplitude")) {
            p.amplitude = get_number(j["amplitude"], "perturbation.amplitude");
        }
        if (j.contains("system")) {
            p.system = parse_system(j["system"], "perturbation.system");
        }
        if (p.type == "shift" && p.shift.size() == 0) {
            throw ConfigError("perturbation.shift: required for shift perturbations");
        }
        if (p.type == "perturbed" && c.system.type == "linear") {
            throw ConfigError("perturbation.type: perturbed applies to cat maps only");
        }
        if (p.type == "system" && !p.system) {
            throw ConfigError("perturbation.system: required for system perturbations");
        }
    }

    if (doc.contains("sweep")) {
        const json& j = doc["sweep"];
        check_keys(j, "sweep", {"axis", "values"});
        SweepSpec s;
        if (!j.contains("axis") || !j.contains("values")) {
            throw ConfigError("sweep: axis and values are required");
        }
        s.axis = get_string(j["axis"], "sweep.axis");
        if (s.axis != "delta" && s.axis != "d" && s.axis != "epsilon" && s.axis != "lambda") {
            throw ConfigError("sweep.axis: expected delta, d, epsilon or lambda");
        }
        const Vec v = get_vec(j["values"], "sweep.values");
        s.values.assign(v.data(), v.data() + v.size());
        if (!std::is_sorted(s.values.begin(), s.values.end())) {
            throw ConfigError("sweep.values: must be sorted ascending");
        }
        for (double x : s.values) {
            if (s.axis == "lambda") {
                in_open_unit(x, "sweep.values");
            } else {
                nonnegative(x, "sweep.values");
            }
        }
        c.sweep = std::move(s);
    }

    if (doc.contains("output")) {
        const json& j = doc["output"];
        check_keys(j, "output", {"path"});
        if (j.contains("path")) {
            c.output_path = get_string(j["path"], "output.path");
        }
    }
    return c;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot read config file '" + path + "'");
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

MapPtr build_system(const SystemSpec& spec) {
    try {
        if (spec.type == "cat") {
            return cat_map();
        }
        if (spec.type == "perturbed_cat") {
            return perturbed_cat_map(spec.amplitude);
        }
        const int n = static_cast<int>(spec.matrix.rows());
        return linear_map(spec.torus ? Phase::torus(n) : Phase::euclidean(n), spec.matrix);
    } catch (const Error& e) {
        throw ConfigError(std::string("system: ") + e.what());
    }
}

MapPtr build_perturbation(const RunConfig& cfg, const MapPtr& f) {
    const auto& p = cfg.perturbation;
    if (p.type == "shift") {
        return shifted_map(f, p.shift);
    }
    if (p.type == "perturbed") {
        return perturbed_cat_map(p.amplitude);
    }
    if (p.type == "system") {
        MapPtr g = build_system(*p.system);
        if (!(g->phase() == f->phase())) {
            throw ConfigError("perturbation.system: phase space differs from the system");
        }
        return g;
    }
    return f;
}

SegmentedPseudoOrbit build_pseudo_orbit(const RunConfig& cfg, const MapPtr& f) {
    const auto& p = cfg.pseudo_orbit;
    const Phase& ph = f->phase();
    try {
        if (!p.seeds.empty()) {
            std::vector<Point> seeds;
            for (const auto& s : p.seeds) {
                seeds.push_back(ph.point(s));
            }
            std::optional<Point> terminal;
            if (p.periodic) {
                terminal = seeds.front();
            } else if (p.terminal) {
                terminal = ph.point(*p.terminal);
            }
            return SegmentedPseudoOrbit::flatten(*f, std::move(seeds), p.lengths, terminal);
        }
        const Point x0 = ph.point(*p.x0);
        if (p.periodic) {
            return generate_periodic(*f, x0, p.lengths, p.jump_amp, p.rng_seed);
        }
        return generate(f, x0, p.lengths, p.jump_amp, p.rng_seed);
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError(std::string("pseudo_orbit: ") + e.what());
    }
}

PseudoOrbitGenerator build_generator(const RunConfig& cfg, const MapPtr& f) {
    const auto& p = cfg.pseudo_orbit;
    if (!p.x0) {
        throw ConfigError("pseudo_orbit: windows need a generated orbit");
    }
    return PseudoOrbitGenerator(f, f->phase().point(*p.x0), p.lengths, p.jump_amp, p.rng_seed);
}

SplittingStrategy build_strategy(const RunConfig& cfg) {
    const auto& s = cfg.splitting;
    if (s.strategy == "power") {
        return PowerIterationStrategy{s.steps, 1e-6, s.dim_u};
    }
    if (s.strategy == "axes") {
        const int n = cfg.system.type == "linear" ? static_cast<int>(cfg.system.matrix.rows()) : 2;
        return ConstantStrategy{Splitting::axes(n, s.dim_u)};
    }
    if (cfg.system.type == "perturbed_cat") {
        // a constant eigen-splitting of the unperturbed cat matrix
        return ConstantStrategy{eigen_splitting(cat_matrix())};
    }
    return EigenStrategy{};
}

RefinementConfig refinement_config(const RunConfig& cfg) {
    RefinementConfig r;
    r.lambda = cfg.certification.lambda;
    r.lambda_tilde = cfg.refinement.lambda_tilde;
    r.lambda_0 = cfg.refinement.lambda_0;
    r.epsilon = cfg.certification.epsilon;
    r.delta = cfg.certification.delta;
    r.fp_tol = cfg.refinement.fp_tol;
    r.max_iter = cfg.refinement.max_iter;
    return r;
}

SolverConfig solver_config(const RunConfig& cfg) {
    SolverConfig s;
    s.lambda = cfg.certification.lambda;
    s.lambda_tilde = cfg.solver.lambda_tilde;
    s.epsilon = cfg.certification.epsilon;
    s.delta = cfg.certification.delta;
    s.eta = cfg.solver.eta;
    s.tol_fix = cfg.solver.tol_fix;
    s.max_iter = cfg.solver.max_iter;
    s.polish = cfg.solver.polish;
    return s;
}

} // namespace qshadow
