#include "qshadow/commands.hpp"

#include <atomic>
#include <chrono>
#include <sstream>
#include <thread>

#include "qshadow/errors.hpp"
#include "qshadow/report.hpp"

namespace qshadow {

using nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

json header(const RunConfig& cfg, const char* command) {
    return {{"tool", "qshadow"}, {"version", tool_version}, {"command", command}, {"config", cfg.raw}};
}

void check_format(const CommandOptions& opts) {
    if (opts.format != "json" && opts.format != "csv") {
        throw ConfigError("--format: expected json or csv");
    }
}

SegmentedPseudoOrbit run_pseudo_orbit(const RunConfig& cfg, const MapPtr& f) {
    if (!cfg.pseudo_orbit.windows.empty()) {
        return build_generator(cfg, f).window(cfg.pseudo_orbit.windows.back());
    }
    return build_pseudo_orbit(cfg, f);
}

} // namespace

CommandResult cmd_certify(const RunConfig& cfg, const CommandOptions& opts) {
    check_format(opts);
    const auto t0 = Clock::now();
    const MapPtr f = build_system(cfg.system);
    const SegmentedPseudoOrbit po = run_pseudo_orbit(cfg, f);
    const SplittingAssignment sp = assign_splittings(po, *f, build_strategy(cfg));
    const auto& c = cfg.certification;
    const Certificate cert = certify_pseudo_orbit(po, sp, *f, c.lambda, c.epsilon, c.delta);
    CommandResult out;
    out.exit_code = cert.passed ? exit_ok : exit_failed;
    if (!cert.passed) {
        const auto b = cert.binding();
        out.message = "certification failed: " + std::string(condition_name(b->condition)) + " (segment " +
                      std::to_string(b->segment) + ", step " + std::to_string(b->step) + ")";
    }
    if (opts.format == "csv") {
        out.output = certificate_csv(cert);
        return out;
    }
    json doc = header(cfg, "certify");
    doc["pseudo_orbit"] = to_json(po);
    doc["certificate"] = to_json(cert);
    const auto mfl = min_feasible_lambda(po, sp, *f, c.epsilon);
    doc["min_feasible_lambda"] = mfl ? json(*mfl) : json(nullptr);
    if (opts.timing) {
        doc["wall_ms"] = elapsed_ms(t0);
    }
    out.output = dump(doc);
    return out;
}

CommandResult cmd_refine(const RunConfig& cfg, const CommandOptions& opts) {
    check_format(opts);
    const auto t0 = Clock::now();
    const MapPtr f = build_system(cfg.system);
    const SegmentedPseudoOrbit po = run_pseudo_orbit(cfg, f);
    const SplittingAssignment sp = assign_splittings(po, *f, build_strategy(cfg));
    const RefinedSplitting r = refine(po, sp, *f, refinement_config(cfg));
    CommandResult out;
    const bool quasi = r.certificate.passed && r.max_off_diagonal <= 1e-8;
    out.exit_code = quasi ? exit_ok : exit_failed;
    if (!quasi) {
        out.message = "refined splitting is not quasi-hyperbolic at lambda_tilde";
    }
    if (opts.format == "csv") {
        out.output = refine_csv(r);
        return out;
    }
    json doc = header(cfg, "refine");
    doc["pseudo_orbit"] = to_json(po);
    doc["refinement"] = to_json(r);
    if (opts.timing) {
        doc["wall_ms"] = elapsed_ms(t0);
    }
    out.output = dump(doc);
    return out;
}

namespace {

int solver_exit(const ShadowingResult& r, std::string& message) {
    if (r.preconditions && !r.preconditions->all()) {
        const auto& p = *r.preconditions;
        message = "preconditions not met:";
        if (!p.certified) message += " certification";
        if (!p.epsilon_ok) message += " epsilon>eps_0";
        if (!p.delta_ok) message += " residual>delta_0";
        if (!p.d_ok) message += " |f-g|>d_0";
        return exit_failed;
    }
    if (!r.converged) {
        message = "shadowing iteration did not converge";
        return exit_not_converged;
    }
    return exit_ok;
}

} // namespace

CommandResult cmd_shadow(const RunConfig& cfg, const CommandOptions& opts) {
    check_format(opts);
    const auto t0 = Clock::now();
    const MapPtr f = build_system(cfg.system);
    const MapPtr g = build_perturbation(cfg, f);
    CommandResult out;
    json doc = header(cfg, "shadow");
    const ShadowingResult* result = nullptr;
    std::optional<InfiniteResult> inf;
    std::optional<ShadowingResult> fin;
    if (!cfg.pseudo_orbit.windows.empty()) {
        const PseudoOrbitGenerator gen = build_generator(cfg, f);
        inf = solve_infinite(gen, cfg.pseudo_orbit.windows, g, build_strategy(cfg), solver_config(cfg));
        result = &inf->result;
        doc["shadowing"] = to_json(*inf);
    } else {
        const SegmentedPseudoOrbit po = build_pseudo_orbit(cfg, f);
        const SplittingAssignment sp = assign_splittings(po, *f, build_strategy(cfg));
        fin = solve_finite(po, sp, f, g, solver_config(cfg));
        result = &*fin;
        doc["pseudo_orbit"] = to_json(po);
        doc["shadowing"] = to_json(*fin);
    }
    out.exit_code = solver_exit(*result, out.message);
    if (opts.format == "csv") {
        out.output = shadow_csv(*result);
        return out;
    }
    if (opts.timing) {
        doc["wall_ms"] = elapsed_ms(t0);
    }
    out.output = dump(doc);
    return out;
}

CommandResult cmd_periodic(const RunConfig& cfg, const CommandOptions& opts) {
    check_format(opts);
    if (!cfg.pseudo_orbit.periodic) {
        throw ConfigError("periodic: pseudo_orbit.periodic must be true");
    }
    const auto t0 = Clock::now();
    const MapPtr f = build_system(cfg.system);
    const MapPtr g = build_perturbation(cfg, f);
    const SegmentedPseudoOrbit po = build_pseudo_orbit(cfg, f);
    const SplittingAssignment sp = assign_splittings(po, *f, build_strategy(cfg));
    const ShadowingResult r = solve_periodic(po, sp, f, g, solver_config(cfg));
    CommandResult out;
    out.exit_code = solver_exit(r, out.message);
    if (opts.format == "csv") {
        out.output = shadow_csv(r);
        return out;
    }
    json doc = header(cfg, "periodic");
    doc["pseudo_orbit"] = to_json(po);
    doc["shadowing"] = to_json(r);
    doc["closure_v"] = (r.v.back() - r.v.front()).norm();
    if (opts.timing) {
        doc["wall_ms"] = elapsed_ms(t0);
    }
    out.output = dump(doc);
    return out;
}

namespace {

SweepRow sweep_cell(const RunConfig& base, double value) {
    const auto t0 = Clock::now();
    SweepRow row;
    row.axis_value = value;
    try {
        RunConfig c = base;
        const std::string& axis = base.sweep->axis;
        if (axis == "delta") {
            c.pseudo_orbit.jump_amp = value;
            c.certification.delta = value;
        } else if (axis == "epsilon") {
            c.certification.epsilon = value;
        } else if (axis == "lambda") {
            c.certification.lambda = value;
        }
        const MapPtr f = build_system(c.system);
        MapPtr g = build_perturbation(c, f);
        if (axis == "d") {
            const int n = f->dim();
            Vec dir = c.perturbation.shift.size() == n && c.perturbation.shift.norm() > 0.0
                          ? Vec(c.perturbation.shift.normalized())
                          : Vec(Vec::Unit(n, 0));
            g = value == 0.0 ? f : shifted_map(f, value * dir);
        }
        const SegmentedPseudoOrbit po = run_pseudo_orbit(c, f);
        const SplittingAssignment sp = assign_splittings(po, *f, build_strategy(c));
        const SolverConfig sc = solver_config(c);
        const ShadowingResult r = c.pseudo_orbit.periodic ? solve_periodic(po, sp, f, g, sc)
                                                          : solve_finite(po, sp, f, g, sc);
        row.certified = r.preconditions && r.preconditions->certified;
        row.converged = r.converged;
        row.max_shadow_distance = r.max_distance();
        row.iterations = r.iterations;
    } catch (const std::exception& e) {
        row.error = e.what();
    }
    row.wall_ms = elapsed_ms(t0);
    return row;
}

} // namespace

std::vector<SweepRow> run_sweep(const RunConfig& cfg, unsigned jobs) {
    if (!cfg.sweep) {
        throw ConfigError("sweep: missing 'sweep' block");
    }
    const auto& values = cfg.sweep->values;
    std::vector<SweepRow> rows(values.size());
    if (jobs == 0) {
        jobs = std::max(1u, std::thread::hardware_concurrency());
    }
    jobs = std::min<unsigned>(jobs, static_cast<unsigned>(std::max<std::size_t>(values.size(), 1)));
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < values.size(); i = next++) {
            rows[i] = sweep_cell(cfg, values[i]);
        }
    };
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < jobs; ++t) {
        pool.emplace_back(worker);
    }
    worker();
    for (auto& t : pool) {
        t.join();
    }
    return rows;
}

std::string sweep_csv(const std::vector<SweepRow>& rows, bool timing) {
    std::ostringstream os;
    os << "axis_value,certified,converged,max_shadow_distance,iterations,wall_ms\n";
    for (const auto& r : rows) {
        os << format_double(r.axis_value) << ',' << (r.certified ? "true" : "false") << ','
           << (r.converged ? "true" : "false") << ',';
        if (r.max_shadow_distance) {
            os << format_double(*r.max_shadow_distance);
        }
        os << ',' << r.iterations << ',';
        if (timing) {
            os << format_double(r.wall_ms);
        }
        os << '\n';
    }
    return os.str();
}

CommandResult cmd_sweep(const RunConfig& cfg, const CommandOptions& opts) {
    check_format(opts);
    const auto rows = run_sweep(cfg, opts.jobs);
    CommandResult out;
    if (opts.format == "csv") {
        out.output = sweep_csv(rows, opts.timing);
        return out;
    }
    json doc = header(cfg, "sweep");
    json arr = json::array();
    for (const auto& r : rows) {
        json j{{"axis_value", r.axis_value},
               {"certified", r.certified},
               {"converged", r.converged},
               {"max_shadow_distance", r.max_shadow_distance ? json(*r.max_shadow_distance) : json(nullptr)},
               {"iterations", r.iterations}};
        if (opts.timing) {
            j["wall_ms"] = r.wall_ms;
        }
        if (!r.error.empty()) {
            j["error"] = r.error;
        }
        arr.push_back(std::move(j));
    }
    doc["rows"] = std::move(arr);
    out.output = dump(doc);
    return out;
}

CommandResult run_command(const std::string& name, RunConfig cfg, const CommandOptions& opts) {
    if (opts.seed) {
        cfg.pseudo_orbit.rng_seed = *opts.seed;
        cfg.raw["pseudo_orbit"]["rng_seed"] = *opts.seed;
    }
    try {
        if (name == "certify") return cmd_certify(cfg, opts);
        if (name == "refine") return cmd_refine(cfg, opts);
        if (name == "shadow") return cmd_shadow(cfg, opts);
        if (name == "periodic") return cmd_periodic(cfg, opts);
        if (name == "sweep") return cmd_sweep(cfg, opts);
        return {exit_config, "", "unknown command '" + name + "'"};
    } catch (const ConfigError& e) {
        return {exit_config, "", e.what()};
    } catch (const ConvergenceError& e) {
        return {exit_not_converged, "", e.what()};
    } catch (const Error& e) {
        return {exit_failed, "", e.what()};
    }
}

} // namespace qshadow
