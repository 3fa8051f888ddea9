#include "qshadow/report.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace qshadow {

using nlohmann::json;

std::string format_double(double x) {
    if (std::isnan(x)) {
        return "nan";
    }
    if (std::isinf(x)) {
        return x > 0 ? "inf" : "-inf";
    }
    std::array<char, 64> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), x);
    return std::string(buf.data(), res.ptr);
}

std::string format_coord(double x) {
    std::array<char, 40> buf{};
    std::snprintf(buf.data(), buf.size(), "%.17g", x);
    return buf.data();
}

namespace {

// JSON has no infinities; they are written as strings
json num(double x) {
    if (std::isfinite(x)) {
        return x;
    }
    return format_double(x);
}

json num_array(const std::vector<double>& xs) {
    json a = json::array();
    for (double x : xs) {
        a.push_back(num(x));
    }
    return a;
}

} // namespace

json to_json(const Vec& v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        a.push_back(num(v[i]));
    }
    return a;
}

json to_json(const Margin& m) {
    return {{"condition", std::string(condition_name(m.condition))},
            {"segment", m.segment},
            {"step", m.step},
            {"lhs", num(m.lhs)},
            {"rhs", num(m.rhs)},
            {"slack", num(m.slack)}};
}

json to_json(const Certificate& c, bool with_margins) {
    json j{{"passed", c.passed},
           {"lambda", num(c.lambda)},
           {"epsilon", num(c.epsilon)},
           {"delta", num(c.delta)},
           {"is_quasi_hyperbolic", is_quasi_hyperbolic(c)}};
    json worst = json::array();
    for (const auto& m : c.worst_per_condition()) {
        worst.push_back(to_json(m));
    }
    j["worst_per_condition"] = std::move(worst);
    if (const auto b = c.binding()) {
        j["binding"] = to_json(*b);
    }
    if (with_margins) {
        json ms = json::array();
        for (const auto& m : c.margins) {
            ms.push_back(to_json(m));
        }
        j["margins"] = std::move(ms);
    }
    return j;
}

json to_json(const SegmentedPseudoOrbit& po) {
    auto coords = [](const Point& p) {
        json a = json::array();
        for (Eigen::Index i = 0; i < p.dim(); ++i) {
            a.push_back(format_coord(p[i]));
        }
        return a;
    };
    json seeds = json::array();
    for (const auto& s : po.seeds()) {
        seeds.push_back(coords(s));
    }
    return {{"first_segment", po.first_segment()},
            {"seeds", std::move(seeds)},
            {"lengths", std::vector<int>(po.lengths().begin(), po.lengths().end())},
            {"terminal", coords(po.terminal())},
            {"residuals", num_array({po.residuals().begin(), po.residuals().end()})},
            {"total_length", po.total_length()},
            {"closed", po.is_closed()}};
}

json to_json(const SolverConstants& k) {
    return {{"lambda", num(k.lambda)}, {"lambda_tilde", num(k.lambda_tilde)}, {"R", num(k.R)},
            {"eps_0", num(k.eps_0)},   {"eps_1", num(k.eps_1)},               {"eta", num(k.eta)},
            {"a", k.a},                {"C", num(k.C)},                       {"delta_1", num(k.delta_1)},
            {"delta_0", num(k.delta_0)}, {"d_0", num(k.d_0)}};
}

json to_json(const Preconditions& p) {
    return {{"certified", p.certified},
            {"epsilon_ok", p.epsilon_ok},
            {"delta_ok", p.delta_ok},
            {"d_ok", p.d_ok},
            {"max_residual", num(p.max_residual)},
            {"d", num(p.d)},
            {"certificate", to_json(p.certificate, false)}};
}

json to_json(const ShadowingResult& r) {
    json v = json::array();
    for (const auto& x : r.v) {
        v.push_back(to_json(x));
    }
    json j{{"v", std::move(v)},
           {"distances", num_array(r.distances)},
           {"max_distance", num(r.max_distance())},
           {"orbit_residuals", num_array(r.orbit_residuals)},
           {"max_orbit_residual", num(r.max_orbit_residual())},
           {"scale_factors", num_array(r.scale)},
           {"adapted_norms", r.adapted},
           {"update_history", num_array(r.update_history)},
           {"iterations", r.iterations},
           {"converged", r.converged},
           {"damped", r.damped},
           {"ball_violations", r.ball_violations},
           {"max_norm_N", num(r.max_norm_N)},
           {"constants", to_json(r.constants)}};
    if (r.x) {
        json x = json::array();
        for (Eigen::Index i = 0; i < r.x->dim(); ++i) {
            x.push_back(format_coord((*r.x)[i]));
        }
        j["shadow_point"] = std::move(x);
    }
    if (r.preconditions) {
        j["preconditions"] = to_json(*r.preconditions);
    }
    if (r.periodic_closure) {
        j["periodic_closure"] = num(*r.periodic_closure);
    }
    if (r.polish) {
        json x = json::array();
        for (Eigen::Index i = 0; i < r.polish->x.dim(); ++i) {
            x.push_back(format_coord(r.polish->x[i]));
        }
        j["newton_polish"] = {{"point", std::move(x)},
                              {"closure", num(r.polish->closure)},
                              {"iterations", r.polish->iterations},
                              {"converged", r.polish->converged}};
    }
    return j;
}

json to_json(const InfiniteResult& r) {
    json rows = json::array();
    for (const auto& w : r.table) {
        rows.push_back({{"k", w.k},
                        {"v0", to_json(w.v0)},
                        {"diff", std::isnan(w.diff) ? json(nullptr) : num(w.diff)},
                        {"converged", w.converged},
                        {"iterations", w.iterations}});
    }
    json x = json::array();
    for (Eigen::Index i = 0; i < r.x.dim(); ++i) {
        x.push_back(format_coord(r.x[i]));
    }
    return {{"windows", std::move(rows)},
            {"windows_converged", r.converged},
            {"shadow_point_x0", std::move(x)},
            {"largest_window", to_json(r.result)}};
}

json to_json(const RefinedSplitting& r) {
    const auto& k = r.constants;
    auto graph = [](const GraphSolve& g) {
        return json{{"iterations", g.iterations},
                    {"converged", g.converged},
                    {"updates", num_array(g.updates)},
                    {"invariance_residual", num(g.invariance_residual)},
                    {"max_norm", num(g.max_norm)}};
    };
    json bases = json::array();
    for (const auto& s : r.splittings.all()) {
        json u = json::array();
        json st = json::array();
        for (Eigen::Index c = 0; c < s.unstable().cols(); ++c) {
            u.push_back(to_json(Vec(s.unstable().col(c))));
        }
        for (Eigen::Index c = 0; c < s.stable().cols(); ++c) {
            st.push_back(to_json(Vec(s.stable().col(c))));
        }
        bases.push_back({{"unstable", std::move(u)}, {"stable", std::move(st)}});
    }
    const bool quasi = r.certificate.passed && r.max_off_diagonal <= 1e-8;
    return {{"constants",
             {{"lambda", num(k.lambda)},
              {"lambda_tilde", num(k.lambda_tilde)},
              {"lambda_0", num(k.lambda_0)},
              {"R", num(k.R)},
              {"eps_cap", num(k.eps_cap)},
              {"epsilon", num(k.epsilon)},
              {"delta", num(k.delta)},
              {"delta_1", num(k.delta_1)}}},
            {"unstable_graphs", graph(r.unstable)},
            {"stable_graphs", graph(r.stable)},
            {"input_certificate", to_json(r.input_certificate, false)},
            {"refined_certificate", to_json(r.certificate, false)},
            {"max_off_diagonal", num(r.max_off_diagonal)},
            {"is_quasi_hyperbolic", quasi},
            {"sandwich_ok", r.sandwich_ok},
            {"expansion_ok", r.expansion_ok},
            {"contraction_ok", r.contraction_ok},
            {"min_angle", num(r.min_angle)},
            {"splittings", std::move(bases)}};
}

std::string dump(const json& doc) { return doc.dump(2) + "\n"; }

std::string certificate_csv(const Certificate& c) {
    std::ostringstream os;
    os << "segment,step,condition,lhs,rhs,margin\n";
    for (const auto& m : c.margins) {
        os << m.segment << ',' << m.step << ',' << condition_name(m.condition) << ',' << format_double(m.lhs) << ','
           << format_double(m.rhs) << ',' << format_double(m.slack) << '\n';
    }
    return os.str();
}

std::string shadow_csv(const ShadowingResult& r) {
    std::ostringstream os;
    os << "j,distance,orbit_residual\n";
    for (std::size_t j = 0; j < r.distances.size(); ++j) {
        os << j << ',' << format_double(r.distances[j]) << ',';
        if (j < r.orbit_residuals.size()) {
            os << format_double(r.orbit_residuals[j]);
        }
        os << '\n';
    }
    return os.str();
}

std::string refine_csv(const RefinedSplitting& r) {
    std::ostringstream os;
    os << "j,min_norm_M,norm_N,off_diagonal\n";
    for (std::size_t j = 0; j < r.blocks.size(); ++j) {
        os << j << ',' << format_double(min_norm(r.M[j])) << ',' << format_double(op_norm(r.N[j])) << ','
           << format_double(r.blocks[j].max_off_diagonal()) << '\n';
    }
    return os.str();
}

} // namespace qshadow
